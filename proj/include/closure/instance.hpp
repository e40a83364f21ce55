#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "closure/types.hpp"

namespace closure {

enum class Sense { le, eq, ge };
enum class ObjSense { minimize, maximize };

std::string to_string(Sense s);
Sense sense_from_string(const std::string& s);

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    bool is_integer = false;
    double obj_coeff = 0.0;
};

struct Constraint {
    std::string name;
    SparseVec coeffs;  // var index -> coefficient, no explicit zeros
    Sense sense = Sense::le;
    double rhs = 0.0;
};

/// A general MILP; the unit of perturbation and learning.
struct MilpInstance {
    std::string name;
    std::vector<Variable> vars;
    std::vector<Constraint> constraints;
    ObjSense objective_sense = ObjSense::minimize;

    /// Throws ConversionError on index out of range, lower > upper, or
    /// explicit zero coefficients.
    void validate() const;

    std::string to_json_string() const;
    static MilpInstance from_json_string(const std::string& text);

    void save_json(const std::string& path) const;
    static MilpInstance load_json(const std::string& path);

    /// Dispatches on extension: .mps -> MPS, anything else -> native JSON.
    static MilpInstance load(const std::string& path);
};

/// Hash over variable count, integrality mask, senses and the sparsity
/// pattern + values of the constraint matrix. Right-hand sides, objective
/// and bounds are excluded, so all members of a perturbed family agree.
uint64_t instance_signature(const MilpInstance& inst);

}  // namespace closure

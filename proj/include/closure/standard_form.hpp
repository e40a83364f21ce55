#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "closure/cut.hpp"
#include "closure/instance.hpp"
#include "closure/types.hpp"

namespace closure {

/// min c^T x, Ax = b, x >= 0, x_j integer for j in the mask.
struct StandardFormMilp {
    SparseMatrix A;
    std::vector<double> b;
    std::vector<double> c;
    std::vector<bool> integer_mask;

    int rows() const { return A.rows(); }
    int cols() const { return A.cols(); }
};

/// Affine expression over original variables: constant + sum coeffs*x.
struct AffineExpr {
    double constant = 0.0;
    SparseVec coeffs;
};

struct VariableMap {
    enum class Provenance { original, split_pos, split_neg, slack, surplus, bound_slack };

    struct StdVar {
        Provenance kind;
        int ref;  // original var index, or constraint/bound owner index
        // Expression of this standard variable over original variables;
        // absent for split halves (x+ / x- are not affine in x).
        std::optional<AffineExpr> expr;
    };

    struct OrigVar {
        double shift = 0.0;  // x = y + shift (or x = shift - y when negated)
        bool negated = false;
        std::optional<std::pair<int, int>> split;  // (pos, neg) standard indices
        int std_index = -1;                        // when not split
    };

    enum class RowKind { constraint, bound };
    struct StdRow {
        RowKind kind;
        int ref;  // original constraint index, or original var index for bound rows
    };

    std::vector<StdVar> std_vars;
    std::vector<OrigVar> orig_vars;
    std::vector<StdRow> std_rows;

    // original objective value = sense_flip * (standard objective) + objective_constant
    double sense_flip = 1.0;
    double objective_constant = 0.0;

    double original_objective(double standard_obj) const {
        return sense_flip * standard_obj + objective_constant;
    }

    /// Canonical embedding of an original point (free vars go to x+/x-).
    std::vector<double> to_standard_point(const std::vector<double>& x,
                                          const StandardFormMilp& sf) const;

    /// Drops auxiliary columns, undoes shifts/negations/splits.
    std::vector<double> to_original_point(std::span<const double> y) const;
};

struct StandardFormOptions {
    int max_free_integer_splits = 64;
};

/// Converts to the min / equality / nonnegative form. Max objectives are
/// negated, lower bounds shifted to zero, free variables split, finite upper
/// bounds turned into explicit rows with a continuous bound slack, and
/// inequality rows given continuous slack/surplus columns. Only original
/// integer variables are marked integer.
std::pair<StandardFormMilp, VariableMap> to_standard_form(
    const MilpInstance& inst, const StandardFormOptions& opts = {});

/// Substitutes auxiliary variables by their defining expressions and undoes
/// shifts/negations. Throws MapError for cuts touching split halves (no
/// affine preimage exists) or standard variables absent from the map.
Cut map_cut_to_original(const Cut& cut, const VariableMap& map, const StandardFormMilp& sf);

/// Forward translation of an original-space inequality into standard space
/// (always affine); used to certify original cuts against the oracle.
std::pair<std::vector<double>, double> inequality_to_standard_space(
    const SparseVec& coeffs, double rhs, const VariableMap& map, const StandardFormMilp& sf);

}  // namespace closure

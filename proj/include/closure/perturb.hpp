#pragma once

#include <string>
#include <vector>

#include "closure/instance.hpp"
#include "closure/types.hpp"

namespace closure {

struct PerturbConfig {
    double rhs_lo = 0.9, rhs_hi = 1.1;    // multiplicative rhs range
    double obj_lo = 0.75, obj_hi = 1.25;  // multiplicative objective range
    int n_train = 50;
    int n_test = 5;
    int feasibility_probe_count = 5;
    uint64_t seed = 0;
    long long probe_node_limit = 100000;

    void validate() const;
};

/// Rhs eligibility rules: rule1 = two variables with exactly one discrete;
/// rule2 = more than two variables with a continuous one; rule3 =
/// all-discrete inequality with rhs != 1; rule4 = all-discrete equality
/// (additive {-1,0,1}); none otherwise. Set-packing/partitioning shapes
/// deliberately fall through to none.
enum class PerturbRule { rule1, rule2, rule3, rule4, none };

std::string to_string(PerturbRule r);

enum class PerturbChannel { rhs, obj, both };

PerturbRule classify_constraint(const Constraint& con, const std::vector<Variable>& vars);

/// One variation: eligible constraints get fresh multiplicative rhs draws
/// (rule4 rows an additive shift), every objective coefficient a fresh
/// multiplier. Objectives supported on a single variable are left alone.
/// Deterministic given the seed.
MilpInstance perturb_instance(const MilpInstance& inst, const PerturbConfig& cfg, uint64_t seed,
                              PerturbChannel which);

struct VariationInfo {
    std::string id;
    uint64_t seed = 0;
    bool rhs_applied = false;
    bool obj_applied = false;
};

struct Family {
    MilpInstance seed_instance;
    std::vector<MilpInstance> train;
    std::vector<MilpInstance> test;
    bool rhs_enabled = false;
    bool obj_enabled = false;
    std::vector<VariationInfo> provenance;  // train variations first, then test
    std::vector<std::string> log;
};

/// Probes rhs perturbations for integer feasibility before enabling the rhs
/// channel, disables the objective channel for single-variable objectives,
/// then emits n_train + n_test variations. Throws FamilyError("no changes")
/// when neither channel applies.
Family generate_family(const MilpInstance& inst, const PerturbConfig& cfg);

}  // namespace closure

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "closure/cut.hpp"
#include "closure/simplex.hpp"
#include "closure/standard_form.hpp"

namespace closure {

struct CollectConfig {
    int max_rounds = 10;            // K
    double frac_threshold = 0.001;  // rhs fractionality gate for row selection
    int max_rows_per_basis = 500;   // q(B) = min{q_hat, 500}
    double dual_zero_tol = 1e-7;
    double obj_stall_tol = 1e-9;  // relative, two consecutive rounds
    // When set, the pool records the LP-with-cuts optimum re-solved after
    // each zero-dual removal (it must be unchanged).
    bool audit_zero_dual_drops = false;

    void validate() const;
};

enum class TerminationReason { stalled, basis_repeat, round_limit, integral_lp };

std::string to_string(TerminationReason r);
TerminationReason termination_reason_from_string(const std::string& s);

struct PoolCut {
    Cut cut;            // standard space, rhs 1
    SparseVec lambda;   // regenerates the cut via gmic_from_multiplier
    uint64_t basis_hash = 0;
    int row_index = -1;
    double dual = 0.0;  // latest LP-with-cuts dual
};

struct RoundRecord {
    double lp_with_cuts_obj = 0.0;
    int dropped = 0;    // zero-dual cuts discarded this round
    int harvested = 0;  // new cuts retained from the visited basis
    uint64_t basis_hash = 0;
    std::optional<double> post_drop_obj;  // audit re-solve, when enabled
};

struct CutPool {
    std::vector<PoolCut> cuts;
    std::vector<uint64_t> visited_bases;
    std::vector<RoundRecord> rounds;
    TerminationReason termination_reason = TerminationReason::round_limit;
    double lp_relaxation_obj = 0.0;
    double final_obj = 0.0;  // LP-with-cuts optimum at the final selection

    std::vector<Cut> cut_list() const;
    std::string to_json_string() const;
};

/// Keeps rows whose basic variable is integer with rhs fractionality above
/// the threshold, sorted by fractionality descending (ties by ascending row
/// index), truncated to max_rows_per_basis.
std::vector<TableauRow> select_rows(std::vector<TableauRow> rows,
                                    const std::vector<bool>& integer_mask,
                                    const CollectConfig& cfg);

/// c - sum_j u_j alpha_j over the active cuts. The constant sum u_j * rhs_j
/// does not affect the argmin and is not included.
std::vector<double> lagrangian_objective(const std::vector<double>& c,
                                         const std::vector<std::pair<Cut, double>>& active);

/// The LP relaxation plus all cuts appended as >=-rows, each with a fresh
/// continuous surplus column.
StandardFormMilp lp_with_cuts(const StandardFormMilp& sf, const std::vector<Cut>& cuts);

/// Relax-and-cut collection: harvest GMICs from the optimal basis, then
/// alternate the LP-with-cuts (for duals) with a Lagrangian-penalized plain
/// LP (for new bases), dropping zero-dual cuts each round. Ends on objective
/// stall, basis recurrence or the round limit; the returned pool keeps only
/// cuts with positive duals at the final re-solve.
CutPool collect_cuts(const StandardFormMilp& sf, const CollectConfig& cfg = {});

/// LP-with-cuts optimum; the gap-closed numerator.
double final_bound(const StandardFormMilp& sf, const std::vector<Cut>& cuts);
double final_bound(const StandardFormMilp& sf, const CutPool& pool);

}  // namespace closure

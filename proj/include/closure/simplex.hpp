#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "closure/standard_form.hpp"
#include "closure/types.hpp"

namespace closure {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

std::string to_string(LpStatus s);

class BasisFactor;  // dense LU (partial pivoting) of the basis matrix

/// Basic column per row position. Indices >= n denote the artificial column
/// of row (index - n), which can stay basic at value zero on degenerate rows.
struct Basis {
    std::vector<int> columns;
    std::vector<double> art_signs;  // per-row sign of the artificial column
    std::shared_ptr<const BasisFactor> factor;

    int size() const { return static_cast<int>(columns.size()); }
    uint64_t hash() const;  // over the sorted column set
};

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;      // length n, nonbasic columns exactly 0
    double obj = 0.0;
    std::vector<double> duals;  // length m, from B^T y = c_B
    std::optional<Basis> basis;
    int iterations = 0;
};

/// Aggregation multiplier lambda = e_i^T B^{-1} together with the aggregated
/// row alpha = lambda^T A, beta = lambda^T b.
struct TableauRow {
    SparseVec lambda;
    std::vector<double> alpha;
    double beta = 0.0;
    int basic_var = -1;  // >= n means the row's basic column is artificial
    int row_index = -1;
};

/// Primal simplex, Dantzig pricing with a Bland fallback after 3(m+n)
/// iterations without objective progress; iteration cap 50(m+n) per phase.
LpResult solve_lp(const StandardFormMilp& sf, const std::vector<double>& objective);
LpResult solve_lp(const StandardFormMilp& sf);

/// Same contract as solve_lp but warm-started from a basis of the same
/// system; falls back to a cold solve if the basis is not primal feasible.
LpResult resolve_with_objective(const StandardFormMilp& sf, const Basis& warm,
                                const std::vector<double>& objective);

/// Row i of the tableau via two triangular solves against the stored
/// factorization. Entries of lambda below 1e-11 are dropped; alpha is snapped
/// to the exact 0/1 identity pattern on basic columns.
TableauRow tableau_row(const StandardFormMilp& sf, const Basis& basis, int i);
std::vector<TableauRow> tableau_rows(const StandardFormMilp& sf, const Basis& basis);

}  // namespace closure

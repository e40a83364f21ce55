#pragma once

#include <optional>
#include <span>
#include <vector>

#include "closure/cut.hpp"
#include "closure/standard_form.hpp"
#include "closure/types.hpp"

namespace closure {

/// u - floor(u), clamped into [0, 1). Exactly 0 for integral u.
double fractional_part(double u);

/// Distance to the nearest integer: min{f(u), 1 - f(u)}.
double fractionality(double u);

/// Rhs fractionality gate: no cut is generated when the fractional part of
/// beta falls outside [kIntegralityGate, 1 - kIntegralityGate].
constexpr double kIntegralityGate = 0.001;
constexpr double kCoeffDropTol = 1e-11;

/// The mixed-integer cut of an aggregated row sum_j alpha_j x_j = beta over
/// x >= 0 with integrality on the mask. Integer columns get
/// f(alpha)/f(beta) or (1-f(alpha))/(1-f(beta)); continuous columns get
/// alpha/f(beta) or -alpha/(1-f(beta)). Returns nullopt when beta is
/// integral within the gate (the cut degenerates to the whole orthant).
std::optional<Cut> gmic_from_row(std::span<const double> alpha, double beta,
                                 const std::vector<bool>& integer_mask);

/// Aggregates the system rows by lambda (alpha = lambda^T A, beta =
/// lambda^T b) and delegates to gmic_from_row. The multiplier is recorded
/// nowhere on the cut; callers own origin metadata.
std::optional<Cut> gmic_from_multiplier(const SparseVec& lambda, const StandardFormMilp& sf);

/// rhs - coeffs . point; positive means violated.
double violation(const Cut& cut, std::span<const double> point);

/// Componentwise c1 <= c2 + 1e-9 for standard-space unit-rhs cuts. Every
/// nonnegative point satisfying c1 then satisfies c2.
bool dominates(const Cut& c1, const Cut& c2);

/// Drops cuts dominated by another pool member. Pools above max_pool are
/// returned unfiltered (the quadratic pass is capped).
std::vector<Cut> filter_dominated(std::vector<Cut> cuts, std::size_t max_pool = 10000);

}  // namespace closure

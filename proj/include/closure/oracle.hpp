#pragma once

#include <optional>
#include <string>
#include <vector>

#include "closure/cut.hpp"
#include "closure/instance.hpp"
#include "closure/standard_form.hpp"
#include "closure/types.hpp"

namespace closure {

/// Enumeration box over the integer columns, ascending column order.
struct IntegerBox {
    std::vector<int> int_cols;
    std::vector<long long> lo;
    std::vector<long long> hi;

    /// Product of widths, saturating at 2^63-1.
    unsigned long long cell_count() const;
};

/// Bounds implied by the rows via interval propagation over x >= 0.
/// Returns nullopt when some integer column stays unbounded.
std::optional<IntegerBox> derive_box(const StandardFormMilp& sf, int passes = 10);

constexpr long long kDefaultEnumLimit = 1000000;
constexpr double kValidityMargin = 1e-6;

/// All integer assignments within the box. Refuses (OracleRefusal) when the
/// cell count exceeds the limit.
std::vector<std::vector<long long>> enumerate_integer_points(const StandardFormMilp& sf,
                                                             const IntegerBox& box,
                                                             long long limit = kDefaultEnumLimit);

struct ValidityReport {
    bool valid = true;
    std::optional<std::vector<double>> witness;  // standard-space point
    long long points_checked = 0;
    enum class Method { enumeration, fix_and_lp } method = Method::enumeration;

    std::string to_json_string() const;
};

/// Certifies lhs . x >= rhs over every integer-feasible point: integer
/// assignments are enumerated, the continuous part minimizes the lhs by LP.
/// Floating-point certification with margin 1e-6, not an exact proof.
ValidityReport verify_inequality_valid(const StandardFormMilp& sf,
                                       const std::vector<double>& lhs, double rhs,
                                       const IntegerBox& box,
                                       long long limit = kDefaultEnumLimit);

ValidityReport verify_cut_valid(const StandardFormMilp& sf, const Cut& cut,
                                const IntegerBox& box, long long limit = kDefaultEnumLimit);

/// Exact mixed-integer optimum by enumeration + LP; +inf when infeasible,
/// -inf when some fixing leaves the continuous part unbounded.
double integer_optimum(const StandardFormMilp& sf, const IntegerBox& box,
                       long long limit = kDefaultEnumLimit);

/// (z_cut - z_lp) / (z_ip - z_lp) clamped to [0,1]; 0 when there is no gap.
double gap_closed(double z_lp, double z_cut, double z_ip);

enum class Feasibility { feasible, infeasible, unknown };

std::string to_string(Feasibility f);

/// Depth-first fix-and-bound search over the integer variables with LP
/// pruning. Returns unknown at the node cap.
Feasibility feasibility_check(const MilpInstance& inst, long long node_limit = 100000);

}  // namespace closure

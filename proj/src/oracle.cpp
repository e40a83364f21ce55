#include "closure/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "closure/gmic.hpp"
#include "closure/simplex.hpp"
#include "json.hpp"

namespace closure {

unsigned long long IntegerBox::cell_count() const {
    unsigned long long count = 1;
    for (std::size_t k = 0; k < int_cols.size(); ++k) {
        if (hi[k] < lo[k]) return 0;
        unsigned long long w = static_cast<unsigned long long>(hi[k] - lo[k] + 1);
        if (count > (~0ull) / w) return ~0ull;
        count *= w;
    }
    return count;
}

std::optional<IntegerBox> derive_box(const StandardFormMilp& sf, int passes) {
    const int n = sf.cols();
    std::vector<double> ub(static_cast<std::size_t>(n), kInf);

    for (int pass = 0; pass < passes; ++pass) {
        bool changed = false;
        for (int r = 0; r < sf.rows(); ++r) {
            const auto& row = sf.A.row(r);
            // activity pieces over x >= 0: negative entries reach a*ub,
            // positive entries reach a*ub on the max side
            double neg_sum = 0.0, pos_sum = 0.0;
            int neg_inf = 0, pos_inf = 0;
            for (const auto& e : row) {
                double u = ub[static_cast<std::size_t>(e.index)];
                if (e.value < 0.0) {
                    if (std::isinf(u))
                        ++neg_inf;
                    else
                        neg_sum += e.value * u;
                } else {
                    if (std::isinf(u))
                        ++pos_inf;
                    else
                        pos_sum += e.value * u;
                }
            }
            const double b = sf.b[static_cast<std::size_t>(r)];
            for (const auto& e : row) {
                double& u = ub[static_cast<std::size_t>(e.index)];
                double cand;
                if (e.value > 0.0) {
                    // x_j <= (b - min rest)/a; min rest comes from negative entries
                    if (neg_inf > 0) continue;
                    cand = (b - neg_sum) / e.value;
                } else {
                    // a < 0: x_j <= (b - max rest)/a; max rest from positive entries
                    if (pos_inf > 0) continue;
                    cand = (b - pos_sum) / e.value;
                }
                if (cand < -1e-9) cand = 0.0;
                if (sf.integer_mask[static_cast<std::size_t>(e.index)])
                    cand = std::floor(cand + 1e-9);
                if (cand < u - 1e-12) {
                    u = cand;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }

    IntegerBox box;
    for (int j = 0; j < n; ++j) {
        if (!sf.integer_mask[static_cast<std::size_t>(j)]) continue;
        double u = ub[static_cast<std::size_t>(j)];
        if (std::isinf(u)) return std::nullopt;
        box.int_cols.push_back(j);
        box.lo.push_back(0);
        box.hi.push_back(static_cast<long long>(std::floor(u + 1e-9)));
    }
    return box;
}

std::vector<std::vector<long long>> enumerate_integer_points(const StandardFormMilp& sf,
                                                             const IntegerBox& box,
                                                             long long limit) {
    (void)sf;
    const unsigned long long count = box.cell_count();
    if (count > static_cast<unsigned long long>(limit))
        throw OracleRefusal("enumeration box has " + std::to_string(count) +
                            " cells, above the limit of " + std::to_string(limit));
    std::vector<std::vector<long long>> out;
    if (count == 0) return out;
    std::vector<long long> cur(box.lo);
    const std::size_t k = box.int_cols.size();
    while (true) {
        out.push_back(cur);
        std::size_t pos = 0;
        while (pos < k) {
            if (++cur[pos] <= box.hi[pos]) break;
            cur[pos] = box.lo[pos];
            ++pos;
        }
        if (pos == k) break;
        if (k == 0) break;
    }
    return out;
}

namespace {

struct FixedEvaluator {
    // Shared machinery for verify/optimize: fix the integer columns, handle
    // the continuous remainder by LP.
    const StandardFormMilp& sf;
    const IntegerBox& box;
    std::vector<int> cont_cols;
    StandardFormMilp reduced;  // b replaced per assignment
    double bscale = 0.0;

    FixedEvaluator(const StandardFormMilp& sf_in, const IntegerBox& box_in)
        : sf(sf_in), box(box_in) {
        std::vector<bool> is_int_col(static_cast<std::size_t>(sf.cols()), false);
        for (int j : box.int_cols) is_int_col[static_cast<std::size_t>(j)] = true;
        for (int j = 0; j < sf.cols(); ++j)
            if (!is_int_col[static_cast<std::size_t>(j)]) cont_cols.push_back(j);
        if (!cont_cols.empty()) {
            std::vector<SparseVec> rows(static_cast<std::size_t>(sf.rows()));
            for (std::size_t cj = 0; cj < cont_cols.size(); ++cj)
                for (const auto& e : sf.A.col(cont_cols[cj]))
                    rows[static_cast<std::size_t>(e.index)].push_back(
                        {static_cast<int>(cj), e.value});
            reduced.A = SparseMatrix(sf.rows(), static_cast<int>(cont_cols.size()),
                                     std::move(rows));
            reduced.b.assign(static_cast<std::size_t>(sf.rows()), 0.0);
            reduced.c.assign(cont_cols.size(), 0.0);
            reduced.integer_mask.assign(cont_cols.size(), false);
        }
        for (double v : sf.b) bscale = std::max(bscale, std::abs(v));
    }

    std::vector<double> residual(const std::vector<long long>& z) const {
        std::vector<double> r(sf.b);
        for (std::size_t k = 0; k < box.int_cols.size(); ++k) {
            if (z[k] == 0) continue;
            for (const auto& e : sf.A.col(box.int_cols[k]))
                r[static_cast<std::size_t>(e.index)] -= e.value * static_cast<double>(z[k]);
        }
        return r;
    }

    // Minimizes 'objective' (over all sf columns) subject to the fixing.
    // Returns nullopt when the fixing is infeasible; -inf objective when the
    // continuous part is unbounded below.
    struct Outcome {
        double value;
        std::vector<double> point;  // full standard-space point
    };
    std::optional<Outcome> minimize(const std::vector<long long>& z,
                                    const std::vector<double>& objective) {
        std::vector<double> r = residual(z);
        double fixed_part = 0.0;
        for (std::size_t k = 0; k < box.int_cols.size(); ++k)
            fixed_part += objective[static_cast<std::size_t>(box.int_cols[k])] *
                          static_cast<double>(z[k]);

        std::vector<double> point(static_cast<std::size_t>(sf.cols()), 0.0);
        for (std::size_t k = 0; k < box.int_cols.size(); ++k)
            point[static_cast<std::size_t>(box.int_cols[k])] = static_cast<double>(z[k]);

        if (cont_cols.empty()) {
            for (double v : r)
                if (std::abs(v) > 1e-7 * (1.0 + bscale)) return std::nullopt;
            return Outcome{fixed_part, std::move(point)};
        }

        reduced.b = std::move(r);
        for (std::size_t cj = 0; cj < cont_cols.size(); ++cj)
            reduced.c[cj] = objective[static_cast<std::size_t>(cont_cols[cj])];
        LpResult res = solve_lp(reduced);
        if (res.status == LpStatus::infeasible) return std::nullopt;
        if (res.status == LpStatus::unbounded) {
            // grab any feasible completion for the witness
            LpResult feas = solve_lp(reduced, std::vector<double>(cont_cols.size(), 0.0));
            if (feas.status == LpStatus::optimal)
                for (std::size_t cj = 0; cj < cont_cols.size(); ++cj)
                    point[static_cast<std::size_t>(cont_cols[cj])] = feas.x[cj];
            return Outcome{-kInf, std::move(point)};
        }
        if (res.status != LpStatus::optimal)
            throw NumericalError("continuous completion hit the iteration limit");
        for (std::size_t cj = 0; cj < cont_cols.size(); ++cj)
            point[static_cast<std::size_t>(cont_cols[cj])] = res.x[cj];
        return Outcome{fixed_part + res.obj, std::move(point)};
    }
};

}  // namespace

ValidityReport verify_inequality_valid(const StandardFormMilp& sf, const std::vector<double>& lhs,
                                       double rhs, const IntegerBox& box, long long limit) {
    if (static_cast<int>(lhs.size()) != sf.cols())
        throw ContractViolation("inequality length does not match column count");
    auto points = enumerate_integer_points(sf, box, limit);
    FixedEvaluator eval(sf, box);

    ValidityReport report;
    report.method = eval.cont_cols.empty() ? ValidityReport::Method::enumeration
                                           : ValidityReport::Method::fix_and_lp;
    for (const auto& z : points) {
        ++report.points_checked;
        auto outcome = eval.minimize(z, lhs);
        if (!outcome) continue;
        if (outcome->value < rhs - kValidityMargin) {
            report.valid = false;
            report.witness = std::move(outcome->point);
            return report;
        }
    }
    return report;
}

ValidityReport verify_cut_valid(const StandardFormMilp& sf, const Cut& cut, const IntegerBox& box,
                                long long limit) {
    if (cut.space != CutSpace::standard)
        throw ContractViolation("verify_cut_valid expects a standard-space cut");
    return verify_inequality_valid(sf, densify(cut.coeffs, sf.cols()), cut.rhs, box, limit);
}

double integer_optimum(const StandardFormMilp& sf, const IntegerBox& box, long long limit) {
    auto points = enumerate_integer_points(sf, box, limit);
    FixedEvaluator eval(sf, box);
    double best = kInf;
    for (const auto& z : points) {
        auto outcome = eval.minimize(z, sf.c);
        if (!outcome) continue;
        if (outcome->value == -kInf) return -kInf;
        best = std::min(best, outcome->value);
    }
    return best;
}

double gap_closed(double z_lp, double z_cut, double z_ip) {
    if (!std::isfinite(z_lp) || !std::isfinite(z_cut) || !std::isfinite(z_ip))
        throw ContractViolation("gap_closed needs finite bounds");
    if (z_cut < z_lp - 1e-9 || z_cut > z_ip + 1e-9)
        throw ContractViolation("bounds out of order: lp <= cut <= ip expected");
    z_cut = std::clamp(z_cut, z_lp, z_ip);
    if (z_ip - z_lp <= 1e-12) return 0.0;
    return std::clamp((z_cut - z_lp) / (z_ip - z_lp), 0.0, 1.0);
}

std::string to_string(Feasibility f) {
    switch (f) {
        case Feasibility::feasible: return "feasible";
        case Feasibility::infeasible: return "infeasible";
        case Feasibility::unknown: return "unknown";
    }
    return "?";
}

namespace {

Feasibility search_nodes(MilpInstance& inst, long long& nodes_left) {
    if (nodes_left-- <= 0) return Feasibility::unknown;

    StandardFormMilp sf;
    VariableMap map;
    try {
        std::tie(sf, map) = to_standard_form(inst);
    } catch (const ConversionError&) {
        return Feasibility::infeasible;  // bound crossover from branching
    }
    LpResult res = solve_lp(sf, std::vector<double>(static_cast<std::size_t>(sf.cols()), 0.0));
    if (res.status == LpStatus::infeasible) return Feasibility::infeasible;
    if (res.status != LpStatus::optimal) return Feasibility::unknown;

    std::vector<double> x = map.to_original_point(res.x);
    int branch_var = -1;
    double branch_score = 1e-6, branch_val = 0.0;
    for (std::size_t i = 0; i < inst.vars.size(); ++i) {
        if (!inst.vars[i].is_integer) continue;
        double f = fractionality(x[i]);
        if (f > branch_score) {
            branch_score = f;
            branch_var = static_cast<int>(i);
            branch_val = x[i];
        }
    }
    if (branch_var < 0) return Feasibility::feasible;

    Variable& v = inst.vars[static_cast<std::size_t>(branch_var)];
    const double old_lo = v.lower, old_up = v.upper;

    v.upper = std::floor(branch_val);
    Feasibility down = search_nodes(inst, nodes_left);
    v.upper = old_up;
    if (down == Feasibility::feasible) return down;

    v.lower = std::ceil(branch_val);
    Feasibility upward = search_nodes(inst, nodes_left);
    v.lower = old_lo;
    if (upward == Feasibility::feasible) return upward;

    if (down == Feasibility::unknown || upward == Feasibility::unknown)
        return Feasibility::unknown;
    return Feasibility::infeasible;
}

}  // namespace

Feasibility feasibility_check(const MilpInstance& inst, long long node_limit) {
    MilpInstance work = inst;
    long long nodes_left = node_limit;
    return search_nodes(work, nodes_left);
}

std::string ValidityReport::to_json_string() const {
    nlohmann::ordered_json j;
    j["valid"] = valid;
    if (witness) {
        j["witness"] = *witness;
    } else {
        j["witness"] = nullptr;
    }
    j["points_checked"] = points_checked;
    j["method"] = method == Method::enumeration ? "enumeration" : "fix-and-lp";
    return j.dump();
}

}  // namespace closure

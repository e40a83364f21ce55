#include "closure/gmic.hpp"

#include <cmath>
#include <cstdio>

namespace closure {

double fractional_part(double u) {
    double f = u - std::floor(u);
    if (f >= 1.0) f = 0.0;  // u integral to machine precision
    return f;
}

double fractionality(double u) {
    double f = fractional_part(u);
    return std::min(f, 1.0 - f);
}

std::optional<Cut> gmic_from_row(std::span<const double> alpha, double beta,
                                 const std::vector<bool>& integer_mask) {
    if (alpha.size() != integer_mask.size())
        throw ContractViolation("alpha length does not match integrality mask");
    if (!std::isfinite(beta)) throw NumericalError("non-finite aggregated rhs");

    const double fb = fractional_part(beta);
    if (fb < kIntegralityGate || fb > 1.0 - kIntegralityGate) return std::nullopt;

    Cut cut;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        const double a = alpha[j];
        if (!std::isfinite(a)) throw NumericalError("non-finite aggregated coefficient");
        double coeff;
        if (integer_mask[j]) {
            const double fa = fractional_part(a);
            coeff = fa <= fb ? fa / fb : (1.0 - fa) / (1.0 - fb);
        } else {
            coeff = a >= 0.0 ? a / fb : -a / (1.0 - fb);
        }
        if (coeff > kCoeffDropTol) cut.coeffs.push_back({static_cast<int>(j), coeff});
    }
    cut.rhs = 1.0;
    cut.space = CutSpace::standard;
    return cut;
}

std::optional<Cut> gmic_from_multiplier(const SparseVec& lambda, const StandardFormMilp& sf) {
    std::vector<double> alpha(static_cast<std::size_t>(sf.cols()), 0.0);
    double beta = 0.0;
    for (const auto& e : lambda) {
        if (e.index < 0 || e.index >= sf.rows())
            throw ContractViolation("multiplier row index out of range");
        beta += e.value * sf.b[static_cast<std::size_t>(e.index)];
        for (const auto& a : sf.A.row(e.index))
            alpha[static_cast<std::size_t>(a.index)] += e.value * a.value;
    }
    return gmic_from_row(alpha, beta, sf.integer_mask);
}

double violation(const Cut& cut, std::span<const double> point) {
    double lhs = 0.0;
    for (const auto& e : cut.coeffs) {
        if (e.index < 0 || static_cast<std::size_t>(e.index) >= point.size())
            throw ContractViolation("cut and point dimensions disagree");
        lhs += e.value * point[static_cast<std::size_t>(e.index)];
    }
    return cut.rhs - lhs;
}

bool dominates(const Cut& c1, const Cut& c2) {
    if (c1.space != CutSpace::standard || c2.space != CutSpace::standard)
        throw ContractViolation("dominance is defined on standard-space cuts");
    constexpr double tol = 1e-9;
    std::size_t i = 0, j = 0;
    while (i < c1.coeffs.size() || j < c2.coeffs.size()) {
        int i1 = i < c1.coeffs.size() ? c1.coeffs[i].index : INT32_MAX;
        int i2 = j < c2.coeffs.size() ? c2.coeffs[j].index : INT32_MAX;
        double v1 = 0.0, v2 = 0.0;
        if (i1 <= i2) v1 = c1.coeffs[i++].value;
        if (i2 <= i1) v2 = c2.coeffs[j++].value;
        if (v1 > v2 + tol) return false;
    }
    return true;
}

std::vector<Cut> filter_dominated(std::vector<Cut> cuts, std::size_t max_pool) {
    if (cuts.size() > max_pool) return cuts;
    std::vector<bool> drop(cuts.size(), false);
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        for (std::size_t j = 0; j < cuts.size() && !drop[i]; ++j) {
            if (i == j || drop[j]) continue;
            if (!dominates(cuts[j], cuts[i])) continue;
            // mutual domination means equal cuts: keep the earlier one
            if (j < i || !dominates(cuts[i], cuts[j])) drop[i] = true;
        }
    }
    std::vector<Cut> kept;
    for (std::size_t i = 0; i < cuts.size(); ++i)
        if (!drop[i]) kept.push_back(std::move(cuts[i]));
    return kept;
}

uint64_t cut_dedup_hash(const Cut& cut) {
    HashStream h;
    char buf[40];
    for (const auto& e : cut.coeffs) {
        h.add(e.index);
        std::snprintf(buf, sizeof buf, "%.12g", e.value);
        h.add(std::string(buf));
    }
    std::snprintf(buf, sizeof buf, "%.12g", cut.rhs);
    h.add(std::string(buf));
    h.add(static_cast<int>(cut.space));
    return h.value();
}

}  // namespace closure

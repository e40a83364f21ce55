#include "closure/standard_form.hpp"

#include <cmath>

namespace closure {

namespace {

constexpr double kDropTol = 1e-11;

struct Builder {
    std::vector<SparseVec> rows;
    std::vector<double> b;
    std::vector<double> c;
    std::vector<bool> mask;
    VariableMap map;

    int add_col(VariableMap::Provenance kind, int ref, double obj, bool integer,
                std::optional<AffineExpr> expr) {
        int j = static_cast<int>(c.size());
        c.push_back(obj);
        mask.push_back(integer);
        map.std_vars.push_back({kind, ref, std::move(expr)});
        return j;
    }
};

}  // namespace

std::pair<StandardFormMilp, VariableMap> to_standard_form(const MilpInstance& inst,
                                                          const StandardFormOptions& opts) {
    inst.validate();
    Builder bld;
    bld.map.orig_vars.resize(inst.vars.size());
    bld.map.sense_flip = inst.objective_sense == ObjSense::maximize ? -1.0 : 1.0;

    const int n_orig = static_cast<int>(inst.vars.size());
    int free_integer_splits = 0;

    // Integer bounds are rounded inward up front so shifts and negations move
    // integer columns by integral offsets.
    std::vector<double> lo(inst.vars.size()), up(inst.vars.size());
    for (int i = 0; i < n_orig; ++i) {
        const Variable& v = inst.vars[static_cast<std::size_t>(i)];
        lo[static_cast<std::size_t>(i)] =
            (v.is_integer && std::isfinite(v.lower)) ? std::ceil(v.lower - 1e-9) : v.lower;
        up[static_cast<std::size_t>(i)] =
            (v.is_integer && std::isfinite(v.upper)) ? std::floor(v.upper + 1e-9) : v.upper;
    }

    for (int i = 0; i < n_orig; ++i) {
        const Variable& v = inst.vars[static_cast<std::size_t>(i)];
        VariableMap::OrigVar& ov = bld.map.orig_vars[static_cast<std::size_t>(i)];
        const double obj = bld.map.sense_flip * v.obj_coeff;
        if (std::isfinite(lo[static_cast<std::size_t>(i)])) {
            // y = x - lo
            ov.shift = lo[static_cast<std::size_t>(i)];
            AffineExpr expr{-ov.shift, {{i, 1.0}}};
            ov.std_index = bld.add_col(VariableMap::Provenance::original, i, obj, v.is_integer,
                                       std::move(expr));
            bld.map.objective_constant += v.obj_coeff * ov.shift;
        } else if (std::isfinite(up[static_cast<std::size_t>(i)])) {
            // y = up - x
            ov.negated = true;
            ov.shift = up[static_cast<std::size_t>(i)];
            AffineExpr expr{ov.shift, {{i, -1.0}}};
            ov.std_index = bld.add_col(VariableMap::Provenance::original, i, -obj, v.is_integer,
                                       std::move(expr));
            bld.map.objective_constant += v.obj_coeff * ov.shift;
        } else {
            // free: x = y+ - y-
            if (v.is_integer && ++free_integer_splits > opts.max_free_integer_splits)
                throw ConversionError("too many free integer variables to split (cap " +
                                      std::to_string(opts.max_free_integer_splits) + ")");
            int p = bld.add_col(VariableMap::Provenance::split_pos, i, obj, v.is_integer,
                                std::nullopt);
            int q = bld.add_col(VariableMap::Provenance::split_neg, i, -obj, v.is_integer,
                                std::nullopt);
            ov.split = {p, q};
        }
    }

    auto std_entries_for = [&](const SparseVec& coeffs, double rhs) {
        SparseVec row;
        double adj = rhs;
        for (const auto& e : coeffs) {
            const VariableMap::OrigVar& ov = bld.map.orig_vars[static_cast<std::size_t>(e.index)];
            if (ov.split) {
                row.push_back({ov.split->first, e.value});
                row.push_back({ov.split->second, -e.value});
            } else if (ov.negated) {
                row.push_back({ov.std_index, -e.value});
                adj -= e.value * ov.shift;
            } else {
                row.push_back({ov.std_index, e.value});
                adj -= e.value * ov.shift;
            }
        }
        return std::make_pair(row, adj);
    };

    for (int r = 0; r < static_cast<int>(inst.constraints.size()); ++r) {
        const Constraint& con = inst.constraints[static_cast<std::size_t>(r)];
        auto [row, rhs] = std_entries_for(con.coeffs, con.rhs);
        if (con.sense == Sense::le) {
            AffineExpr expr{con.rhs, {}};
            for (const auto& e : con.coeffs) expr.coeffs.push_back({e.index, -e.value});
            row.push_back({bld.add_col(VariableMap::Provenance::slack, r, 0.0, false,
                                       std::move(expr)),
                           1.0});
        } else if (con.sense == Sense::ge) {
            AffineExpr expr{-con.rhs, {}};
            for (const auto& e : con.coeffs) expr.coeffs.push_back({e.index, e.value});
            row.push_back({bld.add_col(VariableMap::Provenance::surplus, r, 0.0, false,
                                       std::move(expr)),
                           -1.0});
        } else if (row.empty()) {
            throw ConversionError("equality row '" + con.name + "' has empty support");
        }
        bld.rows.push_back(std::move(row));
        bld.b.push_back(rhs);
        bld.map.std_rows.push_back({VariableMap::RowKind::constraint, r});
    }

    // Finite upper bounds become explicit rows y + t = up - lo so every
    // standard variable's only bound is >= 0.
    for (int i = 0; i < n_orig; ++i) {
        const VariableMap::OrigVar& ov = bld.map.orig_vars[static_cast<std::size_t>(i)];
        if (ov.split || ov.negated || !std::isfinite(up[static_cast<std::size_t>(i)])) continue;
        double width = up[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)];
        AffineExpr expr{up[static_cast<std::size_t>(i)], {{i, -1.0}}};
        int t = bld.add_col(VariableMap::Provenance::bound_slack, i, 0.0, false, std::move(expr));
        bld.rows.push_back({{ov.std_index, 1.0}, {t, 1.0}});
        bld.b.push_back(width);
        bld.map.std_rows.push_back({VariableMap::RowKind::bound, i});
    }

    if (bld.rows.empty()) throw ConversionError("standard form requires at least one row");
    if (bld.c.empty()) throw ConversionError("standard form requires at least one column");

    const int n_rows = static_cast<int>(bld.rows.size());
    const int n_cols = static_cast<int>(bld.c.size());
    StandardFormMilp sf;
    sf.b = std::move(bld.b);
    sf.c = std::move(bld.c);
    sf.integer_mask = std::move(bld.mask);
    sf.A = SparseMatrix(n_rows, n_cols, std::move(bld.rows));
    for (double v : sf.b)
        if (!std::isfinite(v)) throw ConversionError("non-finite rhs after conversion");
    return {std::move(sf), std::move(bld.map)};
}

std::vector<double> VariableMap::to_standard_point(const std::vector<double>& x,
                                                   const StandardFormMilp& sf) const {
    std::vector<double> y(static_cast<std::size_t>(sf.cols()), 0.0);
    for (std::size_t i = 0; i < orig_vars.size(); ++i) {
        const OrigVar& ov = orig_vars[i];
        double xi = x[i];
        if (ov.split) {
            y[static_cast<std::size_t>(ov.split->first)] = std::max(xi, 0.0);
            y[static_cast<std::size_t>(ov.split->second)] = std::max(-xi, 0.0);
        } else if (ov.negated) {
            y[static_cast<std::size_t>(ov.std_index)] = ov.shift - xi;
        } else {
            y[static_cast<std::size_t>(ov.std_index)] = xi - ov.shift;
        }
    }
    // each row determines its own auxiliary column
    for (int r = 0; r < sf.rows(); ++r) {
        int aux = -1;
        double sigma = 0.0, act = 0.0;
        for (const auto& e : sf.A.row(r)) {
            const Provenance k = std_vars[static_cast<std::size_t>(e.index)].kind;
            if (k == Provenance::slack || k == Provenance::surplus ||
                k == Provenance::bound_slack) {
                aux = e.index;
                sigma = e.value;
            } else {
                act += e.value * y[static_cast<std::size_t>(e.index)];
            }
        }
        if (aux >= 0) y[static_cast<std::size_t>(aux)] = (sf.b[static_cast<std::size_t>(r)] - act) / sigma;
    }
    return y;
}

std::vector<double> VariableMap::to_original_point(std::span<const double> y) const {
    std::vector<double> x(orig_vars.size(), 0.0);
    for (std::size_t i = 0; i < orig_vars.size(); ++i) {
        const OrigVar& ov = orig_vars[i];
        if (ov.split) {
            x[i] = y[static_cast<std::size_t>(ov.split->first)] -
                   y[static_cast<std::size_t>(ov.split->second)];
        } else if (ov.negated) {
            x[i] = ov.shift - y[static_cast<std::size_t>(ov.std_index)];
        } else {
            x[i] = y[static_cast<std::size_t>(ov.std_index)] + ov.shift;
        }
    }
    return x;
}

Cut map_cut_to_original(const Cut& cut, const VariableMap& map, const StandardFormMilp& sf) {
    if (cut.space != CutSpace::standard)
        throw MapError("map_cut_to_original expects a standard-space cut");
    std::vector<double> psi(map.orig_vars.size(), 0.0);
    double constant = 0.0;
    for (const auto& e : cut.coeffs) {
        if (e.index < 0 || e.index >= static_cast<int>(map.std_vars.size()))
            throw MapError("cut references standard variable " + std::to_string(e.index) +
                           " absent from the map");
        const auto& sv = map.std_vars[static_cast<std::size_t>(e.index)];
        if (!sv.expr)
            throw MapError("cut touches a split half of a free variable; no affine preimage");
        constant += e.value * sv.expr->constant;
        for (const auto& t : sv.expr->coeffs)
            psi[static_cast<std::size_t>(t.index)] += e.value * t.value;
    }
    Cut out;
    out.coeffs = sparsify(psi, kDropTol);
    out.rhs = cut.rhs - constant;
    out.space = CutSpace::original;
    out.origin = cut.origin;
    (void)sf;
    return out;
}

std::pair<std::vector<double>, double> inequality_to_standard_space(
    const SparseVec& coeffs, double rhs, const VariableMap& map, const StandardFormMilp& sf) {
    std::vector<double> kappa(static_cast<std::size_t>(sf.cols()), 0.0);
    double constant = 0.0;
    for (const auto& e : coeffs) {
        const VariableMap::OrigVar& ov = map.orig_vars[static_cast<std::size_t>(e.index)];
        if (ov.split) {
            kappa[static_cast<std::size_t>(ov.split->first)] += e.value;
            kappa[static_cast<std::size_t>(ov.split->second)] -= e.value;
        } else if (ov.negated) {
            kappa[static_cast<std::size_t>(ov.std_index)] -= e.value;
            constant += e.value * ov.shift;
        } else {
            kappa[static_cast<std::size_t>(ov.std_index)] += e.value;
            constant += e.value * ov.shift;
        }
    }
    return {std::move(kappa), rhs - constant};
}

}  // namespace closure

#include "closure/collect.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "closure/gmic.hpp"
#include "json.hpp"

namespace closure {

void CollectConfig::validate() const {
    if (max_rounds < 1) throw ContractViolation("max_rounds must be >= 1");
    if (!(frac_threshold > 0.0 && frac_threshold < 0.5))
        throw ContractViolation("frac_threshold must lie in (0, 0.5)");
    if (max_rows_per_basis < 1) throw ContractViolation("max_rows_per_basis must be >= 1");
}

std::string to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::stalled: return "stalled";
        case TerminationReason::basis_repeat: return "basis_repeat";
        case TerminationReason::round_limit: return "round_limit";
        case TerminationReason::integral_lp: return "integral_lp";
    }
    return "?";
}

TerminationReason termination_reason_from_string(const std::string& s) {
    if (s == "stalled") return TerminationReason::stalled;
    if (s == "basis_repeat") return TerminationReason::basis_repeat;
    if (s == "round_limit") return TerminationReason::round_limit;
    if (s == "integral_lp") return TerminationReason::integral_lp;
    throw Error("unknown termination reason '" + s + "'");
}

std::vector<TableauRow> select_rows(std::vector<TableauRow> rows,
                                    const std::vector<bool>& integer_mask,
                                    const CollectConfig& cfg) {
    const int n = static_cast<int>(integer_mask.size());
    std::vector<TableauRow> eligible;
    for (auto& row : rows) {
        if (row.basic_var < 0 || row.basic_var >= n) continue;  // artificial basic
        if (!integer_mask[static_cast<std::size_t>(row.basic_var)]) continue;
        if (fractionality(row.beta) > cfg.frac_threshold) eligible.push_back(std::move(row));
    }
    std::stable_sort(eligible.begin(), eligible.end(),
                     [](const TableauRow& a, const TableauRow& b) {
                         double fa = fractionality(a.beta), fb = fractionality(b.beta);
                         if (fa != fb) return fa > fb;
                         return a.row_index < b.row_index;
                     });
    if (static_cast<int>(eligible.size()) > cfg.max_rows_per_basis)
        eligible.resize(static_cast<std::size_t>(cfg.max_rows_per_basis));
    return eligible;
}

std::vector<double> lagrangian_objective(const std::vector<double>& c,
                                         const std::vector<std::pair<Cut, double>>& active) {
    std::vector<double> out = c;
    for (const auto& [cut, u] : active) {
        if (u < -1e-9) throw ContractViolation("negative cut dual in Lagrangian objective");
        if (cut.space != CutSpace::standard)
            throw ContractViolation("Lagrangian penalties need standard-space cuts");
        for (const auto& e : cut.coeffs) {
            if (e.index < 0 || e.index >= static_cast<int>(out.size()))
                throw ContractViolation("cut coefficient outside the objective range");
            out[static_cast<std::size_t>(e.index)] -= u * e.value;
        }
    }
    return out;
}

StandardFormMilp lp_with_cuts(const StandardFormMilp& sf, const std::vector<Cut>& cuts) {
    const int m = sf.rows();
    const int n = sf.cols();
    const int p = static_cast<int>(cuts.size());

    std::vector<SparseVec> rows(static_cast<std::size_t>(m + p));
    for (int i = 0; i < m; ++i) rows[static_cast<std::size_t>(i)] = sf.A.row(i);

    StandardFormMilp out;
    out.b = sf.b;
    out.c = sf.c;
    out.integer_mask = sf.integer_mask;
    for (int l = 0; l < p; ++l) {
        const Cut& cut = cuts[static_cast<std::size_t>(l)];
        if (cut.space != CutSpace::standard)
            throw ContractViolation("lp_with_cuts needs standard-space cuts");
        for (const auto& e : cut.coeffs)
            if (e.index < 0 || e.index >= n)
                throw ContractViolation("cut coefficient outside the column range");
        SparseVec row = cut.coeffs;
        row.push_back({n + l, -1.0});  // surplus: coeffs^T x - s = rhs, s >= 0
        rows[static_cast<std::size_t>(m + l)] = std::move(row);
        out.b.push_back(cut.rhs);
        out.c.push_back(0.0);
        out.integer_mask.push_back(false);
    }
    out.A = SparseMatrix(m + p, n + p, std::move(rows));
    return out;
}

namespace {

struct Eq5Solution {
    double obj;
    std::vector<double> cut_duals;
};

Eq5Solution solve_lp_with_cuts(const StandardFormMilp& sf, const std::vector<PoolCut>& pool,
                               const char* step) {
    std::vector<Cut> cuts;
    cuts.reserve(pool.size());
    for (const auto& pc : pool) cuts.push_back(pc.cut);
    LpResult res = solve_lp(lp_with_cuts(sf, cuts));
    if (res.status != LpStatus::optimal)
        throw CollectError(std::string("LP with cuts ") + to_string(res.status) + " at " + step);
    Eq5Solution sol;
    sol.obj = res.obj;
    sol.cut_duals.reserve(pool.size());
    for (std::size_t l = 0; l < pool.size(); ++l)
        sol.cut_duals.push_back(res.duals[static_cast<std::size_t>(sf.rows()) + l]);
    return sol;
}

}  // namespace

CutPool collect_cuts(const StandardFormMilp& sf, const CollectConfig& cfg) {
    cfg.validate();
    CutPool pool;
    std::unordered_set<uint64_t> cut_hashes;
    std::unordered_set<uint64_t> basis_hashes;

    auto harvest = [&](const std::vector<TableauRow>& rows, uint64_t basis_hash) {
        int added = 0;
        for (const auto& row : rows) {
            auto cut = gmic_from_row(row.alpha, row.beta, sf.integer_mask);
            if (!cut || cut->coeffs.empty()) continue;
            cut->origin = CutOrigin{"", basis_hash, row.row_index};
            if (!cut_hashes.insert(cut_dedup_hash(*cut)).second) continue;
            pool.cuts.push_back({std::move(*cut), row.lambda, basis_hash, row.row_index, 0.0});
            ++added;
        }
        return added;
    };

    LpResult root = solve_lp(sf);
    if (root.status != LpStatus::optimal)
        throw CollectError(std::string("LP relaxation ") + to_string(root.status));
    pool.lp_relaxation_obj = root.obj;

    const uint64_t root_hash = root.basis->hash();
    basis_hashes.insert(root_hash);
    pool.visited_bases.push_back(root_hash);

    auto seed_rows = select_rows(tableau_rows(sf, *root.basis), sf.integer_mask, cfg);
    if (seed_rows.empty()) {
        pool.termination_reason = TerminationReason::integral_lp;
        pool.final_obj = root.obj;
        return pool;
    }
    harvest(seed_rows, root_hash);

    Basis plain_basis = *root.basis;  // warm start for the Lagrangian re-solves
    pool.termination_reason = TerminationReason::round_limit;
    std::optional<double> prev_obj;

    for (int round = 0; round < cfg.max_rounds; ++round) {
        RoundRecord rec;
        Eq5Solution eq5 = solve_lp_with_cuts(sf, pool.cuts, "round solve");
        rec.lp_with_cuts_obj = eq5.obj;
        for (std::size_t l = 0; l < pool.cuts.size(); ++l)
            pool.cuts[l].dual = eq5.cut_duals[l];

        if (prev_obj && std::abs(eq5.obj - *prev_obj) <= cfg.obj_stall_tol * (1.0 + std::abs(eq5.obj))) {
            pool.rounds.push_back(rec);
            pool.termination_reason = TerminationReason::stalled;
            break;
        }
        prev_obj = eq5.obj;

        // discard cuts whose dual came back zero
        std::vector<PoolCut> kept;
        kept.reserve(pool.cuts.size());
        for (auto& pc : pool.cuts) {
            if (pc.dual >= cfg.dual_zero_tol)
                kept.push_back(std::move(pc));
            else
                ++rec.dropped;
        }
        pool.cuts = std::move(kept);
        if (cfg.audit_zero_dual_drops && rec.dropped > 0)
            rec.post_drop_obj = solve_lp_with_cuts(sf, pool.cuts, "drop audit").obj;

        // Lagrangian objective from the survivors, re-solve the plain LP
        std::vector<std::pair<Cut, double>> active;
        active.reserve(pool.cuts.size());
        for (const auto& pc : pool.cuts) active.emplace_back(pc.cut, pc.dual);
        std::vector<double> penalized = lagrangian_objective(sf.c, active);

        LpResult lag = resolve_with_objective(sf, plain_basis, penalized);
        if (lag.status != LpStatus::optimal)
            throw CollectError(std::string("Lagrangian LP ") + to_string(lag.status));
        plain_basis = *lag.basis;
        const uint64_t bh = lag.basis->hash();
        rec.basis_hash = bh;

        if (!basis_hashes.insert(bh).second) {
            pool.rounds.push_back(rec);
            pool.termination_reason = TerminationReason::basis_repeat;
            break;
        }
        pool.visited_bases.push_back(bh);

        rec.harvested = harvest(select_rows(tableau_rows(sf, *lag.basis), sf.integer_mask, cfg), bh);
        pool.rounds.push_back(rec);
    }

    // final positive-dual selection
    Eq5Solution fin = solve_lp_with_cuts(sf, pool.cuts, "final selection");
    pool.final_obj = fin.obj;
    std::vector<PoolCut> survivors;
    for (std::size_t l = 0; l < pool.cuts.size(); ++l) {
        pool.cuts[l].dual = fin.cut_duals[l];
        if (pool.cuts[l].dual >= cfg.dual_zero_tol) survivors.push_back(std::move(pool.cuts[l]));
    }
    pool.cuts = std::move(survivors);
    return pool;
}

double final_bound(const StandardFormMilp& sf, const std::vector<Cut>& cuts) {
    LpResult res = solve_lp(lp_with_cuts(sf, cuts));
    if (res.status != LpStatus::optimal)
        throw CollectError(std::string("LP with cuts ") + to_string(res.status));
    return res.obj;
}

double final_bound(const StandardFormMilp& sf, const CutPool& pool) {
    return final_bound(sf, pool.cut_list());
}

std::vector<Cut> CutPool::cut_list() const {
    std::vector<Cut> out;
    out.reserve(cuts.size());
    for (const auto& pc : cuts) out.push_back(pc.cut);
    return out;
}

namespace {

std::string hex64(uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string CutPool::to_json_string() const {
    nlohmann::ordered_json j;
    j["v"] = 1;
    j["termination_reason"] = to_string(termination_reason);
    j["lp_relaxation_obj"] = lp_relaxation_obj;
    j["final_obj"] = final_obj;
    j["visited_bases"] = nlohmann::ordered_json::array();
    for (uint64_t h : visited_bases) j["visited_bases"].push_back(hex64(h));
    j["rounds"] = nlohmann::ordered_json::array();
    for (const auto& r : rounds) {
        nlohmann::ordered_json jr;
        jr["lp_with_cuts_obj"] = r.lp_with_cuts_obj;
        jr["dropped"] = r.dropped;
        jr["harvested"] = r.harvested;
        jr["basis_hash"] = hex64(r.basis_hash);
        if (r.post_drop_obj)
            jr["post_drop_obj"] = *r.post_drop_obj;
        else
            jr["post_drop_obj"] = nullptr;
        j["rounds"].push_back(std::move(jr));
    }
    j["cuts"] = nlohmann::ordered_json::array();
    for (const auto& pc : cuts) {
        nlohmann::ordered_json jc = nlohmann::ordered_json::parse(cut_to_json_string(pc.cut));
        jc["lambda"] = nlohmann::ordered_json::array();
        for (const auto& e : pc.lambda) jc["lambda"].push_back({e.index, e.value});
        jc["basis_hash"] = hex64(pc.basis_hash);
        jc["row_index"] = pc.row_index;
        jc["dual"] = pc.dual;
        j["cuts"].push_back(std::move(jc));
    }
    return j.dump(2) + "\n";
}

}  // namespace closure

#include "closure/perturb.hpp"

#include <cmath>
#include <cstdio>

#include "closure/oracle.hpp"

namespace closure {

void PerturbConfig::validate() const {
    if (!(rhs_lo <= rhs_hi) || !(obj_lo <= obj_hi))
        throw ContractViolation("perturbation ranges must be well ordered");
    if (feasibility_probe_count < 1) throw ContractViolation("probe count must be >= 1");
    if (n_train < 1 || n_test < 0) throw ContractViolation("bad family sizes");
}

std::string to_string(PerturbRule r) {
    switch (r) {
        case PerturbRule::rule1: return "rule1";
        case PerturbRule::rule2: return "rule2";
        case PerturbRule::rule3: return "rule3";
        case PerturbRule::rule4: return "rule4";
        case PerturbRule::none: return "none";
    }
    return "?";
}

PerturbRule classify_constraint(const Constraint& con, const std::vector<Variable>& vars) {
    const std::size_t support = con.coeffs.size();
    if (support == 0) return PerturbRule::none;
    std::size_t discrete = 0;
    for (const auto& e : con.coeffs)
        if (vars[static_cast<std::size_t>(e.index)].is_integer) ++discrete;

    if (support == 2 && discrete == 1) return PerturbRule::rule1;
    if (support > 2 && discrete < support) return PerturbRule::rule2;
    if (discrete == support) {
        if (con.sense == Sense::eq) return PerturbRule::rule4;
        if (std::abs(con.rhs - 1.0) > 1e-9) return PerturbRule::rule3;
    }
    return PerturbRule::none;
}

namespace {

std::size_t objective_support(const MilpInstance& inst) {
    std::size_t n = 0;
    for (const auto& v : inst.vars)
        if (v.obj_coeff != 0.0) ++n;
    return n;
}

}  // namespace

MilpInstance perturb_instance(const MilpInstance& inst, const PerturbConfig& cfg, uint64_t seed,
                              PerturbChannel which) {
    Rng rng(seed);
    MilpInstance out = inst;
    if (which == PerturbChannel::rhs || which == PerturbChannel::both) {
        for (auto& con : out.constraints) {
            switch (classify_constraint(con, out.vars)) {
                case PerturbRule::rule1:
                case PerturbRule::rule2:
                case PerturbRule::rule3:
                    con.rhs *= rng.uniform(cfg.rhs_lo, cfg.rhs_hi);
                    break;
                case PerturbRule::rule4:
                    con.rhs += static_cast<double>(rng.index(3)) - 1.0;
                    break;
                case PerturbRule::none:
                    break;
            }
        }
    }
    if (which == PerturbChannel::obj || which == PerturbChannel::both) {
        if (objective_support(inst) >= 2)
            for (auto& v : out.vars) v.obj_coeff *= rng.uniform(cfg.obj_lo, cfg.obj_hi);
    }
    return out;
}

Family generate_family(const MilpInstance& inst, const PerturbConfig& cfg) {
    cfg.validate();
    inst.validate();
    Family family;
    family.seed_instance = inst;

    bool any_rule = false;
    for (const auto& con : inst.constraints)
        if (classify_constraint(con, inst.vars) != PerturbRule::none) {
            any_rule = true;
            break;
        }

    family.rhs_enabled = any_rule;
    if (!any_rule) family.log.push_back("rhs disabled: no constraint matches any rule");

    if (family.rhs_enabled) {
        for (int t = 0; t < cfg.feasibility_probe_count; ++t) {
            MilpInstance probe =
                perturb_instance(inst, cfg, derive_seed(cfg.seed, "probe", static_cast<uint64_t>(t)),
                                 PerturbChannel::rhs);
            Feasibility feas = feasibility_check(probe, cfg.probe_node_limit);
            family.log.push_back("probe " + std::to_string(t) + ": " + to_string(feas));
            if (feas != Feasibility::feasible) {
                family.rhs_enabled = false;
                family.log.push_back("rhs disabled: probe " + std::to_string(t) + " was " +
                                     to_string(feas));
                break;
            }
        }
    }

    family.obj_enabled = objective_support(inst) >= 2;
    if (!family.obj_enabled)
        family.log.push_back("objective disabled: support on at most one variable");

    if (!family.rhs_enabled && !family.obj_enabled) throw FamilyError("no changes");

    const PerturbChannel which = family.rhs_enabled && family.obj_enabled ? PerturbChannel::both
                                 : family.rhs_enabled                     ? PerturbChannel::rhs
                                                                          : PerturbChannel::obj;
    auto emit = [&](const std::string& role, int count, std::vector<MilpInstance>& bucket) {
        for (int v = 0; v < count; ++v) {
            const uint64_t sub = derive_seed(cfg.seed, role, static_cast<uint64_t>(v));
            MilpInstance var = perturb_instance(inst, cfg, sub, which);
            char suffix[32];
            std::snprintf(suffix, sizeof suffix, "_%s_%03d", role.c_str(), v);
            var.name = inst.name + suffix;
            bucket.push_back(var);
            family.provenance.push_back(
                {var.name, sub, family.rhs_enabled, family.obj_enabled});
        }
    };
    emit("train", cfg.n_train, family.train);
    emit("test", cfg.n_test, family.test);
    return family;
}

}  // namespace closure

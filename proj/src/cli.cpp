#include "closure/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "closure/collect.hpp"
#include "closure/gmic.hpp"
#include "closure/learn.hpp"
#include "closure/oracle.hpp"
#include "closure/perturb.hpp"
#include "closure/simplex.hpp"
#include "json.hpp"

namespace closure {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string hex64(uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

uint64_t default_seed() {
    if (const char* s = std::getenv("CLOSURE_FORGE_SEED"))
        return std::strtoull(s, nullptr, 0);
    return 0;
}

void write_error(std::ostream& err, const std::string& kind, const std::string& message) {
    ordered_json j;
    j["error"]["kind"] = kind;
    j["error"]["message"] = message;
    err << j.dump() << "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct UsageError : Error {
    using Error::Error;
};

// ------------------------------------------------------------- manifests

struct FamilyFiles {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

FamilyFiles read_manifest(const std::string& dir) {
    ordered_json j = ordered_json::parse(read_file(dir + "/family.json"));
    FamilyFiles files;
    for (const auto& v : j.at("variations")) {
        const std::string path = dir + "/" + v.at("file").get<std::string>();
        if (v.at("role").get<std::string>() == "train")
            files.train.push_back(path);
        else
            files.test.push_back(path);
    }
    return files;
}

// ------------------------------------------------------------- perturb

struct PerturbArgs {
    std::string in, out_dir;
    uint64_t seed = 0;
    int n_train = 50, n_test = 5, probes = 5;
};

int cmd_perturb(const PerturbArgs& a, std::ostream& out) {
    MilpInstance inst = MilpInstance::load(a.in);
    PerturbConfig cfg;
    cfg.n_train = a.n_train;
    cfg.n_test = a.n_test;
    cfg.feasibility_probe_count = a.probes;
    cfg.seed = a.seed;
    Family fam = generate_family(inst, cfg);

    fs::create_directories(a.out_dir);
    ordered_json manifest;
    manifest["v"] = 1;
    manifest["instance"] = inst.name;
    manifest["matrix_signature"] = hex64(instance_signature(inst));
    manifest["seed"] = hex64(cfg.seed);
    manifest["config"] = {{"rhs_range", {cfg.rhs_lo, cfg.rhs_hi}},
                          {"obj_range", {cfg.obj_lo, cfg.obj_hi}},
                          {"train", cfg.n_train},
                          {"test", cfg.n_test},
                          {"probes", cfg.feasibility_probe_count}};
    manifest["rhs_enabled"] = fam.rhs_enabled;
    manifest["obj_enabled"] = fam.obj_enabled;
    manifest["log"] = fam.log;
    manifest["variations"] = ordered_json::array();

    auto emit = [&](const std::vector<MilpInstance>& bucket, const std::string& role,
                    std::size_t prov_offset) {
        for (std::size_t i = 0; i < bucket.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "%s_%03zu.json", role.c_str(), i);
            bucket[i].save_json(a.out_dir + "/" + name);
            const VariationInfo& info = fam.provenance[prov_offset + i];
            ordered_json v;
            v["file"] = name;
            v["id"] = info.id;
            v["seed"] = hex64(info.seed);
            v["role"] = role;
            v["rhs"] = info.rhs_applied;
            v["obj"] = info.obj_applied;
            manifest["variations"].push_back(std::move(v));
        }
    };
    emit(fam.train, "train", 0);
    emit(fam.test, "test", fam.train.size());
    write_file(a.out_dir + "/family.json", manifest.dump(2) + "\n");

    out << "family written to " << a.out_dir << ": " << fam.train.size() << " train + "
        << fam.test.size() << " test (rhs " << (fam.rhs_enabled ? "on" : "off") << ", obj "
        << (fam.obj_enabled ? "on" : "off") << ")\n";
    return 0;
}

// ------------------------------------------------------------- collect

struct CollectArgs {
    std::string in, out;
    CollectConfig cfg;
};

int cmd_collect(const CollectArgs& a, std::ostream& out) {
    MilpInstance inst = MilpInstance::load(a.in);
    auto [sf, map] = to_standard_form(inst);
    CutPool pool = collect_cuts(sf, a.cfg);
    for (auto& pc : pool.cuts)
        if (pc.cut.origin) pc.cut.origin->instance_id = inst.name;
    if (!a.out.empty()) write_file(a.out, pool.to_json_string());
    out << "collected " << pool.cuts.size() << " cuts in " << pool.rounds.size()
        << " rounds (" << to_string(pool.termination_reason) << "); lp bound "
        << map.original_objective(pool.lp_relaxation_obj) << ", cut bound "
        << map.original_objective(pool.final_obj) << "\n";
    return 0;
}

// ------------------------------------------------------------- train

struct TrainArgs {
    std::string family_dir, out;
    CollectConfig cfg;
    int jobs = 1;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
    FamilyFiles files = read_manifest(a.family_dir);
    std::vector<MilpInstance> train;
    train.reserve(files.train.size());
    for (const auto& path : files.train) train.push_back(MilpInstance::load_json(path));
    MultiplierStore store = train_family(train, a.cfg, a.jobs);
    store.save(a.out);
    std::size_t multipliers = 0, failures = 0;
    for (const auto& e : store.entries) {
        multipliers += e.multipliers.size();
        if (e.failure) ++failures;
    }
    out << "store written to " << a.out << ": " << store.entries.size() << " entries, "
        << multipliers << " multipliers, " << failures << " failures\n";
    return 0;
}

// ------------------------------------------------------------- predict

struct PredictArgs {
    std::string store, in, out, strategy = "closest";
    int k = 1;
    uint64_t seed = 0;
    bool drop_dominated = false;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
    MultiplierStore store = MultiplierStore::load(a.store);
    MilpInstance test = MilpInstance::load(a.in);
    if (a.k < 1 || static_cast<std::size_t>(a.k) > store.entries.size())
        throw UsageError("--k must lie in [1, " + std::to_string(store.entries.size()) + "]");
    SelectStrategy strategy = strategy_from_string(a.strategy);
    std::vector<Cut> cuts = predict_cuts(store, test, a.k, strategy, a.seed, a.drop_dominated);

    ordered_json j;
    j["v"] = 1;
    j["instance"] = test.name;
    j["matrix_signature"] = hex64(instance_signature(test));
    j["k"] = a.k;
    j["strategy"] = a.strategy;
    j["seed"] = hex64(a.seed);
    j["cuts"] = ordered_json::array();
    for (const auto& cut : cuts) j["cuts"].push_back(ordered_json::parse(cut_to_json_string(cut)));
    if (!a.out.empty()) write_file(a.out, j.dump(2) + "\n");
    out << "predicted " << cuts.size() << " cuts for " << test.name << "\n";
    return 0;
}

// ------------------------------------------------------------- eval

struct EvalArgs {
    std::string family_dir, store, out, strategy;  // empty strategy = all three
    int k = 1;
    uint64_t seed = 0;
    int jobs = 1;
    bool skip_oracle = false;
    bool timings = false;
};

struct EvalRow {
    std::string variation, strategy;
    double lp_bound = 0.0, cut_bound = 0.0;
    std::optional<double> ip_bound, gap;
    int cuts_generated = 0;
    std::optional<int> cuts_valid;
    std::vector<std::string> selected;
    double t_predict = 0.0, t_lp = 0.0, t_cut_lp = 0.0, t_oracle = 0.0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    MultiplierStore store = MultiplierStore::load(a.store);
    if (a.k < 1 || static_cast<std::size_t>(a.k) > store.entries.size())
        throw UsageError("--k must lie in [1, " + std::to_string(store.entries.size()) + "]");
    std::vector<SelectStrategy> strategies;
    if (a.strategy.empty())
        strategies = {SelectStrategy::closest, SelectStrategy::farthest, SelectStrategy::random};
    else
        strategies = {strategy_from_string(a.strategy)};

    FamilyFiles files = read_manifest(a.family_dir);
    std::vector<MilpInstance> tests;
    for (const auto& path : files.test) tests.push_back(MilpInstance::load_json(path));

    std::vector<std::vector<EvalRow>> row_groups(tests.size());
    parallel_for(tests.size(), a.jobs, [&](std::size_t ti) {
        const MilpInstance& test = tests[ti];
        if (instance_signature(test) != store.matrix_signature)
            throw LearnError("test variation '" + test.name + "' does not match the store");
        auto [sf, map] = to_standard_form(test);

        auto t0 = Clock::now();
        LpResult lp = solve_lp(sf);
        if (lp.status != LpStatus::optimal)
            throw CollectError("test LP relaxation " + to_string(lp.status));
        const double t_lp = ms_since(t0);

        std::optional<double> z_ip;
        std::optional<IntegerBox> box;
        double t_oracle = 0.0;
        if (!a.skip_oracle) {
            t0 = Clock::now();
            box = derive_box(sf);
            if (box) {
                try {
                    double v = integer_optimum(sf, *box);
                    if (std::isfinite(v)) z_ip = v;
                } catch (const OracleRefusal&) {
                }
            }
            t_oracle = ms_since(t0);
        }

        std::vector<EvalRow>& rows = row_groups[ti];
        EvalRow base;
        base.variation = test.name;
        base.strategy = "baseline";
        base.lp_bound = map.original_objective(lp.obj);
        base.cut_bound = base.lp_bound;
        if (z_ip) base.ip_bound = map.original_objective(*z_ip);
        base.gap = 0.0;
        base.t_lp = t_lp;
        base.t_oracle = t_oracle;
        rows.push_back(base);

        FeatureVector fv = features(test);
        for (SelectStrategy strat : strategies) {
            EvalRow row;
            row.variation = test.name;
            row.strategy = to_string(strat);
            row.lp_bound = base.lp_bound;
            row.ip_bound = base.ip_bound;

            t0 = Clock::now();
            auto selected = select_variation_indices(store, fv, a.k, strat, a.seed);
            std::vector<Cut> cuts = replay_multipliers(store, selected, sf);
            row.t_predict = ms_since(t0);
            for (std::size_t s : selected) row.selected.push_back(store.entries[s].id);
            row.cuts_generated = static_cast<int>(cuts.size());

            t0 = Clock::now();
            const double z_cut = final_bound(sf, cuts);
            row.t_cut_lp = ms_since(t0);
            row.cut_bound = map.original_objective(z_cut);
            if (z_ip) row.gap = gap_closed(lp.obj, z_cut, *z_ip);

            if (box && !a.skip_oracle) {
                t0 = Clock::now();
                int valid = 0;
                for (const auto& cut : cuts)
                    if (verify_cut_valid(sf, cut, *box).valid) ++valid;
                row.cuts_valid = valid;
                row.t_oracle += ms_since(t0);
            }
            rows.push_back(std::move(row));
        }
    });

    ordered_json report;
    report["v"] = 1;
    report["family"] = a.family_dir;
    report["store"] = a.store;
    report["k"] = a.k;
    report["seed"] = hex64(a.seed);
    report["strategies"] = ordered_json::array();
    for (auto s : strategies) report["strategies"].push_back(to_string(s));
    report["rows"] = ordered_json::array();
    for (const auto& rows : row_groups) {
        for (const auto& r : rows) {
            ordered_json jr;
            jr["variation"] = r.variation;
            jr["strategy"] = r.strategy;
            jr["lp_bound"] = r.lp_bound;
            jr["cut_bound"] = r.cut_bound;
            jr["ip_bound"] = r.ip_bound ? ordered_json(*r.ip_bound) : ordered_json(nullptr);
            jr["gap_closed"] = r.gap ? ordered_json(*r.gap) : ordered_json(nullptr);
            jr["cuts_generated"] = r.cuts_generated;
            jr["cuts_valid"] = r.cuts_valid ? ordered_json(*r.cuts_valid) : ordered_json(nullptr);
            jr["termination_reason"] = nullptr;  // prediction replays, no collection loop
            jr["selected"] = r.selected;
            if (a.timings)
                jr["timings_ms"] = {{"predict", r.t_predict},
                                    {"lp", r.t_lp},
                                    {"cut_lp", r.t_cut_lp},
                                    {"oracle", r.t_oracle}};
            report["rows"].push_back(std::move(jr));
            out << r.variation << " " << r.strategy << ": lp " << r.lp_bound << ", cut "
                << r.cut_bound
                << (r.gap ? ", gap " + std::to_string(*r.gap) : std::string()) << ", cuts "
                << r.cuts_generated << "\n";
        }
    }
    if (!a.out.empty()) write_file(a.out, report.dump(2) + "\n");
    return 0;
}

// ------------------------------------------------------------- verify

struct VerifyArgs {
    std::string in, cuts, out;
    long long limit = kDefaultEnumLimit;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
    MilpInstance inst = MilpInstance::load(a.in);
    auto [sf, map] = to_standard_form(inst);
    auto box = derive_box(sf);
    if (!box) throw Error("cannot derive finite bounds for the integer columns");

    ordered_json doc = ordered_json::parse(read_file(a.cuts));
    const ordered_json& list = doc.is_array() ? doc : doc.at("cuts");

    ordered_json reports = ordered_json::array();
    int invalid = 0, idx = 0;
    for (const auto& jc : list) {
        Cut cut = cut_from_json_string(jc.dump());
        ValidityReport rep;
        if (cut.space == CutSpace::standard) {
            rep = verify_cut_valid(sf, cut, *box, a.limit);
        } else {
            auto [lhs, rhs] = inequality_to_standard_space(cut.coeffs, cut.rhs, map, sf);
            rep = verify_inequality_valid(sf, lhs, rhs, *box, a.limit);
        }
        if (!rep.valid) ++invalid;
        ordered_json jr = ordered_json::parse(rep.to_json_string());
        jr["cut"] = idx++;
        reports.push_back(std::move(jr));
        out << "cut " << (idx - 1) << ": " << (rep.valid ? "valid" : "INVALID") << " ("
            << rep.points_checked << " points)\n";
    }
    if (!a.out.empty()) write_file(a.out, reports.dump(2) + "\n");
    if (invalid > 0) {
        write_error(err, "validity",
                    std::to_string(invalid) + " of " + std::to_string(idx) +
                        " cuts failed verification");
        return 4;
    }
    return 0;
}

void add_collect_flags(CLI::App* cmd, CollectConfig& cfg) {
    cmd->add_option("--rounds", cfg.max_rounds, "Collection round limit K")
        ->capture_default_str();
    cmd->add_option("--max-rows", cfg.max_rows_per_basis, "Tableau rows harvested per basis")
        ->capture_default_str();
    cmd->add_option("--frac-threshold", cfg.frac_threshold, "Rhs fractionality gate")
        ->capture_default_str();
    cmd->add_option("--dual-tol", cfg.dual_zero_tol, "Zero-dual discard tolerance")
        ->capture_default_str();
    cmd->add_option("--stall-tol", cfg.obj_stall_tol, "Relative objective stall tolerance")
        ->capture_default_str();
    cmd->add_flag("--audit-drops", cfg.audit_zero_dual_drops,
                  "Record the re-solved bound after zero-dual removals");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gomory mixed-integer cut closure approximation with multiplier replay"};
    app.require_subcommand(1);

    PerturbArgs pa;
    pa.seed = default_seed();
    auto* perturb_cmd = app.add_subcommand("perturb", "Generate a perturbed instance family");
    perturb_cmd->add_option("--in", pa.in, "Seed instance (.mps or .json)")->required();
    perturb_cmd->add_option("--out", pa.out_dir, "Output directory")->required();
    perturb_cmd->add_option("--seed", pa.seed, "Family seed")->capture_default_str();
    perturb_cmd->add_option("--train", pa.n_train, "Training variations")->capture_default_str();
    perturb_cmd->add_option("--test", pa.n_test, "Test variations")->capture_default_str();
    perturb_cmd->add_option("--probes", pa.probes, "Feasibility probes")->capture_default_str();

    CollectArgs ca;
    auto* collect_cmd = app.add_subcommand("collect", "Collect cuts for one instance");
    collect_cmd->add_option("--in", ca.in, "Instance (.mps or .json)")->required();
    collect_cmd->add_option("--out", ca.out, "Cut pool output file");
    add_collect_flags(collect_cmd, ca.cfg);

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "Collect cuts over a family's training set");
    train_cmd->add_option("--family", ta.family_dir, "Family directory")->required();
    train_cmd->add_option("--out", ta.out, "Multiplier store output file")->required();
    train_cmd->add_option("--jobs", ta.jobs, "Parallel collection jobs")->capture_default_str();
    add_collect_flags(train_cmd, ta.cfg);

    PredictArgs pra;
    pra.seed = default_seed();
    auto* predict_cmd = app.add_subcommand("predict", "Replay stored multipliers on an instance");
    predict_cmd->add_option("--store", pra.store, "Multiplier store")->required();
    predict_cmd->add_option("--in", pra.in, "Test instance")->required();
    predict_cmd->add_option("--k", pra.k, "Variations to select")->capture_default_str();
    predict_cmd->add_option("--strategy", pra.strategy, "closest|farthest|random")
        ->capture_default_str();
    predict_cmd->add_option("--seed", pra.seed, "Selection seed")->capture_default_str();
    predict_cmd->add_flag("--filter-dominated", pra.drop_dominated, "Drop dominated cuts");
    predict_cmd->add_option("--out", pra.out, "Predicted cuts output file");

    EvalArgs ea;
    ea.seed = default_seed();
    auto* eval_cmd = app.add_subcommand("eval", "Bound improvement on a family's test set");
    eval_cmd->add_option("--family", ea.family_dir, "Family directory")->required();
    eval_cmd->add_option("--store", ea.store, "Multiplier store")->required();
    eval_cmd->add_option("--k", ea.k, "Variations to select")->capture_default_str();
    eval_cmd->add_option("--strategy", ea.strategy,
                         "closest|farthest|random (all three when omitted)");
    eval_cmd->add_option("--seed", ea.seed, "Selection seed")->capture_default_str();
    eval_cmd->add_option("--jobs", ea.jobs, "Parallel evaluation jobs")->capture_default_str();
    eval_cmd->add_flag("--skip-oracle", ea.skip_oracle, "Skip exact bounds and validity checks");
    eval_cmd->add_flag("--timings", ea.timings,
                       "Include wall-clock timings in the report (breaks byte determinism)");
    eval_cmd->add_option("--out", ea.out, "Report output file");

    VerifyArgs va;
    auto* verify_cmd = app.add_subcommand("verify", "Certify cuts against the exact oracle");
    verify_cmd->add_option("--in", va.in, "Instance the cuts claim validity for")->required();
    verify_cmd->add_option("--cuts", va.cuts, "Cut file (predict/collect output)")->required();
    verify_cmd->add_option("--limit", va.limit, "Enumeration cell limit")->capture_default_str();
    verify_cmd->add_option("--out", va.out, "Validity report output file");

    std::vector<const char*> argv;
    argv.push_back("closure-forge");
    for (const auto& s : args) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        write_error(err, "usage", e.what());
        return 2;
    }

    try {
        if (*perturb_cmd) return cmd_perturb(pa, out);
        if (*collect_cmd) return cmd_collect(ca, out);
        if (*train_cmd) return cmd_train(ta, out);
        if (*predict_cmd) return cmd_predict(pra, out);
        if (*eval_cmd) return cmd_eval(ea, out);
        if (*verify_cmd) return cmd_verify(va, out, err);
        write_error(err, "usage", "no subcommand given");
        return 2;
    } catch (const UsageError& e) {
        write_error(err, "usage", e.what());
        return 2;
    } catch (const FamilyError& e) {
        write_error(err, "family", e.what());
        return 3;
    } catch (const std::exception& e) {
        write_error(err, "internal", e.what());
        return 1;
    }
}

}  // namespace closure

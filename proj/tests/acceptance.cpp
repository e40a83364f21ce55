// Acceptance suite: one test case per criterion, one printed pass/fail line
// each. Tolerances are pinned here, not configurable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "closure/cli.hpp"
#include "closure/collect.hpp"
#include "closure/gmic.hpp"
#include "closure/learn.hpp"
#include "closure/oracle.hpp"
#include "closure/perturb.hpp"
#include "closure/simplex.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

using namespace closure;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
    int number;
    const char* name;
    bool ok = true;
    int checks = 0;
    std::string first_failure;

    Criterion(int number, const char* name) : number(number), name(name) {}
    void expect(bool cond, const std::string& what) {
        ++checks;
        if (!cond && ok) {
            ok = false;
            first_failure = what;
        }
    }
    ~Criterion() {
        std::printf("[acceptance] criterion %d (%s): %s (%d checks)%s%s\n", number, name,
                    ok ? "PASS" : "FAIL", checks, ok ? "" : " — ",
                    ok ? "" : first_failure.c_str());
        std::fflush(stdout);
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

TEST_CASE("criterion 1: master validity") {
    auto t0 = Clock::now();
    Criterion crit(1, "master validity");
    Rng rng(0xC0FFEE);
    int instances = 0;
    long long cuts_checked = 0;
    while (instances < 600) {
        StandardFormMilp sf = testing::random_sf(rng);
        ++instances;
        auto box = derive_box(sf);
        crit.expect(box.has_value(), "box derivation failed");
        if (!box) continue;

        CutPool pool = collect_cuts(sf);
        for (const auto& pc : pool.cuts) {
            ValidityReport rep = verify_cut_valid(sf, pc.cut, *box);
            crit.expect(rep.valid, "collected cut failed validity");
            ++cuts_checked;
        }

        // replay path: perturb the rhs within the family, train on three
        // variations, predict on a fourth
        if (instances % 5 == 0 && !pool.cuts.empty()) {
            std::vector<SparseVec> lambdas;
            for (const auto& pc : pool.cuts) lambdas.push_back(pc.lambda);
            for (int v = 0; v < 3; ++v) {
                StandardFormMilp test = sf;
                for (auto& bi : test.b)
                    bi += static_cast<double>(rng.index(3)) - 1.0;  // lattice shift
                auto tbox = derive_box(test);
                if (!tbox) continue;
                for (const auto& lambda : lambdas) {
                    auto cut = gmic_from_multiplier(lambda, test);
                    if (!cut || cut->coeffs.empty()) continue;
                    ValidityReport rep = verify_cut_valid(test, *cut, *tbox);
                    crit.expect(rep.valid, "replayed cut failed validity");
                    ++cuts_checked;
                }
            }
        }
    }
    crit.expect(cuts_checked > 200, "too few cuts exercised");
    const double elapsed = seconds_since(t0);
    crit.expect(elapsed < 60.0, "runtime " + std::to_string(elapsed) + "s exceeds 60s");
    CHECK(crit.ok);
}

TEST_CASE("criterion 2: separation exactness") {
    Criterion crit(2, "separation exactness");
    Rng rng(0xBEEF);
    int rows_checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        StandardFormMilp sf = testing::random_sf(rng);
        LpResult res = solve_lp(sf);
        if (res.status != LpStatus::optimal) continue;
        for (const TableauRow& row : tableau_rows(sf, *res.basis)) {
            if (row.basic_var < 0 || row.basic_var >= sf.cols()) continue;
            if (!sf.integer_mask[static_cast<std::size_t>(row.basic_var)]) continue;
            double fb = fractional_part(row.beta);
            if (fb < 0.001 || fb > 0.999) continue;
            auto cut = gmic_from_row(row.alpha, row.beta, sf.integer_mask);
            crit.expect(cut.has_value(), "gated row produced no cut");
            if (!cut) continue;
            double viol = violation(*cut, res.x);
            crit.expect(std::abs(viol - 1.0) <= 1e-9,
                        "violation " + std::to_string(viol) + " != 1");
            ++rows_checked;
        }
    }
    crit.expect(rows_checked > 100, "too few fractional rows exercised");
    CHECK(crit.ok);
}

TEST_CASE("criterion 3: knapsack closure") {
    Criterion crit(3, "knapsack closure");
    MilpInstance knap = testing::knapsack_instance();
    auto [sf, map] = to_standard_form(knap);

    CutPool pool = collect_cuts(sf);
    bool has_slack_cut = false;
    for (const auto& pc : pool.cuts) {
        Cut orig = map_cut_to_original(pc.cut, map, sf);
        // x1 + x2 <= 1 up to positive scaling: coeffs (-2c,-2c) >= -2c
        if (orig.coeffs.size() == 2 && orig.coeffs[0].value < 0.0) {
            double scale = orig.coeffs[0].value / -2.0;
            if (std::abs(orig.coeffs[1].value + 2.0 * scale) <= 1e-9 &&
                std::abs(orig.rhs + 2.0 * scale) <= 1e-9)
                has_slack_cut = true;
        }
    }
    crit.expect(has_slack_cut, "cut equivalent to x1 + x2 <= 1 not found");

    auto box = derive_box(sf);
    crit.expect(box.has_value(), "no box");
    if (box) {
        const double z_lp = pool.lp_relaxation_obj;
        const double z_cut = final_bound(sf, pool);
        const double z_ip = integer_optimum(sf, *box);
        crit.expect(z_ip == -1.0, "integer optimum != -1");
        crit.expect(gap_closed(z_lp, z_cut, z_ip) == 1.0, "gap closed != 1.0 exactly");
    }
    CHECK(crit.ok);
}

TEST_CASE("criterion 4: lattice replay") {
    Criterion crit(4, "lattice replay");
    Rng rng(0x1A77);
    int instances_used = 0;
    long long replays = 0;
    while (instances_used < 20) {
        StandardFormMilp sf = testing::random_sf(rng, {4, 0, 3, true});
        CutPool pool;
        try {
            pool = collect_cuts(sf);
        } catch (const CollectError&) {
            continue;
        }
        if (pool.cuts.empty()) continue;
        ++instances_used;

        const int m = sf.rows();
        std::vector<long long> gamma(static_cast<std::size_t>(m), -2);
        while (true) {
            StandardFormMilp shifted = sf;
            for (int i = 0; i < m; ++i)
                shifted.b[static_cast<std::size_t>(i)] += static_cast<double>(gamma[static_cast<std::size_t>(i)]);

            auto box = derive_box(shifted);
            if (box && box->cell_count() <= 200000) {
                if (integer_optimum(shifted, *box) < kInf) {  // feasible gamma
                    for (const auto& pc : pool.cuts) {
                        auto cut = gmic_from_multiplier(pc.lambda, shifted);
                        if (!cut || cut->coeffs.empty()) continue;
                        ValidityReport rep = verify_cut_valid(shifted, *cut, *box);
                        crit.expect(rep.valid, "replayed cut invalid under lattice shift");
                        ++replays;
                    }
                }
            }
            int pos = 0;
            while (pos < m && ++gamma[static_cast<std::size_t>(pos)] > 2)
                gamma[static_cast<std::size_t>(pos++)] = -2;
            if (pos == m) break;
        }
    }
    crit.expect(replays > 100, "too few replays exercised: " + std::to_string(replays));
    CHECK(crit.ok);
}

TEST_CASE("criterion 5: collection discipline") {
    Criterion crit(5, "collection discipline");
    Rng rng(0xD15C);
    CollectConfig cfg;
    cfg.audit_zero_dual_drops = true;
    for (int trial = 0; trial < 60; ++trial) {
        StandardFormMilp sf = testing::random_sf(rng);
        CutPool pool = collect_cuts(sf, cfg);
        crit.expect(pool.rounds.size() <= 10, "more than K=10 rounds");
        double prev = -kInf;
        for (const auto& rec : pool.rounds) {
            crit.expect(rec.harvested <= std::min(sf.rows(), 500),
                        "harvested more than min(q_hat, 500) cuts");
            crit.expect(rec.lp_with_cuts_obj >= prev - 1e-7, "bound decreased across rounds");
            prev = rec.lp_with_cuts_obj;
            if (rec.post_drop_obj)
                crit.expect(std::abs(*rec.post_drop_obj - rec.lp_with_cuts_obj) <= 1e-7,
                            "zero-dual removal changed the optimum");
        }
    }
    // the 500-row cap itself, on a synthetic tableau batch
    std::vector<TableauRow> rows;
    std::vector<bool> mask(600, true);
    for (int i = 0; i < 600; ++i) {
        TableauRow row;
        row.beta = 0.5;
        row.basic_var = i;
        row.row_index = i;
        rows.push_back(row);
    }
    crit.expect(select_rows(rows, mask, CollectConfig{}).size() == 500,
                "600 fractional rows must truncate to 500");
    CHECK(crit.ok);
}

TEST_CASE("criterion 6: perturbation statistics") {
    Criterion crit(6, "perturbation statistics");
    PerturbConfig cfg;

    // 10^4 multiplicative draws per channel
    MilpInstance rhs_probe;
    rhs_probe.vars = {{"a", 0.0, kInf, true, 1.0},
                      {"b", 0.0, kInf, false, 1.0},
                      {"c", 0.0, kInf, false, 1.0}};
    rhs_probe.constraints.push_back({"r", {{0, 1.0}, {1, 1.0}, {2, 1.0}}, Sense::le, 10.0});
    double rhs_sum = 0.0;
    for (uint64_t s = 0; s < 10000; ++s) {
        double rhs = perturb_instance(rhs_probe, cfg, s, PerturbChannel::rhs).constraints[0].rhs;
        crit.expect(rhs >= 9.0 && rhs <= 11.0, "rhs draw outside [0.9, 1.1] x rhs");
        rhs_sum += rhs / 10.0;
    }
    crit.expect(std::abs(rhs_sum / 10000.0 - 1.0) < 0.01, "rhs draw mean off midpoint");

    MilpInstance obj_probe = rhs_probe;
    double obj_sum = 0.0;
    for (uint64_t s = 0; s < 10000; ++s) {
        double c0 = perturb_instance(obj_probe, cfg, s, PerturbChannel::obj).vars[0].obj_coeff;
        crit.expect(c0 >= 0.75 && c0 <= 1.25, "objective draw outside [0.75, 1.25] x c");
        obj_sum += c0;
    }
    crit.expect(std::abs(obj_sum / 10000.0 - 1.0) < 0.01, "objective draw mean off midpoint");

    // rule-4 shifts lie in {-1, 0, 1}
    MilpInstance eq_probe;
    eq_probe.vars = {{"a", 0.0, kInf, true, 1.0}, {"b", 0.0, kInf, true, 1.0}};
    eq_probe.constraints.push_back({"e", {{0, 1.0}, {1, 1.0}}, Sense::eq, 7.0});
    std::set<double> shifts;
    for (uint64_t s = 0; s < 2000; ++s)
        shifts.insert(perturb_instance(eq_probe, cfg, s, PerturbChannel::rhs).constraints[0].rhs);
    crit.expect(shifts == std::set<double>{6.0, 7.0, 8.0}, "rule-4 shifts not {-1,0,1}");

    // rule 3 never touches all-discrete rhs-1 inequalities
    MilpInstance guard;
    guard.vars = {{"a", 0.0, kInf, true, 1.0}, {"b", 0.0, kInf, true, 1.0},
                  {"c", 0.0, kInf, true, 1.0}};
    guard.constraints.push_back({"g", {{0, 1.0}, {1, 1.0}, {2, 1.0}}, Sense::le, 1.0});
    crit.expect(classify_constraint(guard.constraints[0], guard.vars) == PerturbRule::none,
                "rhs-1 all-discrete inequality classified as perturbable");
    for (uint64_t s = 0; s < 500; ++s)
        crit.expect(
            perturb_instance(guard, cfg, s, PerturbChannel::rhs).constraints[0].rhs == 1.0,
            "rhs-1 set-packing row was perturbed");

    // same seed, byte-identical family
    PerturbConfig fam_cfg;
    fam_cfg.seed = 424242;
    fam_cfg.n_train = 10;
    fam_cfg.n_test = 3;
    Family a = generate_family(testing::knapsack_instance(), fam_cfg);
    Family b = generate_family(testing::knapsack_instance(), fam_cfg);
    for (std::size_t i = 0; i < a.train.size(); ++i)
        crit.expect(a.train[i].to_json_string() == b.train[i].to_json_string(),
                    "same-seed training variation differs");
    for (std::size_t i = 0; i < a.test.size(); ++i)
        crit.expect(a.test[i].to_json_string() == b.test[i].to_json_string(),
                    "same-seed test variation differs");
    CHECK(crit.ok);
}

TEST_CASE("criterion 7: selection oracle and scaler") {
    Criterion crit(7, "selection oracle");
    Rng rng(0x5E1E);
    for (int matrix = 0; matrix < 100; ++matrix) {
        std::vector<FeatureVector> rows;
        MultiplierStore store;
        for (int i = 0; i < 20; ++i) {
            std::vector<double> row(10);
            for (auto& v : row) v = rng.uniform(-100.0, 100.0);
            rows.push_back({row});
            store.entries.push_back({"e" + std::to_string(i), row, {}, {}});
        }
        store.scaler = fit_scaler(rows);

        // scaler maps the fitting data to mean 0, variance 1
        for (std::size_t j = 0; j < 10; ++j) {
            double mean = 0.0, var = 0.0;
            std::vector<std::vector<double>> scaled;
            for (const auto& r : rows) scaled.push_back(store.scaler.transform(r.values));
            for (const auto& r : scaled) mean += r[j];
            mean /= static_cast<double>(scaled.size());
            for (const auto& r : scaled) var += (r[j] - mean) * (r[j] - mean);
            var /= static_cast<double>(scaled.size());
            crit.expect(std::abs(mean) <= 1e-9, "scaled mean above 1e-9");
            crit.expect(std::abs(var - 1.0) <= 1e-9, "scaled variance not 1 +- 1e-9");
        }

        std::vector<double> t(10);
        for (auto& v : t) v = rng.uniform(-100.0, 100.0);
        FeatureVector test{t};
        std::vector<double> st = store.scaler.transform(t);
        std::vector<std::pair<double, std::size_t>> dist;
        for (std::size_t i = 0; i < 20; ++i) {
            std::vector<double> r = store.scaler.transform(rows[i].values);
            double d2 = 0.0;
            for (std::size_t j = 0; j < 10; ++j) d2 += (r[j] - st[j]) * (r[j] - st[j]);
            dist.push_back({d2, i});
        }
        std::sort(dist.begin(), dist.end());
        for (int k = 1; k <= 20; ++k) {
            auto close = select_variation_indices(store, test, k, SelectStrategy::closest, 0);
            auto far = select_variation_indices(store, test, k, SelectStrategy::farthest, 0);
            for (int i = 0; i < k; ++i) {
                crit.expect(close[static_cast<std::size_t>(i)] ==
                                dist[static_cast<std::size_t>(i)].second,
                            "closest selection disagrees with brute force");
                crit.expect(far[static_cast<std::size_t>(i)] ==
                                dist[19 - static_cast<std::size_t>(i)].second,
                            "farthest selection disagrees with brute force");
            }
        }
    }
    CHECK(crit.ok);
}

TEST_CASE("criterion 8: end-to-end family evaluation") {
    auto t0 = Clock::now();
    Criterion crit(8, "end-to-end family evaluation");

    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "closure_acceptance_c8";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string fam_dir = (dir / "fam").string();

    // fixed-matrix seed with a known fractional LP for every variation
    MilpInstance seed;
    seed.name = "frac";
    seed.objective_sense = ObjSense::maximize;
    seed.vars.push_back({"x1", 0.0, kInf, true, 3.0});
    seed.vars.push_back({"x2", 0.0, kInf, true, 2.0});
    seed.constraints.push_back({"cap", {{0, 2.0}, {1, 2.0}}, Sense::le, 3.0});
    seed.save_json((dir / "seed.json").string());

    std::ostringstream out, err;
    auto cli = [&](std::vector<std::string> args) {
        return run_cli(args, out, err);
    };
    crit.expect(cli({"perturb", "--in", (dir / "seed.json").string(), "--out", fam_dir,
                     "--seed", "36494", "--train", "50", "--test", "5"}) == 0,
                "perturb CLI failed: " + err.str());

    // make test member 0 identical to training member 0
    MilpInstance twin = MilpInstance::load_json(fam_dir + "/train_000.json");
    twin.name = "frac_test_twin";
    twin.save_json(fam_dir + "/test_000.json");

    crit.expect(cli({"train", "--family", fam_dir, "--out", (dir / "store.json").string()}) == 0,
                "train CLI failed: " + err.str());
    crit.expect(cli({"eval", "--family", fam_dir, "--store", (dir / "store.json").string(),
                     "--k", "1", "--strategy", "closest", "--seed", "0", "--out",
                     (dir / "report.json").string()}) == 0,
                "eval CLI failed: " + err.str());

    // the single-instance collect baseline on the twin training member
    MilpInstance train0 = MilpInstance::load_json(fam_dir + "/train_000.json");
    auto [twin_sf, twin_map] = to_standard_form(train0);
    CutPool twin_pool = collect_cuts(twin_sf);
    auto twin_box = derive_box(twin_sf);
    crit.expect(twin_box.has_value(), "twin box missing");
    double twin_collect_gap = 0.0;
    if (twin_box)
        twin_collect_gap = gap_closed(twin_pool.lp_relaxation_obj, final_bound(twin_sf, twin_pool),
                                      integer_optimum(twin_sf, *twin_box));

    std::ifstream report_in((dir / "report.json").string());
    std::stringstream report_text;
    report_text << report_in.rdbuf();
    nlohmann::json report = nlohmann::json::parse(report_text.str());

    int positive = 0, strategy_rows = 0;
    for (const auto& row : report.at("rows")) {
        if (row.at("strategy") == "baseline") {
            crit.expect(row.at("gap_closed").get<double>() == 0.0, "baseline gap not 0");
            continue;
        }
        ++strategy_rows;
        crit.expect(!row.at("gap_closed").is_null(), "gap_closed missing from eval row");
        if (row.at("gap_closed").is_null()) continue;
        const double gap = row.at("gap_closed").get<double>();
        if (gap > 0.0) ++positive;
        if (row.at("variation") == "frac_test_twin") {
            crit.expect(row.at("selected").at(0).get<std::string>() == "frac_train_000",
                        "twin did not select its own training variation");
            crit.expect(gap >= twin_collect_gap - 1e-9,
                        "replay on the twin fell below the collect baseline (" +
                            std::to_string(gap) + " < " + std::to_string(twin_collect_gap) + ")");
        }
    }
    crit.expect(strategy_rows == 5, "expected 5 strategy rows");
    crit.expect(positive >= 4, "gap closed > 0 on only " + std::to_string(positive) + "/5");

    fs::remove_all(dir);
    const double elapsed = seconds_since(t0);
    crit.expect(elapsed < 300.0, "criterion runtime " + std::to_string(elapsed) + "s");
    CHECK(crit.ok);
}

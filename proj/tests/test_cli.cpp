#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "closure/cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const char* kKnapMps =
    "NAME knap\n"
    "OBJSENSE\n"
    "    MAX\n"
    "ROWS\n"
    " N obj\n"
    " L cap\n"
    "COLUMNS\n"
    "    MARKER 'MARKER' 'INTORG'\n"
    "    x1 obj 3.0 cap 2.0\n"
    "    x2 obj 2.0 cap 2.0\n"
    "    MARKER 'MARKER' 'INTEND'\n"
    "RHS\n"
    "    rhs cap 3.0\n"
    "ENDATA\n";

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("closure_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
    std::ostringstream out, err;
    int code = closure::run_cli(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("cli: full pipeline on the knapsack family") {
    TempDir tmp;
    {
        std::ofstream mps(tmp.file("knap.mps"));
        mps << kKnapMps;
    }
    const std::string fam_dir = tmp.file("fam");

    CHECK(run({"perturb", "--in", tmp.file("knap.mps"), "--out", fam_dir, "--seed", "11",
               "--train", "8", "--test", "3"}) == 0);
    CHECK(fs::exists(fam_dir + "/family.json"));
    CHECK(fs::exists(fam_dir + "/train_007.json"));
    CHECK(fs::exists(fam_dir + "/test_002.json"));

    CHECK(run({"collect", "--in", fam_dir + "/train_000.json", "--out", tmp.file("pool.json")}) ==
          0);
    auto pool = nlohmann::json::parse(slurp(tmp.file("pool.json")));
    CHECK(pool.at("v") == 1);
    CHECK(pool.at("cuts").size() >= 1);

    CHECK(run({"train", "--family", fam_dir, "--out", tmp.file("store.json")}) == 0);
    auto store = nlohmann::json::parse(slurp(tmp.file("store.json")));
    CHECK(store.at("entries").size() == 8);

    CHECK(run({"predict", "--store", tmp.file("store.json"), "--in", fam_dir + "/test_000.json",
               "--k", "2", "--strategy", "closest", "--seed", "5", "--out",
               tmp.file("cuts.json")}) == 0);
    auto cuts = nlohmann::json::parse(slurp(tmp.file("cuts.json")));
    CHECK(cuts.at("cuts").size() >= 1);

    CHECK(run({"predict", "--store", tmp.file("store.json"), "--in", fam_dir + "/test_000.json",
               "--k", "8", "--strategy", "random", "--seed", "5", "--filter-dominated",
               "--out", tmp.file("cuts_filtered.json")}) == 0);
    auto filtered = nlohmann::json::parse(slurp(tmp.file("cuts_filtered.json")));
    CHECK(filtered.at("cuts").size() <= 8);

    CHECK(run({"verify", "--in", fam_dir + "/test_000.json", "--cuts", tmp.file("cuts.json")}) ==
          0);
    // pool cuts certify against their own instance as well
    CHECK(run({"verify", "--in", fam_dir + "/train_000.json", "--cuts", tmp.file("pool.json")}) ==
          0);

    std::string eval_out;
    CHECK(run({"eval", "--family", fam_dir, "--store", tmp.file("store.json"), "--k", "2",
               "--seed", "5", "--out", tmp.file("report.json")},
              &eval_out) == 0);
    auto report = nlohmann::json::parse(slurp(tmp.file("report.json")));
    // 3 test variations x (baseline + three strategies)
    CHECK(report.at("rows").size() == 12);
    for (const auto& row : report.at("rows")) {
        CHECK_FALSE(row.contains("timings_ms"));  // only under --timings
        if (row.at("strategy") == "baseline") {
            CHECK(row.at("gap_closed").get<double>() == 0.0);
            CHECK(row.at("cuts_generated") == 0);
        } else {
            CHECK(row.at("cuts_valid") == row.at("cuts_generated"));
        }
    }

    CHECK(run({"eval", "--family", fam_dir, "--store", tmp.file("store.json"), "--k", "1",
               "--strategy", "closest", "--seed", "5", "--timings", "--out",
               tmp.file("report_timed.json")}) == 0);
    auto timed = nlohmann::json::parse(slurp(tmp.file("report_timed.json")));
    CHECK(timed.at("rows").size() == 6);  // baseline + closest per variation
    CHECK(timed.at("rows").at(0).contains("timings_ms"));
}

TEST_CASE("cli: deterministic outputs") {
    TempDir tmp;
    {
        std::ofstream mps(tmp.file("knap.mps"));
        mps << kKnapMps;
    }
    const std::string fam_a = tmp.file("fam_a");
    const std::string fam_b = tmp.file("fam_b");
    CHECK(run({"perturb", "--in", tmp.file("knap.mps"), "--out", fam_a, "--seed", "3",
               "--train", "4", "--test", "2"}) == 0);
    CHECK(run({"perturb", "--in", tmp.file("knap.mps"), "--out", fam_b, "--seed", "3",
               "--train", "4", "--test", "2"}) == 0);
    CHECK(slurp(fam_a + "/family.json") == slurp(fam_b + "/family.json"));
    CHECK(slurp(fam_a + "/train_003.json") == slurp(fam_b + "/train_003.json"));

    CHECK(run({"train", "--family", fam_a, "--out", tmp.file("s1.json")}) == 0);
    CHECK(run({"train", "--family", fam_b, "--out", tmp.file("s2.json"), "--jobs", "3"}) == 0);
    CHECK(slurp(tmp.file("s1.json")) == slurp(tmp.file("s2.json")));

    for (int i = 0; i < 2; ++i)
        CHECK(run({"eval", "--family", fam_a, "--store", tmp.file("s1.json"), "--k", "2",
                   "--seed", "9", "--out", tmp.file("r" + std::to_string(i) + ".json")}) == 0);
    CHECK(slurp(tmp.file("r0.json")) == slurp(tmp.file("r1.json")));
}

TEST_CASE("cli: exit codes") {
    TempDir tmp;
    {
        std::ofstream mps(tmp.file("knap.mps"));
        mps << kKnapMps;
    }

    SUBCASE("usage errors exit 2") {
        std::string err;
        CHECK(run({"predict", "--store", "missing.json"}, nullptr, &err) == 2);  // --in required
        CHECK(err.find("\"usage\"") != std::string::npos);
        CHECK(run({"nonsense"}, nullptr, &err) == 2);
    }
    SUBCASE("k beyond the store size exits 2") {
        const std::string fam = tmp.file("fam");
        REQUIRE(run({"perturb", "--in", tmp.file("knap.mps"), "--out", fam, "--seed", "1",
                     "--train", "3", "--test", "1"}) == 0);
        REQUIRE(run({"train", "--family", fam, "--out", tmp.file("store.json")}) == 0);
        std::string err;
        CHECK(run({"predict", "--store", tmp.file("store.json"), "--in", fam + "/test_000.json",
                   "--k", "99"},
                  nullptr, &err) == 2);
        CHECK(err.find("k must lie") != std::string::npos);
    }
    SUBCASE("family error exits 3") {
        std::ofstream json(tmp.file("rigid.json"));
        json << R"({"name":"rigid","objective_sense":"min",)"
             << R"("vars":[{"name":"x","lower":0,"upper":null,"is_integer":true,"obj_coeff":1.0},)"
             << R"({"name":"y","lower":0,"upper":null,"is_integer":true,"obj_coeff":0.0}],)"
             << R"("constraints":[{"name":"c","coeffs":[[0,1.0],[1,1.0]],"sense":"<=","rhs":1.0}]})";
        json.close();
        std::string err;
        CHECK(run({"perturb", "--in", tmp.file("rigid.json"), "--out", tmp.file("nofam")},
                  nullptr, &err) == 3);
        CHECK(err.find("no changes") != std::string::npos);
    }
    SUBCASE("invalid cuts exit 4") {
        std::ofstream cuts(tmp.file("bad_cuts.json"));
        cuts << R"({"cuts":[{"coeffs":[[0,1.0]],"rhs":1.0,"space":"standard","origin":null}]})";
        cuts.close();
        // x1 >= 1 is not valid for the knapsack (origin is feasible)
        std::string err;
        CHECK(run({"verify", "--in", tmp.file("knap.mps"), "--cuts", tmp.file("bad_cuts.json")},
                  nullptr, &err) == 4);
    }
    SUBCASE("internal errors exit 1") {
        std::string err;
        CHECK(run({"collect", "--in", tmp.file("does_not_exist.json")}, nullptr, &err) == 1);
        CHECK(err.find("\"internal\"") != std::string::npos);
    }
}

TEST_CASE("cli: env seed fallback") {
    TempDir tmp;
    {
        std::ofstream mps(tmp.file("knap.mps"));
        mps << kKnapMps;
    }
    ::setenv("CLOSURE_FORGE_SEED", "21", 1);
    const std::string fam_env = tmp.file("fam_env");
    CHECK(run({"perturb", "--in", tmp.file("knap.mps"), "--out", fam_env, "--train", "3",
               "--test", "1"}) == 0);
    ::unsetenv("CLOSURE_FORGE_SEED");
    const std::string fam_exp = tmp.file("fam_exp");
    CHECK(run({"perturb", "--in", tmp.file("knap.mps"), "--out", fam_exp, "--seed", "21",
               "--train", "3", "--test", "1"}) == 0);
    CHECK(slurp(fam_env + "/train_002.json") == slurp(fam_exp + "/train_002.json"));
}

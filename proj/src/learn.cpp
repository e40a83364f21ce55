#include "closure/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "closure/gmic.hpp"
#include "json.hpp"

namespace closure {

std::string to_string(SelectStrategy s) {
    switch (s) {
        case SelectStrategy::closest: return "closest";
        case SelectStrategy::farthest: return "farthest";
        case SelectStrategy::random: return "random";
    }
    return "?";
}

SelectStrategy strategy_from_string(const std::string& s) {
    if (s == "closest") return SelectStrategy::closest;
    if (s == "farthest") return SelectStrategy::farthest;
    if (s == "random") return SelectStrategy::random;
    throw LearnError("unknown selection strategy '" + s + "'");
}

FeatureVector features(const MilpInstance& inst) {
    FeatureVector fv;
    fv.values.reserve(inst.constraints.size() + inst.vars.size());
    for (const auto& c : inst.constraints) fv.values.push_back(c.rhs);
    for (const auto& v : inst.vars) fv.values.push_back(v.obj_coeff);
    return fv;
}

Scaler fit_scaler(const std::vector<FeatureVector>& rows) {
    if (rows.empty()) throw LearnError("fit_scaler needs at least one row");
    const std::size_t dim = rows[0].values.size();
    for (const auto& r : rows)
        if (r.values.size() != dim) throw LearnError("feature rows differ in length");

    Scaler s;
    s.mean.assign(dim, 0.0);
    s.std_dev.assign(dim, 0.0);
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows)
        for (std::size_t i = 0; i < dim; ++i) s.mean[i] += r.values[i];
    for (std::size_t i = 0; i < dim; ++i) s.mean[i] /= n;
    for (const auto& r : rows)
        for (std::size_t i = 0; i < dim; ++i) {
            double d = r.values[i] - s.mean[i];
            s.std_dev[i] += d * d;
        }
    for (std::size_t i = 0; i < dim; ++i) {
        s.std_dev[i] = std::sqrt(s.std_dev[i] / n);
        if (s.std_dev[i] < 1e-12) s.std_dev[i] = 1.0;
    }
    return s;
}

std::vector<double> Scaler::transform(const std::vector<double>& x) const {
    if (x.size() != mean.size()) throw LearnError("feature length does not match the scaler");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / std_dev[i];
    return out;
}

std::vector<std::size_t> select_variation_indices(const MultiplierStore& store,
                                                  const FeatureVector& test, int k,
                                                  SelectStrategy strategy, uint64_t seed) {
    const std::size_t count = store.entries.size();
    if (k < 1 || static_cast<std::size_t>(k) > count)
        throw ContractViolation("k out of range: 1 <= k <= " + std::to_string(count));

    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);

    if (strategy == SelectStrategy::random) {
        Rng rng(seed);
        rng.shuffle(order);
    } else {
        std::vector<double> scaled_test = store.scaler.transform(test.values);
        std::vector<double> dist(count);
        for (std::size_t i = 0; i < count; ++i) {
            std::vector<double> row = store.scaler.transform(store.entries[i].features);
            double d2 = 0.0;
            for (std::size_t j = 0; j < row.size(); ++j) {
                double d = row[j] - scaled_test[j];
                d2 += d * d;
            }
            dist[i] = std::sqrt(d2);
        }
        const bool closest = strategy == SelectStrategy::closest;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (dist[a] != dist[b]) return closest ? dist[a] < dist[b] : dist[a] > dist[b];
            return a < b;
        });
    }
    order.resize(static_cast<std::size_t>(k));
    return order;
}

std::vector<std::string> select_variations(const MultiplierStore& store, const FeatureVector& test,
                                           int k, SelectStrategy strategy, uint64_t seed) {
    std::vector<std::string> ids;
    for (std::size_t i : select_variation_indices(store, test, k, strategy, seed))
        ids.push_back(store.entries[i].id);
    return ids;
}

MultiplierStore train_family(const std::vector<MilpInstance>& train_instances,
                             const CollectConfig& cfg, int jobs) {
    if (train_instances.empty()) throw LearnError("train_family needs at least one instance");
    MultiplierStore store;
    store.matrix_signature = instance_signature(train_instances[0]);

    std::vector<FeatureVector> rows;
    store.entries.resize(train_instances.size());
    for (std::size_t i = 0; i < train_instances.size(); ++i) {
        const MilpInstance& inst = train_instances[i];
        if (instance_signature(inst) != store.matrix_signature)
            throw LearnError("training instance '" + inst.name +
                             "' has a different constraint matrix");
        StoreEntry& entry = store.entries[i];
        entry.id = inst.name.empty() ? ("var_" + std::to_string(i)) : inst.name;
        entry.features = features(inst).values;
        rows.push_back({entry.features});
    }
    parallel_for(train_instances.size(), jobs, [&](std::size_t i) {
        StoreEntry& entry = store.entries[i];
        try {
            auto [sf, map] = to_standard_form(train_instances[i]);
            CutPool pool = collect_cuts(sf, cfg);
            for (const auto& pc : pool.cuts)
                if (!pc.lambda.empty()) entry.multipliers.push_back(pc.lambda);
        } catch (const Error& e) {
            entry.failure = e.what();
        }
    });
    store.scaler = fit_scaler(rows);
    return store;
}

std::vector<Cut> replay_multipliers(const MultiplierStore& store,
                                    const std::vector<std::size_t>& selected,
                                    const StandardFormMilp& sf_test) {
    std::vector<Cut> cuts;
    std::unordered_set<uint64_t> seen;
    for (std::size_t idx : selected) {
        const StoreEntry& entry = store.entries.at(idx);
        for (const SparseVec& lambda : entry.multipliers) {
            auto cut = gmic_from_multiplier(lambda, sf_test);
            if (!cut || cut->coeffs.empty()) continue;
            cut->origin = CutOrigin{entry.id, std::nullopt, std::nullopt};
            if (!seen.insert(cut_dedup_hash(*cut)).second) continue;
            cuts.push_back(std::move(*cut));
        }
    }
    return cuts;
}

std::vector<Cut> predict_cuts(const MultiplierStore& store, const MilpInstance& test, int k,
                              SelectStrategy strategy, uint64_t seed, bool drop_dominated) {
    if (instance_signature(test) != store.matrix_signature)
        throw LearnError("test instance does not match the store's constraint matrix");
    auto [sf, map] = to_standard_form(test);
    auto selected = select_variation_indices(store, features(test), k, strategy, seed);
    std::vector<Cut> standard = replay_multipliers(store, selected, sf);
    if (drop_dominated) standard = filter_dominated(std::move(standard));
    std::vector<Cut> out;
    out.reserve(standard.size());
    for (const auto& cut : standard) out.push_back(map_cut_to_original(cut, map, sf));
    return out;
}

namespace {

std::string hex64(uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string MultiplierStore::to_json_string() const {
    nlohmann::ordered_json j;
    j["v"] = 1;
    j["matrix_signature"] = hex64(matrix_signature);
    j["scaler"]["mean"] = scaler.mean;
    j["scaler"]["std"] = scaler.std_dev;
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        nlohmann::ordered_json je;
        je["id"] = e.id;
        je["features"] = e.features;
        je["multipliers"] = nlohmann::ordered_json::array();
        for (const auto& lambda : e.multipliers) {
            nlohmann::ordered_json jl = nlohmann::ordered_json::array();
            for (const auto& ent : lambda) jl.push_back({ent.index, ent.value});
            je["multipliers"].push_back(std::move(jl));
        }
        if (e.failure)
            je["failure"] = *e.failure;
        else
            je["failure"] = nullptr;
        j["entries"].push_back(std::move(je));
    }
    return j.dump(2) + "\n";
}

MultiplierStore MultiplierStore::from_json_string(const std::string& text) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
    MultiplierStore store;
    store.matrix_signature = std::stoull(j.at("matrix_signature").get<std::string>(), nullptr, 16);
    store.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    store.scaler.std_dev = j.at("scaler").at("std").get<std::vector<double>>();
    for (const auto& je : j.at("entries")) {
        StoreEntry e;
        e.id = je.at("id").get<std::string>();
        e.features = je.at("features").get<std::vector<double>>();
        for (const auto& jl : je.at("multipliers")) {
            SparseVec lambda;
            for (const auto& ent : jl) lambda.push_back({ent.at(0).get<int>(), ent.at(1).get<double>()});
            e.multipliers.push_back(std::move(lambda));
        }
        if (je.contains("failure") && !je.at("failure").is_null())
            e.failure = je.at("failure").get<std::string>();
        store.entries.push_back(std::move(e));
    }
    return store;
}

void MultiplierStore::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << to_json_string();
}

MultiplierStore MultiplierStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

}  // namespace closure

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "closure/collect.hpp"
#include "closure/cut.hpp"
#include "closure/instance.hpp"
#include "closure/standard_form.hpp"

namespace closure {

/// Constraint rhs values followed by objective coefficients, in parse order.
struct FeatureVector {
    std::vector<double> values;
};

/// Standard scaling: (x - mean) / std, population standard deviation.
/// Degenerate coordinates (std < 1e-12) scale by 1.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> std_dev;

    std::vector<double> transform(const std::vector<double>& x) const;
};

struct StoreEntry {
    std::string id;
    std::vector<double> features;        // raw, training statistics live in the scaler
    std::vector<SparseVec> multipliers;  // lambda of each surviving cut
    std::optional<std::string> failure;
};

/// The learned artifact: per-training-variation features and aggregation
/// multipliers, guarded by the constraint-matrix signature.
struct MultiplierStore {
    uint64_t matrix_signature = 0;
    Scaler scaler;
    std::vector<StoreEntry> entries;

    std::string to_json_string() const;
    static MultiplierStore from_json_string(const std::string& text);
    void save(const std::string& path) const;
    static MultiplierStore load(const std::string& path);
};

enum class SelectStrategy { closest, farthest, random };

std::string to_string(SelectStrategy s);
SelectStrategy strategy_from_string(const std::string& s);

FeatureVector features(const MilpInstance& inst);

Scaler fit_scaler(const std::vector<FeatureVector>& rows);

/// Entry indices by 2-norm distance on scaler-transformed features.
/// closest/farthest break ties by ascending entry index; random takes the
/// first k of a seeded Fisher-Yates shuffle.
std::vector<std::size_t> select_variation_indices(const MultiplierStore& store,
                                                  const FeatureVector& test, int k,
                                                  SelectStrategy strategy, uint64_t seed);

std::vector<std::string> select_variations(const MultiplierStore& store,
                                           const FeatureVector& test, int k,
                                           SelectStrategy strategy, uint64_t seed);

/// Runs cut collection on every training variation and records the
/// multipliers of the surviving cuts. Collection failures are recorded
/// per entry, not fatal; failed entries still feed the scaler. Variations
/// are independent and fan out across `jobs` threads.
MultiplierStore train_family(const std::vector<MilpInstance>& train_instances,
                             const CollectConfig& cfg = {}, int jobs = 1);

/// Replays the stored multipliers against the test system: each lambda is
/// aggregated with the test rhs, integral-beta multipliers contribute no
/// cut, duplicates collapse. Standard-space output in selection order.
std::vector<Cut> replay_multipliers(const MultiplierStore& store,
                                    const std::vector<std::size_t>& selected,
                                    const StandardFormMilp& sf_test);

/// Full prediction path: select variations, replay their multipliers and map
/// the cuts to original space.
std::vector<Cut> predict_cuts(const MultiplierStore& store, const MilpInstance& test, int k,
                              SelectStrategy strategy, uint64_t seed,
                              bool drop_dominated = false);

}  // namespace closure

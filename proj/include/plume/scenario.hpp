#pragma once

// Declarative scenario description driving the experiment pipeline. Two
// canonical presets: scenario 1 releases a single non-degradable species and
// discards empty observation intervals; scenario 2 releases a 0.34/0.66
// mixture whose second species degrades, and keeps every interval.

#include <cstdint>
#include <string>
#include <vector>

#include "plume/config.hpp"
#include "plume/features.hpp"
#include "plume/train.hpp"
#include "plume/types.hpp"

namespace plume {

enum class EstimatorKind { ratio, mlp, mean };

const char* estimator_kind_name(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string& name);

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::mlp;
    FeatureMask mask;  ///< features consumed by the mlp kind
};

struct ScenarioConfig {
    std::string name = "scenario-2";
    int scenario = 2;
    std::uint64_t seed = 1;

    TxConfig tx;
    SimParams sim;

    std::size_t rx_count = 1000;
    double rx_radius = 0.0;
    Vec3 rx_region_min;
    Vec3 rx_region_max;

    std::uint32_t window_length = 100;
    std::uint32_t t0_min = 100;
    std::uint32_t t0_max = 800;
    std::size_t n_windows = 10000;
    double train_fraction = 0.75;  // 3:1 split
    double epsilon = 1e-2;
    bool discard_empty = false;

    EstimatorSpec estimator;
    std::size_t hidden = 64;
    TrainConfig train;

    std::vector<double> sweep_values;  // degradation probabilities for sweeps
    std::string trajectory_path;       // optional externally supplied trajectories

    std::uint32_t n_steps() const { return t0_max + window_length; }

    void validate() const;
};

/// Built-in defaults for scenario 1 or 2 at the full protocol scale.
ScenarioConfig default_scenario(int which);

/// Overlays a key/value config onto the scenario defaults.
ScenarioConfig scenario_from_config(const KeyValueConfig& cfg);

}  // namespace plume

#include "plume/scenario.hpp"

#include <cmath>

#include "plume/errors.hpp"

namespace plume {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3 vec_from_list(const KeyValueConfig& cfg, const std::string& key, const Vec3& fallback) {
    if (!cfg.has(key)) return fallback;
    const std::vector<double> v = cfg.get_number_list(key);
    if (v.size() != 3) {
        throw ConfigError("key '" + key + "' must list exactly 3 numbers");
    }
    return {v[0], v[1], v[2]};
}

}  // namespace

const char* estimator_kind_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::ratio: return "ratio";
        case EstimatorKind::mlp: return "mlp";
        case EstimatorKind::mean: return "mean";
    }
    return "?";
}

EstimatorKind estimator_kind_from_string(const std::string& name) {
    if (name == "ratio") return EstimatorKind::ratio;
    if (name == "mlp") return EstimatorKind::mlp;
    if (name == "mean") return EstimatorKind::mean;
    throw ConfigError("unknown estimator '" + name + "' (expected ratio, mlp or mean)");
}

void ScenarioConfig::validate() const {
    if (scenario != 1 && scenario != 2) {
        throw ConfigError("scenario must be 1 or 2");
    }
    tx.validate();
    sim.validate();
    if (rx_count < 1 || !(rx_radius > 0.0)) {
        throw ConfigError("need at least one receiver with positive radius");
    }
    if (!(rx_region_min.x <= rx_region_max.x && rx_region_min.y <= rx_region_max.y &&
          rx_region_min.z <= rx_region_max.z)) {
        throw ConfigError("degenerate receiver region");
    }
    if (window_length < 1) {
        throw ConfigError("window_length must be >= 1");
    }
    if (t0_min > t0_max) {
        throw ConfigError("t0_min must not exceed t0_max");
    }
    if (n_windows < 1) {
        throw ConfigError("n_windows must be >= 1");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie in (0,1)");
    }
    if (!(epsilon > 0.0)) {
        throw ConfigError("epsilon must be positive");
    }
    if (scenario == 1 && tx.p1 != 1.0) {
        throw ConfigError("scenario 1 releases only species 1 (p1 must be 1)");
    }
}

ScenarioConfig default_scenario(int which) {
    ScenarioConfig c;
    c.scenario = which;
    c.name = which == 1 ? "scenario-1" : "scenario-2";

    c.tx.position = {0.0, 0.0, 0.0};
    c.tx.radius = 0.1 * kPi;
    c.tx.release_per_step = 4000;  // ~3.6M tracers over a full run
    c.tx.p1 = which == 1 ? 1.0 : 0.34;

    c.sim.dt = 1.0;
    c.sim.mean_wind = 0.25;
    c.sim.domain_min = {-0.25 * kPi, -1.5 * kPi, -1.5 * kPi};
    c.sim.domain_max = {7.0 * kPi, 1.5 * kPi, 1.5 * kPi};
    c.sim.p_deg = {0.0, which == 1 ? 0.0 : 0.03};
    c.sim.surrogate.sigma_u = 0.5 * c.sim.mean_wind;
    c.sim.surrogate.tau_L = 10.0 * c.sim.dt;
    c.sim.surrogate.meander_amp = 1.0 * c.sim.mean_wind;
    c.sim.surrogate.meander_tau = 50.0 * c.sim.dt;
    c.sim.seed = 1;

    c.rx_count = 1000;
    c.rx_radius = 0.1 * kPi;
    c.rx_region_min = {0.0, -1.5 * kPi, -1.5 * kPi};
    c.rx_region_max = {7.0 * kPi, 1.5 * kPi, 1.5 * kPi};

    c.discard_empty = which == 1;

    c.estimator.kind = EstimatorKind::mlp;
    c.estimator.mask = FeatureMask::all();
    if (which == 1) {
        // no second species: the abundance ratio carries nothing
        c.estimator.mask.bits &= static_cast<std::uint8_t>(
            ~(1u << static_cast<unsigned>(Feature::observed_ratio)));
    }

    c.seed = 1;
    c.train.seed = c.seed;
    return c;
}

ScenarioConfig scenario_from_config(const KeyValueConfig& cfg) {
    const int which = static_cast<int>(cfg.get_int("scenario", 2));
    ScenarioConfig c = default_scenario(which);

    c.name = cfg.get_string("name", c.name);
    c.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<std::int64_t>(c.seed)));

    c.tx.position = vec_from_list(cfg, "tx_position", c.tx.position);
    c.tx.radius = cfg.get_number("tx_radius", c.tx.radius);
    c.tx.release_per_step = static_cast<std::uint32_t>(
        cfg.get_int("release_per_step", c.tx.release_per_step));
    c.tx.p1 = cfg.get_number("p1", c.tx.p1);

    c.sim.dt = cfg.get_number("dt", c.sim.dt);
    const double default_wind = c.sim.mean_wind;
    c.sim.mean_wind = cfg.get_number("mean_wind", c.sim.mean_wind);
    c.sim.domain_min = vec_from_list(cfg, "domain_min", c.sim.domain_min);
    c.sim.domain_max = vec_from_list(cfg, "domain_max", c.sim.domain_max);
    c.sim.p_deg[0] = cfg.get_number("p_deg1", c.sim.p_deg[0]);
    c.sim.p_deg[1] = cfg.get_number("p_deg2", c.sim.p_deg[1]);
    // surrogate defaults scale with the wind and step actually configured
    c.sim.surrogate.sigma_u =
        cfg.get_number("sigma_u", 0.5 * (c.sim.mean_wind > 0 ? c.sim.mean_wind : default_wind));
    c.sim.surrogate.tau_L = cfg.get_number("tau_l", 10.0 * c.sim.dt);
    c.sim.surrogate.meander_amp = cfg.get_number(
        "meander_amp", 1.0 * (c.sim.mean_wind > 0 ? c.sim.mean_wind : default_wind));
    c.sim.surrogate.meander_tau = cfg.get_number("meander_tau", 50.0 * c.sim.dt);
    c.sim.seed = c.seed;

    c.rx_count = static_cast<std::size_t>(cfg.get_int("rx_count", static_cast<std::int64_t>(c.rx_count)));
    c.rx_radius = cfg.get_number("rx_radius", c.rx_radius);
    c.rx_region_min = vec_from_list(cfg, "rx_region_min", c.rx_region_min);
    c.rx_region_max = vec_from_list(cfg, "rx_region_max", c.rx_region_max);

    c.window_length = static_cast<std::uint32_t>(cfg.get_int("window_length", c.window_length));
    c.t0_min = static_cast<std::uint32_t>(cfg.get_int("t0_min", c.t0_min));
    c.t0_max = static_cast<std::uint32_t>(cfg.get_int("t0_max", c.t0_max));
    c.n_windows = static_cast<std::size_t>(cfg.get_int("n_windows", static_cast<std::int64_t>(c.n_windows)));
    c.train_fraction = cfg.get_number("train_fraction", c.train_fraction);
    c.epsilon = cfg.get_number("epsilon", c.epsilon);
    c.discard_empty = cfg.get_bool("discard_empty", c.discard_empty);

    c.estimator.kind = estimator_kind_from_string(
        cfg.get_string("estimator", estimator_kind_name(c.estimator.kind)));
    if (cfg.has("features")) {
        c.estimator.mask = mask_from_string(cfg.get_string("features", ""));
    }

    c.hidden = static_cast<std::size_t>(cfg.get_int("hidden", static_cast<std::int64_t>(c.hidden)));
    c.train.learning_rate = cfg.get_number("learning_rate", c.train.learning_rate);
    c.train.weight_decay = cfg.get_number("weight_decay", c.train.weight_decay);
    c.train.batch_size = static_cast<std::size_t>(
        cfg.get_int("batch_size", static_cast<std::int64_t>(c.train.batch_size)));
    c.train.max_epochs = static_cast<std::size_t>(
        cfg.get_int("max_epochs", static_cast<std::int64_t>(c.train.max_epochs)));
    c.train.patience = static_cast<std::size_t>(
        cfg.get_int("patience", static_cast<std::int64_t>(c.train.patience)));
    c.train.seed = c.seed;

    c.sweep_values = cfg.get_number_list("sweep_p_deg2");
    c.trajectory_path = cfg.get_string("trajectory", "");

    c.validate();
    return c;
}

}  // namespace plume

#include "plume/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <numeric>

#include <json.hpp>

#include "plume/errors.hpp"
#include "plume/train.hpp"

namespace plume {

namespace {

double sequential_mean(std::span<const double> v) {
    double sum = 0.0;
    for (double d : v) sum += d;
    return sum / static_cast<double>(v.size());
}

bool window_is_empty(const ObservationWindow& w) {
    for (std::uint32_t c : w.y1) {
        if (c != 0) return false;
    }
    for (std::uint32_t c : w.y2) {
        if (c != 0) return false;
    }
    return true;
}

}  // namespace

std::vector<RxConfig> place_receivers(const ScenarioConfig& cfg, RandomStream& rng) {
    std::vector<RxConfig> out;
    out.reserve(cfg.rx_count);
    const Vec3& lo = cfg.rx_region_min;
    const Vec3& hi = cfg.rx_region_max;
    for (std::size_t i = 0; i < cfg.rx_count; ++i) {
        RxConfig rx;
        rx.position = {rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y), rng.uniform(lo.z, hi.z)};
        rx.radius = cfg.rx_radius;
        out.push_back(rx);
    }
    return out;
}

SimArtifacts simulate_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    SimArtifacts art;
    RandomStream rx_rng(cfg.seed, StreamId::receivers);
    art.receivers = place_receivers(cfg, rx_rng);
    art.source = cfg.tx.position;

    const std::uint32_t table_steps = (cfg.t0_max - cfg.t0_min) + cfg.window_length;
    CountTableBuilder builder(art.receivers, cfg.t0_min, table_steps);
    VelocityFitAccumulator vacc;

    Simulator sim(cfg.tx, cfg.sim);
    art.sim = sim.run(cfg.n_steps(), [&](const TrajectorySnapshot& snap) {
        builder.add(snap);
        vacc.add_snapshot(snap, cfg.tx.position);
    });
    art.counts = builder.take();
    try {
        art.velocity = vacc.finish();
    } catch (const DataError&) {
        art.velocity = {};  // n == 0 marks the fit as unavailable
    }
    return art;
}

SimArtifacts artifacts_from_reader(const ScenarioConfig& cfg, io::SnapshotReader& reader) {
    SimArtifacts art;
    RandomStream rx_rng(cfg.seed, StreamId::receivers);
    art.receivers = place_receivers(cfg, rx_rng);
    art.source = reader.header().tx.position;

    const std::uint32_t table_steps = (cfg.t0_max - cfg.t0_min) + cfg.window_length;
    CountTableBuilder builder(art.receivers, cfg.t0_min, table_steps);
    VelocityFitAccumulator vacc;

    TrajectorySnapshot snap;
    std::uint32_t steps = 0;
    while (reader.next(snap)) {
        builder.add(snap);
        vacc.add_snapshot(snap, art.source);
        ++steps;
    }
    art.counts = builder.take();
    art.sim.steps = steps;
    try {
        art.velocity = vacc.finish();
    } catch (const DataError&) {
        art.velocity = {};
    }
    return art;
}

WindowSet build_dataset(const SimArtifacts& artifacts, const ScenarioConfig& cfg) {
    const CountTable& table = artifacts.counts;
    if (table.first_step > cfg.t0_min ||
        table.first_step + table.n_steps < cfg.t0_max + cfg.window_length) {
        throw DataError("build_dataset: count table does not cover the window range");
    }
    WindowSet set;
    set.windows.reserve(cfg.n_windows);
    RandomStream rng(cfg.seed, StreamId::dataset);
    const std::uint32_t t0_span = cfg.t0_max - cfg.t0_min + 1;
    for (std::size_t i = 0; i < cfg.n_windows; ++i) {
        const std::uint32_t rx_idx = rng.uniform_below(static_cast<std::uint32_t>(
            artifacts.receivers.size()));
        const std::uint32_t t0 = cfg.t0_min + rng.uniform_below(t0_span);
        ObservationWindow w = window_from_table(table, rx_idx, artifacts.receivers[rx_idx], t0,
                                                cfg.window_length, artifacts.source);
        ++set.drawn;
        if (cfg.discard_empty && window_is_empty(w)) {
            ++set.discarded;
            continue;
        }
        set.windows.push_back(std::move(w));
    }
    if (set.windows.empty()) {
        std::cerr << "warning: dataset is empty (" << set.drawn << " draws, " << set.discarded
                  << " discarded); no molecules reached the sampled receivers\n";
    }
    return set;
}

std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> split_indices(
    std::size_t n, double train_fraction, RandomStream& rng) {
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t i = n; i > 1; --i) {
        const std::uint32_t j = rng.uniform_below(static_cast<std::uint32_t>(i));
        std::swap(order[i - 1], order[j]);
    }
    std::size_t n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(n)));
    if (n >= 2) {
        n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    }
    std::vector<std::uint32_t> train(order.begin(), order.begin() + n_train);
    std::vector<std::uint32_t> test(order.begin() + n_train, order.end());
    return {std::move(train), std::move(test)};
}

PreparedExperiment prepare_experiment(const ScenarioConfig& cfg) {
    PreparedExperiment prep;
    prep.artifacts = simulate_scenario(cfg);
    prep.windows = build_dataset(prep.artifacts, cfg);
    RandomStream split_rng(cfg.seed, StreamId::split);
    auto [train, test] = split_indices(prep.windows.windows.size(), cfg.train_fraction, split_rng);
    prep.train_idx = std::move(train);
    prep.test_idx = std::move(test);
    return prep;
}

namespace {

RegressionDataset regression_subset(const WindowSet& set, std::span<const std::uint32_t> idx,
                                    FeatureMask mask, double epsilon) {
    RegressionDataset data;
    for (std::uint32_t i : idx) {
        const ObservationWindow& w = set.windows[i];
        const FeatureVector fv = build_feature_vector(w, mask, epsilon, /*apply_log=*/true);
        data.add_row(fv.values, w.true_distance);
    }
    return data;
}

}  // namespace

ExperimentReport run_estimator(const ScenarioConfig& cfg, const PreparedExperiment& prep,
                               const EstimatorSpec& spec) {
    const WindowSet& set = prep.windows;
    if (set.windows.size() < 2 || prep.test_idx.empty() || prep.train_idx.empty()) {
        throw DataError("run_estimator: not enough windows to train and evaluate");
    }

    ExperimentReport report;
    report.scenario_name = cfg.name;
    report.estimator = spec.kind;
    report.seed = cfg.seed;
    report.p_deg2 = cfg.sim.p_deg[1];
    report.windows_drawn = set.drawn;
    report.windows_discarded = set.discarded;
    report.n_train = prep.train_idx.size();
    report.n_test = prep.test_idx.size();
    report.velocity_scale = prep.artifacts.velocity.scale;
    report.velocity_r_squared = prep.artifacts.velocity.r_squared;

    report.truths.reserve(prep.test_idx.size());
    for (std::uint32_t i : prep.test_idx) {
        report.truths.push_back(set.windows[i].true_distance);
    }

    switch (spec.kind) {
        case EstimatorKind::mean: {
            const double mean = sequential_mean(report.truths);
            report.estimates.assign(report.truths.size(), mean);
            break;
        }
        case EstimatorKind::ratio: {
            if (prep.artifacts.velocity.n < 2) {
                throw DataError("ratio estimator: velocity calibration unavailable");
            }
            if (cfg.tx.p1 >= 1.0 || cfg.tx.p1 <= 0.0) {
                throw ConfigError("ratio estimator: both species must be released (0 < p1 < 1)");
            }
            RatioEstimatorParams params;
            params.velocity_scale = prep.artifacts.velocity.scale;
            params.release_ratio = cfg.tx.p2() / cfg.tx.p1;
            params.p_deg2 = cfg.sim.p_deg[1];
            double d_max = 0.0;
            for (std::uint32_t i : prep.train_idx) {
                d_max = std::max(d_max, set.windows[i].true_distance);
            }
            params.d_max = d_max;
            report.d_max = d_max;
            report.release_ratio = params.release_ratio;
            report.mask = FeatureMask::of({Feature::observed_ratio});
            report.estimates.reserve(prep.test_idx.size());
            for (std::uint32_t i : prep.test_idx) {
                const ObservationWindow& w = set.windows[i];
                const double r = observed_type_ratio(w.y1, w.y2, cfg.epsilon);
                report.estimates.push_back(estimate_distance_from_ratio(r, params));
            }
            break;
        }
        case EstimatorKind::mlp: {
            if (spec.mask.empty()) {
                throw ConfigError("mlp estimator: feature mask must not be empty");
            }
            report.mask = spec.mask;
            const RegressionDataset train_data =
                regression_subset(set, prep.train_idx, spec.mask, cfg.epsilon);
            TrainConfig tc = cfg.train;
            const TrainResult trained = train_mlp(train_data, spec.mask, tc, cfg.hidden);
            report.train_epochs = trained.epochs;
            report.train_best_loss = trained.best_loss;
            report.loss_curve = trained.model.train_loss;

            const RegressionDataset test_data =
                regression_subset(set, prep.test_idx, spec.mask, cfg.epsilon);
            report.estimates.resize(test_data.n);
            mlp_forward_batch(trained.model, test_data.features.data(), test_data.n,
                              report.estimates.data());
            break;
        }
    }

    report.chi = normalized_squared_error(report.estimates, report.truths);
    return report;
}

ExperimentReport run_experiment(const ScenarioConfig& cfg, const EstimatorSpec& spec) {
    const PreparedExperiment prep = prepare_experiment(cfg);
    return run_estimator(cfg, prep, spec);
}

std::vector<ExperimentReport> sweep_degradation(const ScenarioConfig& cfg,
                                                std::span<const double> p_deg2_values,
                                                std::span<const EstimatorSpec> specs) {
    std::vector<ExperimentReport> reports;
    reports.reserve(p_deg2_values.size() * specs.size());
    for (double p : p_deg2_values) {
        ScenarioConfig point = cfg;
        point.sim.p_deg[1] = p;
        const PreparedExperiment prep = prepare_experiment(point);
        for (const EstimatorSpec& spec : specs) {
            reports.push_back(run_estimator(point, prep, spec));
        }
    }
    return reports;
}

std::vector<ExperimentReport> feature_combination_study(const ScenarioConfig& cfg,
                                                        std::span<const FeatureMask> masks) {
    const PreparedExperiment prep = prepare_experiment(cfg);
    std::vector<ExperimentReport> reports;
    reports.reserve(masks.size());
    for (const FeatureMask& mask : masks) {
        reports.push_back(run_estimator(cfg, prep, EstimatorSpec{EstimatorKind::mlp, mask}));
    }
    return reports;
}

std::vector<FeatureMask> default_study_masks(const ScenarioConfig& cfg) {
    std::vector<FeatureMask> masks;
    const Feature signal_features[] = {Feature::mean_intensity, Feature::whiff_intensity,
                                       Feature::whiff_slope,    Feature::whiff_duration,
                                       Feature::blank_duration, Feature::intermittency};
    if (cfg.scenario == 1) {
        for (Feature a : signal_features) {
            masks.push_back(FeatureMask::of({a}));
        }
        for (std::size_t i = 0; i < std::size(signal_features); ++i) {
            for (std::size_t j = i + 1; j < std::size(signal_features); ++j) {
                masks.push_back(FeatureMask::of({signal_features[i], signal_features[j]}));
            }
        }
        FeatureMask all_signal;
        for (Feature a : signal_features) all_signal.set(a);
        masks.push_back(all_signal);
    } else {
        masks.push_back(FeatureMask::of({Feature::observed_ratio}));
        for (Feature a : signal_features) {
            masks.push_back(FeatureMask::of({Feature::observed_ratio, a}));
        }
        masks.push_back(FeatureMask::all());
    }
    return masks;
}

// --- serialization -----------------------------------------------------------

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string report_to_json(const ExperimentReport& r) {
    nlohmann::json j;
    j["scenario"] = r.scenario_name;
    j["estimator"] = estimator_kind_name(r.estimator);
    j["features"] = mask_to_string(r.mask);
    j["chi"] = r.chi;
    j["n_train"] = r.n_train;
    j["n_test"] = r.n_test;
    j["windows_drawn"] = r.windows_drawn;
    j["windows_discarded"] = r.windows_discarded;
    j["p_deg2"] = r.p_deg2;
    j["seed"] = r.seed;
    j["velocity_scale"] = r.velocity_scale;
    j["velocity_r_squared"] = r.velocity_r_squared;
    if (r.estimator == EstimatorKind::ratio) {
        j["d_max"] = r.d_max;
        j["release_ratio"] = r.release_ratio;
    }
    if (r.estimator == EstimatorKind::mlp) {
        j["train_epochs"] = r.train_epochs;
        j["train_best_loss"] = r.train_best_loss;
        j["train_loss"] = r.loss_curve;
    }
    j["true_distance"] = r.truths;
    j["estimated_distance"] = r.estimates;
    return j.dump(2);
}

void write_scatter_csv(std::ostream& out, const ExperimentReport& r) {
    out << "true_distance,estimated_distance\n";
    for (std::size_t i = 0; i < r.truths.size(); ++i) {
        out << format_double(r.truths[i]) << ',' << format_double(r.estimates[i]) << '\n';
    }
}

void write_sweep_csv(std::ostream& out, std::span<const ExperimentReport> reports) {
    out << "p_deg2,estimator,features,chi,n_test,velocity_scale\n";
    for (const ExperimentReport& r : reports) {
        out << format_double(r.p_deg2) << ',' << estimator_kind_name(r.estimator) << ",\""
            << mask_to_string(r.mask) << "\"," << format_double(r.chi) << ',' << r.n_test << ','
            << format_double(r.velocity_scale) << '\n';
    }
}

void write_grid_csv(std::ostream& out, std::span<const ExperimentReport> reports) {
    out << "features,chi,n_train,n_test\n";
    for (const ExperimentReport& r : reports) {
        out << '"' << mask_to_string(r.mask) << "\"," << format_double(r.chi) << ',' << r.n_train
            << ',' << r.n_test << '\n';
    }
}

void write_features_csv(std::ostream& out, std::span<const ObservationWindow> windows,
                        FeatureMask mask, double epsilon) {
    out << mask_to_string(mask) << ",true_distance\n";
    for (const ObservationWindow& w : windows) {
        const FeatureVector fv = build_feature_vector(w, mask, epsilon, /*apply_log=*/true);
        for (double v : fv.values) {
            out << format_double(v) << ',';
        }
        out << format_double(w.true_distance) << '\n';
    }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r' && c != '"') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_windows_csv(std::ostream& meta_out, std::ostream& counts_out, const WindowSet& set) {
    meta_out << "window,rx_x,rx_y,rx_z,rx_radius,t0,true_distance\n";
    counts_out << "window,offset,y1,y2\n";
    for (std::size_t i = 0; i < set.windows.size(); ++i) {
        const ObservationWindow& w = set.windows[i];
        meta_out << i << ',' << format_double(w.rx.position.x) << ','
                 << format_double(w.rx.position.y) << ',' << format_double(w.rx.position.z) << ','
                 << format_double(w.rx.radius) << ',' << w.t0_step << ','
                 << format_double(w.true_distance) << '\n';
        for (std::size_t l = 0; l < w.length(); ++l) {
            counts_out << i << ',' << l << ',' << w.y1[l] << ',' << w.y2[l] << '\n';
        }
    }
}

WindowSet read_windows_csv(std::istream& meta_in, std::istream& counts_in) {
    WindowSet set;
    std::string line;
    if (!std::getline(meta_in, line) || split_fields(line).size() != 7) {
        throw DataError("windows metadata: missing or malformed header row");
    }
    while (std::getline(meta_in, line)) {
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 7) {
            throw DataError("windows metadata: malformed row '" + line + "'");
        }
        ObservationWindow w;
        w.rx.position = {std::stod(f[1]), std::stod(f[2]), std::stod(f[3])};
        w.rx.radius = std::stod(f[4]);
        w.t0_step = static_cast<std::uint32_t>(std::stoul(f[5]));
        w.true_distance = std::stod(f[6]);
        if (static_cast<std::size_t>(std::stoul(f[0])) != set.windows.size()) {
            throw DataError("windows metadata: non-contiguous window ids");
        }
        set.windows.push_back(std::move(w));
    }
    if (!std::getline(counts_in, line) || split_fields(line).size() != 4) {
        throw DataError("window counts: missing or malformed header row");
    }
    while (std::getline(counts_in, line)) {
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 4) {
            throw DataError("window counts: malformed row '" + line + "'");
        }
        const std::size_t id = std::stoul(f[0]);
        if (id >= set.windows.size()) {
            throw DataError("window counts: unknown window id " + f[0]);
        }
        ObservationWindow& w = set.windows[id];
        if (std::stoul(f[1]) != w.y1.size()) {
            throw DataError("window counts: offsets out of order for window " + f[0]);
        }
        w.y1.push_back(static_cast<std::uint32_t>(std::stoul(f[2])));
        w.y2.push_back(static_cast<std::uint32_t>(std::stoul(f[3])));
    }
    set.drawn = set.windows.size();
    return set;
}

std::pair<RegressionDataset, FeatureMask> read_features_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("feature matrix: empty file");
    }
    auto names = split_fields(line);
    if (names.size() < 2 || names.back() != "true_distance") {
        throw DataError("feature matrix: header must end with true_distance");
    }
    names.pop_back();
    std::string joined;
    for (const std::string& n : names) {
        if (!joined.empty()) joined += ',';
        joined += n;
    }
    const FeatureMask mask = mask_from_string(joined);
    if (mask.count() != names.size()) {
        throw DataError("feature matrix: duplicate feature columns");
    }

    RegressionDataset data;
    std::vector<double> row(names.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != names.size() + 1) {
            throw DataError("feature matrix: malformed row '" + line + "'");
        }
        for (std::size_t i = 0; i < names.size(); ++i) {
            row[i] = std::stod(f[i]);
        }
        data.add_row(row, std::stod(f.back()));
    }
    return {std::move(data), mask};
}

}  // namespace plume

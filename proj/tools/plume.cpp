// Command-line front end for the plume distance-estimation toolkit.
//
// Subcommands mirror the pipeline stages: simulate, sample, features,
// calibrate, train, evaluate, sweep, study. Every invocation is deterministic
// for a fixed config and seed; outputs land in --out as report.json plus
// stage-specific CSV/binary files.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "plume/errors.hpp"
#include "plume/harness.hpp"
#include "plume/kernels.hpp"
#include "plume/train.hpp"
#include "plume/trajectory_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::int64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "scenario config file (key = value lines)")
        ->required();
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--out", args.out_dir, "output directory (created if missing)");
}

plume::ScenarioConfig load_scenario(const CommonArgs& args) {
    const plume::KeyValueConfig kv = plume::KeyValueConfig::parse_file(args.config_path);
    plume::ScenarioConfig cfg = plume::scenario_from_config(kv);
    if (args.seed) {
        cfg.seed = static_cast<std::uint64_t>(*args.seed);
        cfg.sim.seed = cfg.seed;
        cfg.train.seed = cfg.seed;
    }
    return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw plume::DataError("cannot open '" + path.string() + "' for writing");
    }
    out << content;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw plume::DataError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw plume::DataError("cannot open '" + path.string() + "' for reading");
    }
    return in;
}

plume::SimArtifacts make_artifacts(const plume::ScenarioConfig& cfg,
                                   const std::string& trajectory_override) {
    const std::string path =
        trajectory_override.empty() ? cfg.trajectory_path : trajectory_override;
    if (path.empty()) {
        return plume::simulate_scenario(cfg);
    }
    std::ifstream in = open_in(path);
    plume::io::SnapshotReader reader(in);
    return plume::artifacts_from_reader(cfg, reader);
}

json sweep_summary(const plume::ExperimentReport& r) {
    return json{{"p_deg2", r.p_deg2},
                {"estimator", plume::estimator_kind_name(r.estimator)},
                {"features", plume::mask_to_string(r.mask)},
                {"chi", r.chi},
                {"n_test", r.n_test},
                {"velocity_scale", r.velocity_scale}};
}

int cmd_simulate(const CommonArgs& args) {
    const plume::ScenarioConfig cfg = load_scenario(args);
    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);

    const plume::TrajectoryHeader header =
        plume::make_trajectory_header(cfg.tx, cfg.sim, cfg.n_steps());
    std::ofstream file = open_out(out_dir / "trajectory.plum");
    plume::io::SnapshotWriter writer(file, header);
    plume::Simulator sim(cfg.tx, cfg.sim);
    const plume::SimSummary summary = sim.run(
        cfg.n_steps(), [&writer](const plume::TrajectorySnapshot& s) { writer.write(s); });

    json report{{"command", "simulate"},
                {"scenario", cfg.name},
                {"seed", cfg.seed},
                {"n_steps", summary.steps},
                {"released", summary.total_released},
                {"degraded", summary.total_degraded},
                {"culled", summary.total_culled},
                {"final_alive", summary.final_alive},
                {"bytes_written", writer.bytes_written()},
                {"trajectory", "trajectory.plum"}};
    write_file(out_dir / "report.json", report.dump(2));
    return 0;
}

int cmd_sample(const CommonArgs& args, const std::string& trajectory) {
    const plume::ScenarioConfig cfg = load_scenario(args);
    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);

    const plume::SimArtifacts art = make_artifacts(cfg, trajectory);
    const plume::WindowSet set = plume::build_dataset(art, cfg);

    std::ofstream meta = open_out(out_dir / "windows_meta.csv");
    std::ofstream counts = open_out(out_dir / "windows.csv");
    plume::write_windows_csv(meta, counts, set);

    json report{{"command", "sample"},
                {"scenario", cfg.name},
                {"seed", cfg.seed},
                {"windows", set.windows.size()},
                {"windows_drawn", set.drawn},
                {"windows_discarded", set.discarded},
                {"velocity_scale", art.velocity.scale},
                {"velocity_r_squared", art.velocity.r_squared}};
    write_file(out_dir / "report.json", report.dump(2));
    return 0;
}

int cmd_features(const CommonArgs& args, const std::string& windows_dir) {
    const plume::ScenarioConfig cfg = load_scenario(args);
    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);
    const fs::path in_dir = windows_dir.empty() ? out_dir : fs::path(windows_dir);

    std::ifstream meta = open_in(in_dir / "windows_meta.csv");
    std::ifstream counts = open_in(in_dir / "windows.csv");
    const plume::WindowSet set = plume::read_windows_csv(meta, counts);

    const plume::FeatureMask mask = cfg.estimator.mask;
    std::ofstream out = open_out(out_dir / "features.csv");
    plume::write_features_csv(out, set.windows, mask, cfg.epsilon);

    json report{{"command", "features"},
                {"scenario", cfg.name},
                {"features", plume::mask_to_string(mask)},
                {"rows", set.windows.size()}};
    write_file(out_dir / "report.json", report.dump(2));
    return 0;
}

int cmd_calibrate(const CommonArgs& args, const std::string& trajectory) {
    const plume::ScenarioConfig cfg = load_scenario(args);
    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);

    const plume::SimArtifacts art = make_artifacts(cfg, trajectory);
    if (art.velocity.n < 2) {
        throw plume::DataError("calibrate: not enough particle observations for a velocity fit");
    }
    json report{{"command", "calibrate"},
                {"scenario", cfg.name},
                {"seed", cfg.seed},
                {"velocity_scale", art.velocity.scale},
                {"r_squared", art.velocity.r_squared},
                {"n_pairs", art.velocity.n}};
    write_file(out_dir / "report.json", report.dump(2));
    return 0;
}

int cmd_train(const CommonArgs& args, const std::string& features_path) {
    const plume::ScenarioConfig cfg = load_scenario(args);
    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);
    const fs::path in_path =
        features_path.empty() ? out_dir / "features.csv" : fs::path(features_path);

    std::ifstream in = open_in(in_path);
    auto [data, mask] = plume::read_features_csv(in);
    if (data.n < 2) {
        throw plume::DataError("train: need at least 2 samples");
    }

    plume::RandomStream split_rng(cfg.seed, plume::StreamId::split);
    const auto [train_idx, test_idx] =
        plume::split_indices(data.n, cfg.train_fraction, split_rng);

    plume::RegressionDataset train_data, test_data;
    for (std::uint32_t i : train_idx) {
        train_data.add_row({data.features.data() + static_cast<std::size_t>(i) * data.dim,
                            data.dim},
                           data.targets[i]);
    }
    for (std::uint32_t i : test_idx) {
        test_data.add_row({data.features.data() + static_cast<std::size_t>(i) * data.dim,
                           data.dim},
                          data.targets[i]);
    }

    const plume::TrainResult trained = plume::train_mlp(train_data, mask, cfg.train, cfg.hidden);
    std::vector<double> pred(test_data.n);
    plume::mlp_forward_batch(trained.model, test_data.features.data(), test_data.n, pred.data());
    const double chi = plume::normalized_squared_error(pred, test_data.targets);

    write_file(out_dir / "model.json",
               plume::model_to_json(trained.model, cfg.train, trained.best_loss));
    json report{{"command", "train"},
                {"scenario", cfg.name},
                {"seed", cfg.seed},
                {"features", plume::mask_to_string(mask)},
                {"epochs", trained.epochs},
                {"best_loss", trained.best_loss},
                {"chi", chi},
                {"n_train", train_data.n},
                {"n_test", test_data.n},
                {"train_loss", trained.model.train_loss}};
    write_file(out_dir / "report.json", report.dump(2));
    return 0;
}

int cmd_evaluate(const CommonArgs& args) {
    const plume::ScenarioConfig cfg = load_scenario(args);
    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);

    const plume::ExperimentReport report = plume::run_experiment(cfg, cfg.estimator);
    write_file(out_dir / "report.json", plume::report_to_json(report));
    std::ofstream scatter = open_out(out_dir / "scatter.csv");
    plume::write_scatter_csv(scatter, report);
    std::cerr << "chi = " << report.chi << " (" << plume::estimator_kind_name(report.estimator)
              << ", " << report.n_test << " test windows)\n";
    return 0;
}

int cmd_sweep(const CommonArgs& args) {
    const plume::ScenarioConfig cfg = load_scenario(args);
    if (cfg.sweep_values.empty()) {
        throw plume::ConfigError("sweep: config must list sweep_p_deg2 values");
    }
    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);

    const plume::EstimatorSpec spec = cfg.estimator;
    const std::vector<plume::ExperimentReport> reports =
        plume::sweep_degradation(cfg, cfg.sweep_values, {&spec, 1});

    std::ofstream csv = open_out(out_dir / "sweep.csv");
    plume::write_sweep_csv(csv, reports);
    json arr = json::array();
    for (const auto& r : reports) {
        arr.push_back(sweep_summary(r));
    }
    json report{{"command", "sweep"}, {"scenario", cfg.name}, {"seed", cfg.seed},
                {"sweep", std::move(arr)}};
    write_file(out_dir / "report.json", report.dump(2));
    return 0;
}

int cmd_study(const CommonArgs& args) {
    const plume::ScenarioConfig cfg = load_scenario(args);
    const fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);

    const std::vector<plume::FeatureMask> masks = plume::default_study_masks(cfg);
    const std::vector<plume::ExperimentReport> reports =
        plume::feature_combination_study(cfg, masks);

    std::ofstream csv = open_out(out_dir / "chi_grid.csv");
    plume::write_grid_csv(csv, reports);
    json arr = json::array();
    for (const auto& r : reports) {
        arr.push_back(json{{"features", plume::mask_to_string(r.mask)}, {"chi", r.chi}});
    }
    json report{{"command", "study"}, {"scenario", cfg.name}, {"seed", cfg.seed},
                {"grid", std::move(arr)}};
    write_file(out_dir / "report.json", report.dump(2));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"turbulent plume source-distance estimation toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string trajectory;
    std::string windows_dir;
    std::string features_path;

    CLI::App* simulate = app.add_subcommand("simulate", "run the plume simulation to a file");
    add_common(simulate, args);

    CLI::App* sample = app.add_subcommand("sample", "draw observation windows");
    add_common(sample, args);
    sample->add_option("--trajectory", trajectory, "read trajectories instead of simulating");

    CLI::App* features = app.add_subcommand("features", "compute the feature matrix");
    add_common(features, args);
    features->add_option("--windows", windows_dir, "directory holding the sampled windows");

    CLI::App* calibrate = app.add_subcommand("calibrate", "fit the velocity scale");
    add_common(calibrate, args);
    calibrate->add_option("--trajectory", trajectory, "read trajectories instead of simulating");

    CLI::App* train = app.add_subcommand("train", "train the learned estimator");
    add_common(train, args);
    train->add_option("--features", features_path, "feature matrix to train on");

    CLI::App* evaluate = app.add_subcommand("evaluate", "end-to-end experiment");
    add_common(evaluate, args);

    CLI::App* sweep = app.add_subcommand("sweep", "degradation-probability sweep");
    add_common(sweep, args);

    CLI::App* study = app.add_subcommand("study", "feature-combination study");
    add_common(study, args);

    CLI11_PARSE(app, argc, argv);

    const auto started = std::chrono::steady_clock::now();
    int rc = 0;
    try {
        if (simulate->parsed()) rc = cmd_simulate(args);
        else if (sample->parsed()) rc = cmd_sample(args, trajectory);
        else if (features->parsed()) rc = cmd_features(args, windows_dir);
        else if (calibrate->parsed()) rc = cmd_calibrate(args, trajectory);
        else if (train->parsed()) rc = cmd_train(args, features_path);
        else if (evaluate->parsed()) rc = cmd_evaluate(args);
        else if (sweep->parsed()) rc = cmd_sweep(args);
        else if (study->parsed()) rc = cmd_study(args);
    } catch (const std::exception& e) {
        json err{{"error", {{"message", e.what()}}}};
        std::cerr << err.dump() << '\n';
        return 1;
    }
    const auto elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cerr << "kernels=" << plume::kernels::active().name << " elapsed=" << elapsed << "s\n";
    return rc;
}

#pragma once

// Experiment pipeline: simulate (or ingest) trajectories, sample observation
// windows, compute features, fit or train an estimator, and score it on the
// held-out split. Reports are exactly reproducible from (config, seed).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "plume/metrics.hpp"
#include "plume/ratio_estimator.hpp"
#include "plume/receiver.hpp"
#include "plume/scenario.hpp"
#include "plume/simulate.hpp"
#include "plume/trajectory_io.hpp"

namespace plume {

/// Receivers drawn uniformly in the configured sampling cuboid.
std::vector<RxConfig> place_receivers(const ScenarioConfig& cfg, RandomStream& rng);

/// Everything one simulation pass produces for the estimators.
struct SimArtifacts {
    std::vector<RxConfig> receivers;
    CountTable counts;
    Vec3 source;           ///< ground-truth source position for distances
    VelocityFit velocity;  ///< n == 0 when a fit was impossible
    SimSummary sim;
};

SimArtifacts simulate_scenario(const ScenarioConfig& cfg);

/// Same artifacts from a stored trajectory stream; the container header is
/// authoritative for the source position.
SimArtifacts artifacts_from_reader(const ScenarioConfig& cfg, io::SnapshotReader& reader);

struct WindowSet {
    std::vector<ObservationWindow> windows;
    std::uint64_t drawn = 0;
    std::uint64_t discarded = 0;
};

/// Draws n_windows (receiver, start time) pairs and slices count windows.
/// When the scenario discards empty intervals, discarded draws are not
/// redrawn; the effective count is reported.
WindowSet build_dataset(const SimArtifacts& artifacts, const ScenarioConfig& cfg);

/// Disjoint, exhaustive, seeded split; sizes within one of the ratio.
std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> split_indices(
    std::size_t n, double train_fraction, RandomStream& rng);

struct ExperimentReport {
    std::string scenario_name;
    EstimatorKind estimator = EstimatorKind::mean;
    FeatureMask mask;
    double chi = 0.0;
    std::vector<double> truths;     ///< test-set true distances
    std::vector<double> estimates;  ///< test-set estimates, same order
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::uint64_t windows_drawn = 0;
    std::uint64_t windows_discarded = 0;
    double p_deg2 = 0.0;
    std::uint64_t seed = 0;
    double velocity_scale = 0.0;
    double velocity_r_squared = 0.0;
    double d_max = 0.0;
    double release_ratio = 0.0;
    std::size_t train_epochs = 0;
    double train_best_loss = 0.0;
    std::vector<double> loss_curve;
};

/// Simulation + windows + split; estimator-agnostic and reusable across
/// estimators on the same scenario.
struct PreparedExperiment {
    SimArtifacts artifacts;
    WindowSet windows;
    std::vector<std::uint32_t> train_idx;
    std::vector<std::uint32_t> test_idx;
};

PreparedExperiment prepare_experiment(const ScenarioConfig& cfg);

ExperimentReport run_estimator(const ScenarioConfig& cfg, const PreparedExperiment& prep,
                               const EstimatorSpec& spec);

ExperimentReport run_experiment(const ScenarioConfig& cfg, const EstimatorSpec& spec);

/// One experiment per (degradation probability, estimator); seeds are shared
/// so only the degradation differs between sweep points.
std::vector<ExperimentReport> sweep_degradation(const ScenarioConfig& cfg,
                                                std::span<const double> p_deg2_values,
                                                std::span<const EstimatorSpec> specs);

/// Learned-estimator error for each feature mask on one shared dataset.
std::vector<ExperimentReport> feature_combination_study(const ScenarioConfig& cfg,
                                                        std::span<const FeatureMask> masks);

/// The mask grid the study runs by default: single features and pairs (plus
/// the all-features combination) for scenario 1; the ratio feature alone,
/// paired with each other feature, and with all of them for scenario 2.
std::vector<FeatureMask> default_study_masks(const ScenarioConfig& cfg);

// --- deterministic serialization --------------------------------------------

/// Shortest round-trip decimal representation.
std::string format_double(double v);

std::string report_to_json(const ExperimentReport& report);

void write_scatter_csv(std::ostream& out, const ExperimentReport& report);
void write_sweep_csv(std::ostream& out, std::span<const ExperimentReport> reports);
void write_grid_csv(std::ostream& out, std::span<const ExperimentReport> reports);

/// Log-transformed feature matrix with the ground truth in the last column.
void write_features_csv(std::ostream& out, std::span<const ObservationWindow> windows,
                        FeatureMask mask, double epsilon);

/// Window datasets travel as a pair of CSV files: per-window metadata and the
/// count series in long form (one row per sampling offset).
void write_windows_csv(std::ostream& meta_out, std::ostream& counts_out, const WindowSet& set);
WindowSet read_windows_csv(std::istream& meta_in, std::istream& counts_in);

/// Reads a feature matrix back; the mask is reconstructed from the header.
std::pair<RegressionDataset, FeatureMask> read_features_csv(std::istream& in);

}  // namespace plume

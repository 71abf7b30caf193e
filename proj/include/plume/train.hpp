#pragma once

// Mini-batch AdamW training loop for the regression network, with decoupled
// weight decay, seeded epoch shuffling, and early stopping on the training
// loss. The best-loss model state is returned.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "plume/mlp.hpp"

namespace plume {

struct TrainConfig {
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;  ///< decoupled: w *= (1 - lr*decay) before each Adam step
    std::size_t batch_size = 200;
    std::size_t max_epochs = 1000;
    std::size_t patience = 10;  ///< stop after this many epochs without improvement
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct RegressionDataset {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> features;  // row-major n x dim
    std::vector<double> targets;   // n

    void add_row(std::span<const double> x, double target);
};

struct TrainResult {
    MlpModel model;  ///< best-loss state; train_loss holds the full epoch curve
    std::size_t epochs = 0;
    double best_loss = 0.0;
};

/// Trains a {dim, hidden, hidden, 1} network on pre-transformed features.
/// Throws TrainingError if the loss turns non-finite.
TrainResult train_mlp(const RegressionDataset& data, FeatureMask mask, const TrainConfig& config,
                      std::size_t hidden = 64);

/// Full-dataset mean squared error of the model on the given data.
double dataset_mse(const MlpModel& model, const RegressionDataset& data);

/// Versioned canonical-JSON model serialization (layer sizes, feature mask,
/// row-major weights, training config, final loss).
std::string model_to_json(const MlpModel& model, const TrainConfig& config, double final_loss);
MlpModel model_from_json(const std::string& text);

}  // namespace plume

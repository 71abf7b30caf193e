#pragma once

// Small fully connected regression network: affine/ReLU stacks with a scalar
// linear output. Forward, exact mean-squared-error gradients, and (de)serialization
// are hand-rolled on top of the kernel table.

#include <cstdint>
#include <span>
#include <vector>

#include "plume/features.hpp"

namespace plume {

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> w;  // row-major [out][in]
    std::vector<double> b;  // [out]
};

struct MlpModel {
    std::vector<std::size_t> layer_sizes;  // e.g. {F, 64, 64, 1}
    std::vector<DenseLayer> layers;
    FeatureMask mask;                 ///< features the model was trained on
    std::vector<double> train_loss;   ///< per-epoch training loss

    std::size_t input_dim() const { return layer_sizes.front(); }
    std::size_t parameter_count() const;
};

/// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases, drawn
/// from the init stream of the given seed.
MlpModel make_mlp(std::span<const std::size_t> layer_sizes, FeatureMask mask, std::uint64_t seed);

/// Single-sample forward pass. Throws DataError on dimension mismatch.
double mlp_forward(const MlpModel& model, std::span<const double> x);

/// Batched forward: X is row-major n x input_dim, out receives n predictions.
void mlp_forward_batch(const MlpModel& model, const double* X, std::size_t n, double* out);

struct MlpGradients {
    std::vector<std::vector<double>> w;  // same shapes as the model layers
    std::vector<std::vector<double>> b;

    explicit MlpGradients(const MlpModel& model);
    void clear();
};

/// Exact gradients of the batch-mean squared error with respect to every
/// weight and bias. Returns the batch loss.
double mlp_backward(const MlpModel& model, const double* X, const double* targets, std::size_t n,
                    MlpGradients& grads);

}  // namespace plume

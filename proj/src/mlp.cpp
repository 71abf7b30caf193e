#include "plume/mlp.hpp"

#include <cmath>

#include "plume/errors.hpp"
#include "plume/kernels.hpp"
#include "plume/rng.hpp"

namespace plume {

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const DenseLayer& l : layers) {
        n += l.w.size() + l.b.size();
    }
    return n;
}

MlpModel make_mlp(std::span<const std::size_t> layer_sizes, FeatureMask mask,
                  std::uint64_t seed) {
    if (layer_sizes.size() < 2) {
        throw ConfigError("make_mlp: need at least input and output layer sizes");
    }
    MlpModel model;
    model.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
    model.mask = mask;
    RandomStream rng(seed, StreamId::init);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        DenseLayer layer;
        layer.in = layer_sizes[l];
        layer.out = layer_sizes[l + 1];
        layer.w.resize(layer.in * layer.out);
        layer.b.assign(layer.out, 0.0);
        const double bound = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
        for (double& w : layer.w) {
            w = rng.uniform(-bound, bound);
        }
        model.layers.push_back(std::move(layer));
    }
    return model;
}

namespace {

/// Scratch activations for one sample: pre[l] holds layer l's pre-activation,
/// act[l] the post-ReLU values (act[0] aliases the input).
struct Workspace {
    std::vector<std::vector<double>> pre;    // per layer, size out
    std::vector<std::vector<double>> act;    // per layer, size out
    std::vector<std::vector<double>> delta;  // per layer, size out

    explicit Workspace(const MlpModel& model) {
        pre.resize(model.layers.size());
        act.resize(model.layers.size());
        delta.resize(model.layers.size());
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            pre[l].resize(model.layers[l].out);
            act[l].resize(model.layers[l].out);
            delta[l].resize(model.layers[l].out);
        }
    }
};

double forward_sample(const MlpModel& model, const double* x, Workspace& ws) {
    const auto& k = kernels::active();
    const double* input = x;
    const std::size_t last = model.layers.size() - 1;
    for (std::size_t l = 0; l <= last; ++l) {
        const DenseLayer& layer = model.layers[l];
        k.matvec(layer.w.data(), input, layer.b.data(), ws.pre[l].data(), layer.out, layer.in);
        if (l < last) {
            ws.act[l] = ws.pre[l];
            k.relu(ws.act[l].data(), layer.out);
            input = ws.act[l].data();
        }
    }
    return ws.pre[last][0];
}

}  // namespace

double mlp_forward(const MlpModel& model, std::span<const double> x) {
    if (x.size() != model.input_dim()) {
        throw DataError("mlp_forward: input has " + std::to_string(x.size()) +
                        " features, model expects " + std::to_string(model.input_dim()));
    }
    Workspace ws(model);
    return forward_sample(model, x.data(), ws);
}

void mlp_forward_batch(const MlpModel& model, const double* X, std::size_t n, double* out) {
    Workspace ws(model);
    const std::size_t dim = model.input_dim();
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = forward_sample(model, X + i * dim, ws);
    }
}

MlpGradients::MlpGradients(const MlpModel& model) {
    w.resize(model.layers.size());
    b.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        w[l].assign(model.layers[l].w.size(), 0.0);
        b[l].assign(model.layers[l].b.size(), 0.0);
    }
}

void MlpGradients::clear() {
    for (auto& g : w) g.assign(g.size(), 0.0);
    for (auto& g : b) g.assign(g.size(), 0.0);
}

double mlp_backward(const MlpModel& model, const double* X, const double* targets, std::size_t n,
                    MlpGradients& grads) {
    if (n == 0) {
        throw DataError("mlp_backward: empty batch");
    }
    if (model.layers.back().out != 1) {
        throw DataError("mlp_backward: scalar-output models only");
    }
    const auto& k = kernels::active();
    const std::size_t dim = model.input_dim();
    const std::size_t last = model.layers.size() - 1;
    Workspace ws(model);
    grads.clear();

    double loss_sum = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = X + i * dim;
        const double pred = forward_sample(model, x, ws);
        const double err = pred - targets[i];
        loss_sum += err * err;

        // d(mean squared error)/d(pred)
        ws.delta[last][0] = 2.0 * err * inv_n;
        for (std::size_t l = last; l + 1 > 0; --l) {
            const DenseLayer& layer = model.layers[l];
            const double* below = l == 0 ? x : ws.act[l - 1].data();
            for (std::size_t r = 0; r < layer.out; ++r) {
                const double d = ws.delta[l][r];
                if (d == 0.0) continue;
                k.axpy(grads.w[l].data() + r * layer.in, below, d, layer.in);
                grads.b[l][r] += d;
            }
            if (l == 0) break;
            // propagate: delta_below = (W^T delta) gated by the ReLU input sign
            auto& dbelow = ws.delta[l - 1];
            std::fill(dbelow.begin(), dbelow.end(), 0.0);
            for (std::size_t r = 0; r < layer.out; ++r) {
                const double d = ws.delta[l][r];
                if (d == 0.0) continue;
                k.axpy(dbelow.data(), layer.w.data() + r * layer.in, d, layer.in);
            }
            k.relu_grad(dbelow.data(), ws.pre[l - 1].data(), dbelow.size());
        }
    }
    return loss_sum * inv_n;
}

}  // namespace plume

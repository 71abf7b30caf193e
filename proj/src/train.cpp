#include "plume/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "plume/errors.hpp"
#include "plume/kernels.hpp"
#include "plume/rng.hpp"

namespace plume {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !(weight_decay >= 0.0) || !(eps > 0.0)) {
        throw ConfigError("TrainConfig: rates must be positive");
    }
    if (batch_size < 1 || max_epochs < 1) {
        throw ConfigError("TrainConfig: batch_size and max_epochs must be >= 1");
    }
    if (patience >= max_epochs) {
        throw ConfigError("TrainConfig: patience must be smaller than max_epochs");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0)) {
        throw ConfigError("TrainConfig: betas must lie in (0,1)");
    }
}

void RegressionDataset::add_row(std::span<const double> x, double target) {
    if (n == 0 && dim == 0) {
        dim = x.size();
    }
    if (x.size() != dim) {
        throw DataError("RegressionDataset: inconsistent feature dimension");
    }
    features.insert(features.end(), x.begin(), x.end());
    targets.push_back(target);
    ++n;
}

double dataset_mse(const MlpModel& model, const RegressionDataset& data) {
    std::vector<double> pred(data.n);
    mlp_forward_batch(model, data.features.data(), data.n, pred.data());
    double sum = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        const double e = pred[i] - data.targets[i];
        sum += e * e;
    }
    return sum / static_cast<double>(data.n);
}

namespace {

struct AdamState {
    std::vector<std::vector<double>> mw, vw, mb, vb;

    explicit AdamState(const MlpModel& model) {
        mw.resize(model.layers.size());
        vw.resize(model.layers.size());
        mb.resize(model.layers.size());
        vb.resize(model.layers.size());
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            mw[l].assign(model.layers[l].w.size(), 0.0);
            vw[l].assign(model.layers[l].w.size(), 0.0);
            mb[l].assign(model.layers[l].b.size(), 0.0);
            vb[l].assign(model.layers[l].b.size(), 0.0);
        }
    }
};

}  // namespace

TrainResult train_mlp(const RegressionDataset& data, FeatureMask mask, const TrainConfig& config,
                      std::size_t hidden) {
    config.validate();
    if (data.n == 0) {
        throw DataError("train_mlp: empty dataset");
    }
    const std::vector<std::size_t> sizes{data.dim, hidden, hidden, 1};
    MlpModel model = make_mlp(sizes, mask, config.seed);
    AdamState adam(model);
    MlpGradients grads(model);

    RandomStream shuffle_rng(config.seed, StreamId::shuffle);
    std::vector<std::uint32_t> order(data.n);
    std::iota(order.begin(), order.end(), 0u);

    const std::size_t batch = std::min(config.batch_size, data.n);
    std::vector<double> bx(batch * data.dim);
    std::vector<double> by(batch);

    const auto& k = kernels::active();
    const double decay_mul = 1.0 - config.learning_rate * config.weight_decay;

    MlpModel best = model;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t since_improve = 0;
    std::size_t adam_t = 0;
    std::size_t epoch = 0;

    for (; epoch < config.max_epochs; ++epoch) {
        // seeded Fisher-Yates reshuffle
        for (std::size_t i = data.n - 1; i > 0; --i) {
            const std::uint32_t j = shuffle_rng.uniform_below(static_cast<std::uint32_t>(i + 1));
            std::swap(order[i], order[j]);
        }

        for (std::size_t start = 0; start < data.n; start += batch) {
            const std::size_t m = std::min(batch, data.n - start);
            for (std::size_t i = 0; i < m; ++i) {
                const std::uint32_t row = order[start + i];
                std::copy_n(data.features.data() + static_cast<std::size_t>(row) * data.dim,
                            data.dim, bx.data() + i * data.dim);
                by[i] = data.targets[row];
            }
            const double batch_loss = mlp_backward(model, bx.data(), by.data(), m, grads);
            if (!std::isfinite(batch_loss)) {
                throw TrainingError("training diverged: non-finite batch loss at epoch " +
                                    std::to_string(epoch));
            }
            ++adam_t;
            const double bc1_inv =
                1.0 / (1.0 - std::pow(config.beta1, static_cast<double>(adam_t)));
            const double bc2_inv =
                1.0 / (1.0 - std::pow(config.beta2, static_cast<double>(adam_t)));
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                DenseLayer& layer = model.layers[l];
                k.adam_update(layer.w.data(), adam.mw[l].data(), adam.vw[l].data(),
                              grads.w[l].data(), layer.w.size(), config.learning_rate,
                              config.beta1, config.beta2, config.eps, bc1_inv, bc2_inv, decay_mul);
                k.adam_update(layer.b.data(), adam.mb[l].data(), adam.vb[l].data(),
                              grads.b[l].data(), layer.b.size(), config.learning_rate,
                              config.beta1, config.beta2, config.eps, bc1_inv, bc2_inv, decay_mul);
            }
        }

        const double epoch_loss = dataset_mse(model, data);
        if (!std::isfinite(epoch_loss)) {
            throw TrainingError("training diverged: non-finite epoch loss at epoch " +
                                std::to_string(epoch));
        }
        model.train_loss.push_back(epoch_loss);
        if (epoch_loss < best_loss) {
            best_loss = epoch_loss;
            best = model;
            since_improve = 0;
        } else {
            ++since_improve;
            if (since_improve >= config.patience) {
                ++epoch;
                break;
            }
        }
    }

    TrainResult result;
    best.train_loss = model.train_loss;  // keep the full curve with the best state
    result.model = std::move(best);
    result.epochs = epoch;
    result.best_loss = best_loss;
    return result;
}

namespace {

using nlohmann::json;

}  // namespace

std::string model_to_json(const MlpModel& model, const TrainConfig& config, double final_loss) {
    json j;
    j["format_version"] = 1;
    j["layer_sizes"] = model.layer_sizes;
    j["features"] = mask_to_string(model.mask);
    json layers = json::array();
    for (const DenseLayer& l : model.layers) {
        layers.push_back({{"in", l.in}, {"out", l.out}, {"w", l.w}, {"b", l.b}});
    }
    j["layers"] = std::move(layers);
    j["train_config"] = {{"learning_rate", config.learning_rate},
                         {"weight_decay", config.weight_decay},
                         {"batch_size", config.batch_size},
                         {"max_epochs", config.max_epochs},
                         {"patience", config.patience},
                         {"beta1", config.beta1},
                         {"beta2", config.beta2},
                         {"eps", config.eps},
                         {"seed", config.seed}};
    j["final_loss"] = final_loss;
    j["train_loss"] = model.train_loss;
    return j.dump(2);
}

MlpModel model_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("format_version").get<int>() != 1) {
        throw DataError("model file: unsupported format version");
    }
    MlpModel model;
    model.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    model.mask = mask_from_string(j.at("features").get<std::string>());
    for (const json& lj : j.at("layers")) {
        DenseLayer l;
        l.in = lj.at("in").get<std::size_t>();
        l.out = lj.at("out").get<std::size_t>();
        l.w = lj.at("w").get<std::vector<double>>();
        l.b = lj.at("b").get<std::vector<double>>();
        if (l.w.size() != l.in * l.out || l.b.size() != l.out) {
            throw DataError("model file: layer shape mismatch");
        }
        model.layers.push_back(std::move(l));
    }
    if (j.contains("train_loss")) {
        model.train_loss = j.at("train_loss").get<std::vector<double>>();
    }
    return model;
}

}  // namespace plume

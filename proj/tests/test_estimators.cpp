#include <doctest.h>

#include <cmath>
#include <vector>

#include "plume/errors.hpp"
#include "plume/metrics.hpp"
#include "plume/mlp.hpp"
#include "plume/ratio_estimator.hpp"
#include "plume/rng.hpp"
#include "plume/simulate.hpp"
#include "plume/train.hpp"

using namespace plume;

namespace {

RatioEstimatorParams default_params() {
    RatioEstimatorParams p;
    p.velocity_scale = 1.0;
    p.release_ratio = 0.66 / 0.34;
    p.p_deg2 = 0.03;
    p.d_max = 150.0;
    return p;
}

double param_ref(MlpModel& m, std::size_t flat) {
    // flat index over (w then b) of each layer, in order
    std::size_t off = flat;
    for (DenseLayer& l : m.layers) {
        if (off < l.w.size()) return l.w[off];
        off -= l.w.size();
        if (off < l.b.size()) return l.b[off];
        off -= l.b.size();
    }
    REQUIRE(false);
    return 0;
}

void param_set(MlpModel& m, std::size_t flat, double v) {
    std::size_t off = flat;
    for (DenseLayer& l : m.layers) {
        if (off < l.w.size()) { l.w[off] = v; return; }
        off -= l.w.size();
        if (off < l.b.size()) { l.b[off] = v; return; }
        off -= l.b.size();
    }
    REQUIRE(false);
}

double grad_ref(const MlpGradients& g, std::size_t flat) {
    std::size_t off = flat;
    for (std::size_t l = 0; l < g.w.size(); ++l) {
        if (off < g.w[l].size()) return g.w[l][off];
        off -= g.w[l].size();
        if (off < g.b[l].size()) return g.b[l][off];
        off -= g.b[l].size();
    }
    REQUIRE(false);
    return 0;
}

double batch_mse(const MlpModel& m, const std::vector<double>& X, const std::vector<double>& y,
                 std::size_t n) {
    std::vector<double> pred(n);
    mlp_forward_batch(m, X.data(), n, pred.data());
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = pred[i] - y[i];
        s += e * e;
    }
    return s / static_cast<double>(n);
}

// Smallest |pre-activation| across all hidden units and samples. Central
// differences are invalid across a ReLU kink, so gradient checks only use
// (model, batch) instances whose activations stay clear of zero.
double min_abs_preactivation(const MlpModel& m, const std::vector<double>& X, std::size_t n) {
    double min_abs = std::numeric_limits<double>::infinity();
    const std::size_t dim = m.input_dim();
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<double> act(X.begin() + s * dim, X.begin() + (s + 1) * dim);
        for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) {
            const DenseLayer& layer = m.layers[l];
            std::vector<double> next(layer.out);
            for (std::size_t r = 0; r < layer.out; ++r) {
                double z = layer.b[r];
                for (std::size_t c = 0; c < layer.in; ++c) {
                    z += layer.w[r * layer.in + c] * act[c];
                }
                min_abs = std::min(min_abs, std::fabs(z));
                next[r] = z > 0.0 ? z : 0.0;
            }
            act = std::move(next);
        }
    }
    return min_abs;
}

}  // namespace

TEST_CASE("ratio estimate: fixed examples and clamps") {
    const RatioEstimatorParams p = default_params();
    CHECK(estimate_distance_from_ratio(p.release_ratio, p) == 0.0);
    CHECK(estimate_distance_from_ratio(p.release_ratio * 2.0, p) == 0.0);  // clamped at 0

    // forward-inverse roundtrip at d = 100
    const double r = p.release_ratio * std::pow(0.97, 100.0);
    CHECK(estimate_distance_from_ratio(r, p) == doctest::Approx(100.0).epsilon(1e-12));

    RatioEstimatorParams small = p;
    small.d_max = 60.0;
    CHECK(estimate_distance_from_ratio(r, small) == 60.0);  // clamped at d_max
}

TEST_CASE("ratio estimate: exact roundtrip over 1000 random distances") {
    const RatioEstimatorParams p = default_params();
    RandomStream rng(101, StreamId::dataset);
    for (int i = 0; i < 1000; ++i) {
        const double d = rng.uniform(0.0, p.d_max);
        const double r = p.release_ratio * std::pow(1.0 - p.p_deg2, d / p.velocity_scale);
        const double est = estimate_distance_from_ratio(r, p);
        CHECK(std::fabs(est - d) <= 1e-10 * std::max(1.0, std::fabs(d)));
    }
}

TEST_CASE("ratio estimate: monotonically non-increasing in the observed ratio") {
    const RatioEstimatorParams p = default_params();
    RandomStream rng(103, StreamId::dataset);
    for (int i = 0; i < 300; ++i) {
        double a = std::exp(rng.uniform(-8.0, 3.0));
        double b = std::exp(rng.uniform(-8.0, 3.0));
        if (a > b) std::swap(a, b);
        CHECK(estimate_distance_from_ratio(a, p) >= estimate_distance_from_ratio(b, p));
        const double est = estimate_distance_from_ratio(a, p);
        CHECK(est >= 0.0);
        CHECK(est <= p.d_max);
    }
}

TEST_CASE("ratio estimate: domain and parameter errors") {
    RatioEstimatorParams p = default_params();
    CHECK_THROWS_AS(estimate_distance_from_ratio(0.0, p), DataError);
    CHECK_THROWS_AS(estimate_distance_from_ratio(-1.0, p), DataError);
    p.p_deg2 = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.p_deg2 = 1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = default_params();
    p.velocity_scale = -1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("velocity fit: closed-form slope on synthetic pairs") {
    VelocityFitAccumulator acc;
    for (int l = 1; l <= 50; ++l) {
        acc.add(l, 2.0 * l);
    }
    const VelocityFit fit = acc.finish();
    CHECK(fit.scale == 2.0);
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.n == 50);
}

TEST_CASE("velocity fit: requires at least two points") {
    VelocityFitAccumulator acc;
    CHECK_THROWS_AS(acc.finish(), DataError);
    acc.add(1.0, 2.0);
    CHECK_THROWS_AS(acc.finish(), DataError);
}

TEST_CASE("velocity fit: straight-line simulation recovers u*dt exactly") {
    TxConfig tx;
    tx.release_per_step = 20;
    tx.radius = 1e-12;
    SimParams params;
    params.mean_wind = 0.3;
    params.domain_min = {-1e9, -1e9, -1e9};
    params.domain_max = {1e9, 1e9, 1e9};
    params.seed = 7;
    Simulator sim(tx, params);
    const auto snaps = sim.run_collect(30);
    const VelocityFit fit = fit_velocity_scale(snaps, tx.position);
    CHECK(fit.scale == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(fit.r_squared >= 0.999);
}

TEST_CASE("velocity fit: full surrogate simulation stays close to linear") {
    TxConfig tx;
    tx.release_per_step = 60;
    tx.radius = 0.3;
    SimParams params;
    params.mean_wind = 0.25;
    params.domain_min = {-0.8, -4.8, -4.8};
    params.domain_max = {22.0, 4.8, 4.8};
    params.surrogate.sigma_u = 0.125;
    params.surrogate.tau_L = 10.0;
    params.surrogate.meander_amp = 0.12;
    params.surrogate.meander_tau = 50.0;
    params.seed = 11;
    Simulator sim(tx, params);
    VelocityFitAccumulator acc;
    sim.run(200, [&](const TrajectorySnapshot& s) { acc.add_snapshot(s, tx.position); });
    const VelocityFit fit = acc.finish();
    CHECK(fit.scale > 0.0);
    CHECK(fit.r_squared >= 0.8);
}

TEST_CASE("mlp forward: zero weights give zero output") {
    MlpModel m = make_mlp(std::vector<std::size_t>{3, 4, 4, 1}, FeatureMask::all(), 1);
    for (DenseLayer& l : m.layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    CHECK(mlp_forward(m, std::vector<double>{1.0, -2.0, 3.0}) == 0.0);
}

TEST_CASE("mlp forward: hand-computed single active path") {
    MlpModel m = make_mlp(std::vector<std::size_t>{1, 2, 2, 1}, FeatureMask::all(), 1);
    for (DenseLayer& l : m.layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    // x -> h0 = relu(2x+1), h1 stays 0; out = -0.5*relu(3*h0 - 2)
    m.layers[0].w[0] = 2.0;
    m.layers[0].b[0] = 1.0;
    m.layers[1].w[0] = 3.0;
    m.layers[1].b[0] = -2.0;
    m.layers[2].w[0] = -0.5;

    // x = 2: h0 = 5, z = 13, out = -6.5
    CHECK(mlp_forward(m, std::vector<double>{2.0}) == doctest::Approx(-6.5));
    // x = -1: h0 = relu(-1) = 0, z = relu(-2) = 0, out = 0
    CHECK(mlp_forward(m, std::vector<double>{-1.0}) == 0.0);

    CHECK_THROWS_AS(mlp_forward(m, std::vector<double>{1.0, 2.0}), DataError);
}

TEST_CASE("mlp forward: batched equals per-sample") {
    MlpModel m = make_mlp(std::vector<std::size_t>{4, 8, 8, 1}, FeatureMask::all(), 5);
    RandomStream rng(5, StreamId::dataset);
    const std::size_t n = 17;
    std::vector<double> X(n * 4);
    for (double& v : X) v = rng.uniform(-2, 2);
    std::vector<double> batched(n);
    mlp_forward_batch(m, X.data(), n, batched.data());
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(batched[i] == mlp_forward(m, std::span<const double>(X.data() + i * 4, 4)));
    }
}

TEST_CASE("mlp backward: zero gradients at a perfect fit") {
    MlpModel m = make_mlp(std::vector<std::size_t>{2, 5, 5, 1}, FeatureMask::all(), 9);
    RandomStream rng(9, StreamId::dataset);
    const std::size_t n = 6;
    std::vector<double> X(n * 2);
    for (double& v : X) v = rng.uniform(-1, 1);
    std::vector<double> y(n);
    mlp_forward_batch(m, X.data(), n, y.data());  // targets equal predictions

    MlpGradients g(m);
    const double loss = mlp_backward(m, X.data(), y.data(), n, g);
    CHECK(loss == 0.0);
    for (const auto& gw : g.w) {
        for (double v : gw) CHECK(v == 0.0);
    }
    for (const auto& gb : g.b) {
        for (double v : gb) CHECK(v == 0.0);
    }
}

TEST_CASE("mlp backward: analytic gradients match central finite differences") {
    RandomStream rng(13, StreamId::dataset);
    int accepted = 0;
    std::uint64_t model_seed = 1000;
    while (accepted < 8) {
        const std::size_t in = 1 + rng.uniform_below(4);
        const std::size_t h1 = 2 + rng.uniform_below(5);
        const std::size_t h2 = 2 + rng.uniform_below(5);
        MlpModel m =
            make_mlp(std::vector<std::size_t>{in, h1, h2, 1}, FeatureMask::all(), model_seed++);
        const std::size_t n = 1 + rng.uniform_below(6);
        std::vector<double> X(n * in), y(n);
        for (double& v : X) v = rng.uniform(-2, 2);
        for (double& v : y) v = rng.uniform(-2, 2);
        if (min_abs_preactivation(m, X, n) < 1e-3) {
            continue;  // a kink sits inside the difference stencil
        }
        ++accepted;

        MlpGradients g(m);
        mlp_backward(m, X.data(), y.data(), n, g);

        const double step = 1e-5;
        for (std::size_t p = 0; p < m.parameter_count(); ++p) {
            const double orig = param_ref(m, p);
            param_set(m, p, orig + step);
            const double lp = batch_mse(m, X, y, n);
            param_set(m, p, orig - step);
            const double lm = batch_mse(m, X, y, n);
            param_set(m, p, orig);
            const double fd = (lp - lm) / (2.0 * step);
            const double an = grad_ref(g, p);
            const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-6});
            CHECK(std::fabs(fd - an) / denom < 1e-4);
        }
    }
}

TEST_CASE("mlp backward: duplicating the batch leaves mean-loss gradients unchanged") {
    MlpModel m = make_mlp(std::vector<std::size_t>{2, 4, 4, 1}, FeatureMask::all(), 21);
    RandomStream rng(21, StreamId::dataset);
    const std::size_t n = 5;
    std::vector<double> X(n * 2), y(n);
    for (double& v : X) v = rng.uniform(-1, 1);
    for (double& v : y) v = rng.uniform(-1, 1);
    std::vector<double> X2 = X, y2 = y;
    X2.insert(X2.end(), X.begin(), X.end());
    y2.insert(y2.end(), y.begin(), y.end());

    MlpGradients g1(m), g2(m);
    const double l1 = mlp_backward(m, X.data(), y.data(), n, g1);
    const double l2 = mlp_backward(m, X2.data(), y2.data(), 2 * n, g2);
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
    for (std::size_t l = 0; l < g1.w.size(); ++l) {
        for (std::size_t i = 0; i < g1.w[l].size(); ++i) {
            CHECK(g1.w[l][i] == doctest::Approx(g2.w[l][i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("train: constant-target dataset converges to the constant") {
    RegressionDataset data;
    RandomStream rng(31, StreamId::dataset);
    for (int i = 0; i < 256; ++i) {
        const double x = rng.uniform(-1, 1);
        data.add_row(std::vector<double>{x}, 5.0);
    }
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.max_epochs = 1500;
    cfg.patience = 200;
    cfg.seed = 3;
    const TrainResult result = train_mlp(data, FeatureMask::of({Feature::mean_intensity}), cfg, 8);
    std::vector<double> pred(data.n);
    mlp_forward_batch(result.model, data.features.data(), data.n, pred.data());
    for (double p : pred) {
        CHECK(std::fabs(p - 5.0) < 0.05);  // within 1%
    }
}

TEST_CASE("train: learns a linear map z -> 3z + 1") {
    RegressionDataset train_data, test_data;
    RandomStream rng(37, StreamId::dataset);
    for (int i = 0; i < 1000; ++i) {
        const double z = rng.uniform(-2, 2);
        train_data.add_row(std::vector<double>{z}, 3.0 * z + 1.0);
    }
    double target_var = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double z = rng.uniform(-2, 2);
        test_data.add_row(std::vector<double>{z}, 3.0 * z + 1.0);
    }
    {
        double mean = 0.0;
        for (double t : test_data.targets) mean += t;
        mean /= test_data.n;
        for (double t : test_data.targets) target_var += (t - mean) * (t - mean);
        target_var /= test_data.n;
    }
    TrainConfig cfg;
    cfg.batch_size = 100;
    cfg.max_epochs = 300;
    cfg.patience = 20;
    cfg.seed = 11;
    const TrainResult result =
        train_mlp(train_data, FeatureMask::of({Feature::mean_intensity}), cfg, 16);
    const double mse = dataset_mse(result.model, test_data);
    CHECK(mse < 0.01 * target_var);
}

TEST_CASE("train: fixed seed gives bit-identical loss curves") {
    RegressionDataset data;
    RandomStream rng(41, StreamId::dataset);
    for (int i = 0; i < 300; ++i) {
        const double z = rng.uniform(-1, 1);
        data.add_row(std::vector<double>{z, z * z}, std::sin(z));
    }
    TrainConfig cfg;
    cfg.batch_size = 50;
    cfg.max_epochs = 40;
    cfg.patience = 39;
    cfg.seed = 4242;
    const FeatureMask mask = FeatureMask::of({Feature::mean_intensity, Feature::intermittency});
    const TrainResult a = train_mlp(data, mask, cfg, 8);
    const TrainResult b = train_mlp(data, mask, cfg, 8);
    REQUIRE(a.model.train_loss.size() == b.model.train_loss.size());
    for (std::size_t i = 0; i < a.model.train_loss.size(); ++i) {
        CHECK(a.model.train_loss[i] == b.model.train_loss[i]);
    }
}

TEST_CASE("train: decoupled weight decay shrinks weights on the first step") {
    RegressionDataset data;
    RandomStream rng(43, StreamId::dataset);
    for (int i = 0; i < 64; ++i) {
        const double z = rng.uniform(-1, 1);
        data.add_row(std::vector<double>{z}, 2.0 * z);
    }
    // one full-dataset batch per epoch, two epochs: exactly two optimizer steps
    TrainConfig with_decay;
    with_decay.batch_size = 64;
    with_decay.max_epochs = 2;
    with_decay.patience = 1;
    with_decay.weight_decay = 50.0;  // exaggerated so the decay term dominates
    with_decay.seed = 7;
    TrainConfig no_decay = with_decay;
    no_decay.weight_decay = 0.0;

    const FeatureMask mask = FeatureMask::of({Feature::mean_intensity});
    const TrainResult wd = train_mlp(data, mask, with_decay, 8);
    const TrainResult nd = train_mlp(data, mask, no_decay, 8);

    // identical seeds and data: the runs differ only by the decay multiplier
    double norm_wd = 0.0, norm_nd = 0.0;
    for (std::size_t l = 0; l < wd.model.layers.size(); ++l) {
        for (double v : wd.model.layers[l].w) norm_wd += v * v;
        for (double v : nd.model.layers[l].w) norm_nd += v * v;
    }
    CHECK(norm_wd < norm_nd);
}

TEST_CASE("train: initialization is reproducible and within the Glorot bound") {
    const std::vector<std::size_t> sizes{3, 8, 8, 1};
    MlpModel a = make_mlp(sizes, FeatureMask::all(), 99);
    MlpModel b = make_mlp(sizes, FeatureMask::all(), 99);
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        const double bound =
            std::sqrt(6.0 / static_cast<double>(a.layers[l].in + a.layers[l].out));
        for (std::size_t i = 0; i < a.layers[l].w.size(); ++i) {
            CHECK(a.layers[l].w[i] == b.layers[l].w[i]);
            CHECK(std::fabs(a.layers[l].w[i]) <= bound);
        }
        for (double bias : a.layers[l].b) CHECK(bias == 0.0);
    }
    const std::vector<double> x{0.5, -0.5, 1.0};
    CHECK(mlp_forward(a, x) == mlp_forward(b, x));
}

TEST_CASE("train: non-finite loss raises a diagnostic error") {
    RegressionDataset data;
    data.add_row(std::vector<double>{1e200}, 1e200);
    data.add_row(std::vector<double>{-1e200}, -1e200);
    TrainConfig cfg;
    cfg.batch_size = 2;
    cfg.max_epochs = 50;
    cfg.patience = 10;
    CHECK_THROWS_AS(train_mlp(data, FeatureMask::of({Feature::mean_intensity}), cfg, 8),
                    TrainingError);
}

TEST_CASE("model json serialization roundtrips") {
    MlpModel m = make_mlp(std::vector<std::size_t>{2, 4, 4, 1},
                          FeatureMask::of({Feature::observed_ratio, Feature::intermittency}), 17);
    m.train_loss = {2.0, 1.0, 0.5};
    TrainConfig cfg;
    const std::string text = model_to_json(m, cfg, 0.5);
    const MlpModel back = model_from_json(text);
    CHECK(back.layer_sizes == m.layer_sizes);
    CHECK(back.mask == m.mask);
    CHECK(back.train_loss == m.train_loss);
    REQUIRE(back.layers.size() == m.layers.size());
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        CHECK(back.layers[l].w == m.layers[l].w);
        CHECK(back.layers[l].b == m.layers[l].b);
    }
}

TEST_CASE("normalized squared error: identities and failure modes") {
    const std::vector<double> truths{1.0, 3.0};
    CHECK(normalized_squared_error(truths, truths) == 0.0);
    CHECK(normalized_squared_error(std::vector<double>{2.0, 2.0}, truths) == 1.0);

    // constant-mean estimates give exactly 1 on any sample set
    RandomStream rng(61, StreamId::dataset);
    std::vector<double> d(100);
    for (double& v : d) v = rng.uniform(0, 10);
    double mean = 0;
    for (double v : d) mean += v;
    mean /= d.size();
    const std::vector<double> mean_est(d.size(), mean);
    CHECK(normalized_squared_error(mean_est, d) == 1.0);

    CHECK_THROWS_AS(normalized_squared_error(std::vector<double>{1.0}, std::vector<double>{1.0}),
                    MetricError);
    CHECK_THROWS_AS(
        normalized_squared_error(std::vector<double>{1.0, 2.0}, std::vector<double>{5.0, 5.0}),
        MetricError);
    CHECK_THROWS_AS(
        normalized_squared_error(std::vector<double>{1.0, 2.0, 3.0}, std::vector<double>{1.0, 2.0}),
        MetricError);
}

TEST_CASE("normalized squared error: permutation invariance") {
    RandomStream rng(67, StreamId::dataset);
    const std::size_t n = 64;
    std::vector<double> est(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = rng.uniform(0, 10);
        est[i] = d[i] + rng.uniform(-1, 1);
    }
    const double base = normalized_squared_error(est, d);
    std::vector<double> est_p = est, d_p = d;
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::uint32_t j = rng.uniform_below(static_cast<std::uint32_t>(i + 1));
        std::swap(est_p[i], est_p[j]);
        std::swap(d_p[i], d_p[j]);
    }
    CHECK(normalized_squared_error(est_p, d_p) == doctest::Approx(base).epsilon(1e-12));
}

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "helpers.hpp"
#include "iic/decomp/decompose.hpp"
#include "iic/decomp/reconstruct.hpp"
#include "iic/errors.hpp"
#include "iic/xai/explain.hpp"

using namespace iic;

namespace {

core::MultimodalWindow hr_only_window(std::size_t t, double mean_bpm, double wiggle_bpm) {
    core::MultimodalWindow w;
    w.window_id = "hr_only";
    w.subject_id = "s0";
    w.sample_rate_hz = 1.0;
    core::Samples hr(t);
    for (std::size_t i = 0; i < t; ++i)
        hr[i] = mean_bpm + ((i % 2 == 0) ? wiggle_bpm : -wiggle_bpm);
    w.channels[core::Modality::HR] = std::move(hr);
    return w;
}

core::BaselineSet hr_baseline(double b) {
    core::BaselineSet bs;
    bs.b[core::Modality::HR] = b;
    return bs;
}

nn::ModelSpec affine_spec(std::size_t t, std::size_t channels) {
    nn::ModelSpec spec;
    spec.arch = nn::Arch::FCN;
    spec.num_layers = 0;
    spec.input_length = t;
    spec.input_channels = channels;
    spec.num_classes = 2;
    return spec;
}

/// Affine model whose second logit is alpha * (mean over all inputs - m0);
/// the first logit is zero.
nn::Model mean_threshold_model(std::size_t t, std::size_t channels, double alpha, double m0) {
    auto model = nn::Model::init(affine_spec(t, channels));
    const std::size_t n = t * channels;
    std::vector<double> flat;
    flat.reserve(2 * n + 2);
    for (std::size_t j = 0; j < n; ++j) {
        flat.push_back(0.0);
        flat.push_back(alpha / static_cast<double>(n));
    }
    flat.push_back(0.0);
    flat.push_back(-alpha * m0);
    model.set_parameters(flat);
    return model;
}

/// Constant-output model: zero weights, logits fixed at `bout`.
nn::Model constant_model(std::size_t t, std::size_t channels, double logit0, double logit1) {
    auto model = nn::Model::init(affine_spec(t, channels));
    std::vector<double> flat(2 * t * channels, 0.0);
    flat.push_back(logit0);
    flat.push_back(logit1);
    model.set_parameters(flat);
    return model;
}

nn::Model zero_fcn(std::size_t t, std::size_t channels) {
    nn::ModelSpec spec = affine_spec(t, channels);
    spec.num_layers = 1;
    spec.hidden_size = 8;
    auto model = nn::Model::init(spec);
    model.set_parameters(std::vector<double>(model.parameter_count(), 0.0));
    return model;
}

double mean_of(const decomp::WeightVector& w) {
    double s = 0.0;
    for (double v : w.w) s += v;
    return s / static_cast<double>(w.size());
}

} // namespace

TEST_SUITE("iic config and loss") {
    TEST_CASE("default config is valid") { xai::validate_config(xai::IICConfig{}); }

    TEST_CASE("broken configs are rejected") {
        xai::IICConfig cfg;
        cfg.epochs = 0;
        CHECK_THROWS_AS(xai::validate_config(cfg), InvalidConfig);
        cfg = {};
        cfg.lr = 0.0;
        CHECK_THROWS_AS(xai::validate_config(cfg), InvalidConfig);
        cfg = {};
        cfg.threshold = 1.5;
        CHECK_THROWS_AS(xai::validate_config(cfg), InvalidConfig);
        cfg = {};
        cfg.beta2 = 1.0;
        CHECK_THROWS_AS(xai::validate_config(cfg), InvalidConfig);
        cfg = {};
        cfg.penalty = -1.0;
        CHECK_THROWS_AS(xai::validate_config(cfg), InvalidConfig);
    }

    TEST_CASE("loss arithmetic") {
        xai::IICConfig cfg;
        auto ones = decomp::WeightVector::ones(4);

        auto parts = xai::loss(ones, 0.0, cfg);
        CHECK(parts.weights == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(parts.degradation == 0.0);
        CHECK(parts.total == doctest::Approx(1.0).epsilon(1e-12));

        parts = xai::loss(ones, cfg.max_deg, cfg);
        CHECK(parts.degradation == 0.0);

        parts = xai::loss(ones, 0.05, cfg);
        CHECK(parts.degradation == doctest::Approx(1.0).epsilon(1e-12));

        decomp::WeightVector w{{0.2, 0.4}};
        parts = xai::loss(w, 0.0, cfg);
        CHECK(parts.weights == doctest::Approx(0.3).epsilon(1e-12));

        CHECK_THROWS_AS(xai::loss(decomp::WeightVector{}, 0.0, cfg), DimensionMismatch);
    }
}

TEST_SUITE("iic degradation") {
    TEST_CASE("all-ones weights leave the output essentially unchanged") {
        const auto window = testing::random_window(3, 48);
        const auto bs = testing::typical_baselines();
        const auto cs = decomp::decompose(window, bs);
        nn::ModelSpec spec;
        spec.arch = nn::Arch::FCN;
        spec.hidden_size = 8;
        spec.input_length = 48;
        spec.input_channels = 4;
        spec.seed = 11;
        auto model = nn::Model::init(spec);

        const auto original = nn::forward(model, window);
        const double deg =
            xai::degradation(model, cs, decomp::WeightVector::ones(cs.dim()), original);
        CHECK(deg <= 1e-7);
    }

    TEST_CASE("input-ignoring model degrades by zero for any weights") {
        const auto window = testing::random_window(4, 32);
        const auto bs = testing::typical_baselines();
        const auto cs = decomp::decompose(window, bs);
        const auto model = constant_model(32, 4, 0.3, -0.2);
        const auto original = nn::forward(model, window);

        CHECK(xai::degradation(model, cs, decomp::WeightVector::zeros(cs.dim()), original) == 0.0);
        decomp::WeightVector w = decomp::WeightVector::ones(cs.dim());
        w.w[0] = 0.25;
        w.w[5] = 0.75;
        CHECK(xai::degradation(model, cs, w, original) == 0.0);
    }

    TEST_CASE("mean abs probability difference: (0.9,0.1) vs (0.7,0.3) gives 0.2") {
        const std::size_t t = 8;
        const auto window = hr_only_window(t, 80.0, 0.0);
        const auto cs = decomp::decompose(window, hr_baseline(70.0));

        const double a = std::log(0.9 / 0.1);
        const auto model = constant_model(t, 1, 0.0, std::log(0.7 / 0.3));
        nn::ModelOutput original;
        original.logits = {0.0, a};
        original.probs = {1.0 / (1.0 + std::exp(a)), 1.0 / (1.0 + std::exp(-a))};

        const double deg =
            xai::degradation(model, cs, decomp::WeightVector::ones(cs.dim()), original);
        CHECK(deg == doctest::Approx(0.2).epsilon(1e-9));

        const double mx = xai::degradation(model, cs, decomp::WeightVector::ones(cs.dim()),
                                           original, xai::DegStat::Max);
        CHECK(mx == doctest::Approx(0.2).epsilon(1e-9));
    }

    TEST_CASE("weight dimension is validated") {
        const auto window = testing::random_window(5, 16);
        const auto cs = decomp::decompose(window, testing::typical_baselines());
        const auto model = constant_model(16, 4, 0.0, 0.0);
        const auto original = nn::forward(model, window);
        CHECK_THROWS_AS(xai::degradation(model, cs, decomp::WeightVector::ones(3), original),
                        DimensionMismatch);
    }
}

TEST_SUITE("iic explain") {
    TEST_CASE("input-ignoring model drives every weight to zero") {
        const std::size_t t = 24;
        const auto window = testing::random_window(7, t);
        const auto bs = testing::typical_baselines();
        const auto model = zero_fcn(t, 4);

        xai::IICConfig cfg;
        const auto e = xai::explain(model, window, bs, cfg);

        REQUIRE(e.w.size() == 11);
        REQUIRE(e.component_names.size() == 11);
        CHECK(e.degradation_final == 0.0);
        for (std::size_t i = 0; i < e.w.size(); ++i) {
            CHECK(e.w[i] <= cfg.threshold);
            CHECK(!e.binary[i]);
        }
        CHECK(mean_of(e.w) < 1.0);

        // With zero degradation everywhere the optimizer sees the constant
        // gradient 1/d, so every coordinate follows the same hand-steppable
        // Adam path down to the clamp at zero.
        double theta = 1.0, m = 0.0, v = 0.0;
        const double g = 1.0 / 11.0;
        for (int k = 1; k <= cfg.epochs; ++k) {
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
            const double mhat = m / (1.0 - std::pow(cfg.beta1, k));
            const double vhat = v / (1.0 - std::pow(cfg.beta2, k));
            theta -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
            theta = std::clamp(theta, 0.0, 1.0);
        }
        for (std::size_t i = 0; i < e.w.size(); ++i)
            CHECK(e.w[i] == doctest::Approx(theta).epsilon(1e-12));

        // trace has one entry per epoch plus the final state, and the
        // weight term only ever decreases here
        REQUIRE(e.loss_trace.size() == static_cast<std::size_t>(cfg.epochs) + 1);
        CHECK(e.loss_trace.front().first == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t i = 1; i < e.loss_trace.size(); ++i) {
            CHECK(e.loss_trace[i].first <= e.loss_trace[i - 1].first + 1e-15);
            CHECK(e.loss_trace[i].second == 0.0);
        }
        CHECK(e.loss_trace.back().first == doctest::Approx(mean_of(e.w)).epsilon(1e-12));
    }

    TEST_CASE("five hand-stepped adam iterations match exactly") {
        const std::size_t t = 12;
        const auto window = hr_only_window(t, 78.0, 1.5);
        const auto bs = hr_baseline(70.0);
        const auto model = constant_model(t, 1, 0.4, -0.1);

        xai::IICConfig cfg;
        cfg.epochs = 5;
        const auto e = xai::explain(model, window, bs, cfg);
        REQUIRE(e.w.size() == 2); // heart rate contributes its two components

        double theta = 1.0, m = 0.0, v = 0.0;
        const double g = 0.5;
        for (int k = 1; k <= 5; ++k) {
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
            const double mhat = m / (1.0 - std::pow(cfg.beta1, k));
            const double vhat = v / (1.0 - std::pow(cfg.beta2, k));
            theta -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
            theta = std::clamp(theta, 0.0, 1.0);
        }
        // constant gradient makes each bias-corrected step exactly
        // lr * g / (g + eps), so theta = 1 - 5 * lr * g / (g + eps)
        CHECK(theta ==
              doctest::Approx(1.0 - 5.0 * cfg.lr * g / (g + cfg.eps)).epsilon(1e-12));
        CHECK(e.w[0] == doctest::Approx(theta).epsilon(1e-13));
        CHECK(e.w[1] == doctest::Approx(theta).epsilon(1e-13));
        REQUIRE(e.loss_trace.size() == 6);
    }

    TEST_CASE("only the discriminative component survives") {
        // Window carries its signal in the heart-rate mean: the model
        // thresholds mean(HR) at 70 while the window sits at 80 over a
        // baseline of 60, so zeroing HR.MeanOB flips the prediction.
        const std::size_t t = 12;
        const auto window = hr_only_window(t, 80.0, 2.0);
        const auto bs = hr_baseline(60.0);
        const auto model = mean_threshold_model(t, 1, 1.0, 70.0);
        const auto cs = decomp::decompose(window, bs);
        REQUIRE(cs.dim() == 2);
        const int i_mean = cs.index_of("HR.MeanOB");
        const int i_var = cs.index_of("HR.Variability");
        REQUIRE(i_mean >= 0);
        REQUIRE(i_var >= 0);

        xai::IICConfig cfg;
        const auto original = nn::forward(model, window);

        // independent oracle: exhaustive grid search over the weight square
        double best_loss = std::numeric_limits<double>::infinity();
        decomp::WeightVector best = decomp::WeightVector::ones(2);
        for (int a = 0; a <= 20; ++a) {
            for (int b = 0; b <= 20; ++b) {
                decomp::WeightVector w = decomp::WeightVector::ones(2);
                w.w[static_cast<std::size_t>(i_mean)] = a / 20.0;
                w.w[static_cast<std::size_t>(i_var)] = b / 20.0;
                const double deg = xai::degradation(model, cs, w, original);
                const double l = xai::loss(w, deg, cfg).total;
                if (l < best_loss) {
                    best_loss = l;
                    best = w;
                }
            }
        }
        CHECK(best.w[static_cast<std::size_t>(i_mean)] >= cfg.threshold);
        CHECK(best.w[static_cast<std::size_t>(i_var)] < cfg.threshold);

        const auto e = xai::explain(model, window, bs, cfg);
        CHECK(e.w[static_cast<std::size_t>(i_mean)] >= cfg.threshold);
        CHECK(e.w[static_cast<std::size_t>(i_var)] < cfg.threshold);
        CHECK(e.binary[static_cast<std::size_t>(i_mean)]);
        CHECK(!e.binary[static_cast<std::size_t>(i_var)]);
        CHECK(e.predicted_class == 1);
    }

    TEST_CASE("weights stay inside the unit box and reproduce bit-exactly") {
        const std::size_t t = 20;
        const auto window = testing::random_window(21, t);
        const auto bs = testing::typical_baselines();
        nn::ModelSpec spec;
        spec.arch = nn::Arch::FCN;
        spec.hidden_size = 12;
        spec.input_length = t;
        spec.input_channels = 4;
        spec.seed = 5;
        auto model = nn::Model::init(spec);

        xai::IICConfig cfg;
        cfg.epochs = 40;
        const auto e1 = xai::explain(model, window, bs, cfg);
        const auto e2 = xai::explain(model, window, bs, cfg);
        REQUIRE(e1.w.size() == e2.w.size());
        for (std::size_t i = 0; i < e1.w.size(); ++i) {
            CHECK(e1.w[i] >= 0.0);
            CHECK(e1.w[i] <= 1.0);
            CHECK(e1.w[i] == e2.w[i]);
        }
        CHECK(e1.degradation_final == e2.degradation_final);
        REQUIRE(e1.loss_trace.size() == e2.loss_trace.size());
        for (std::size_t i = 0; i < e1.loss_trace.size(); ++i) {
            CHECK(e1.loss_trace[i].first == e2.loss_trace[i].first);
            CHECK(e1.loss_trace[i].second == e2.loss_trace[i].second);
        }
        CHECK(mean_of(e1.w) <= 1.0);
        decomp::validate_weights(e1.w, e1.w.size());
    }

    TEST_CASE("non-finite loss aborts with the dedicated error") {
        const std::size_t t = 8;
        const auto window = hr_only_window(t, 80.0, 1.0);
        auto model = nn::Model::init(affine_spec(t, 1));
        std::vector<double> flat(model.parameter_count(), 0.0);
        for (std::size_t j = 0; j < 2 * t; ++j) flat[j] = 1e308;
        model.set_parameters(flat);

        xai::IICConfig cfg;
        cfg.representation = xai::Representation::Logits;
        CHECK_THROWS_AS(xai::explain(model, window, hr_baseline(70.0), cfg), NonFiniteLoss);
    }
}

TEST_SUITE("iic batch") {
    TEST_CASE("empty dataset yields no explanations") {
        core::Dataset ds;
        const auto model = constant_model(8, 1, 0.0, 0.0);
        const auto out = xai::batch_explain(model, ds, hr_baseline(70.0));
        CHECK(out.explanations.empty());
        CHECK(out.failures.empty());
    }

    TEST_CASE("duplicate windows explain identically and order is preserved") {
        const std::size_t t = 16;
        core::Dataset ds;
        auto w0 = testing::random_window(31, t);
        w0.window_id = "first";
        auto w1 = w0;
        w1.window_id = "second";
        auto w2 = testing::random_window(32, t);
        w2.window_id = "third";
        ds.windows = {w0, w1, w2};

        const auto model = zero_fcn(t, 4);
        xai::IICConfig cfg;
        cfg.epochs = 15;
        const auto out = xai::batch_explain(model, ds, testing::typical_baselines(), cfg);
        REQUIRE(out.explanations.size() == 3);
        CHECK(out.failures.empty());
        CHECK(out.explanations[0].window_id == "first");
        CHECK(out.explanations[1].window_id == "second");
        CHECK(out.explanations[2].window_id == "third");
        for (std::size_t i = 0; i < out.explanations[0].w.size(); ++i)
            CHECK(out.explanations[0].w[i] == out.explanations[1].w[i]);
    }

    TEST_CASE("per-window failures are collected without aborting the batch") {
        const std::size_t t = 16;
        core::Dataset ds;
        auto good = testing::random_window(41, t);
        good.window_id = "good";
        auto bad = testing::random_window(42, t);
        bad.window_id = "bad";
        bad.channels[core::Modality::HR][3] = -5.0;
        ds.windows = {good, bad};

        const auto model = zero_fcn(t, 4);
        xai::IICConfig cfg;
        cfg.epochs = 10;
        const auto out = xai::batch_explain(model, ds, testing::typical_baselines(), cfg);
        REQUIRE(out.explanations.size() == 1);
        REQUIRE(out.failures.size() == 1);
        CHECK(out.explanations[0].window_id == "good");
        CHECK(out.failures[0].window_id == "bad");
        CHECK(!out.failures[0].message.empty());
    }

    TEST_CASE("thread fan-out does not change any result") {
        const std::size_t t = 16;
        core::Dataset ds;
        for (int i = 0; i < 5; ++i) ds.windows.push_back(testing::random_window(50 + i, t));

        nn::ModelSpec spec;
        spec.arch = nn::Arch::FCN;
        spec.hidden_size = 8;
        spec.input_length = t;
        spec.input_channels = 4;
        spec.seed = 3;
        auto model = nn::Model::init(spec);

        xai::IICConfig cfg;
        cfg.epochs = 20;
        const auto serial = xai::batch_explain(model, ds, testing::typical_baselines(), cfg, 1);
        const auto fanned = xai::batch_explain(model, ds, testing::typical_baselines(), cfg, 3);
        REQUIRE(serial.explanations.size() == fanned.explanations.size());
        for (std::size_t i = 0; i < serial.explanations.size(); ++i) {
            CHECK(serial.explanations[i].window_id == fanned.explanations[i].window_id);
            for (std::size_t j = 0; j < serial.explanations[i].w.size(); ++j)
                CHECK(serial.explanations[i].w[j] == fanned.explanations[i].w[j]);
        }

        CHECK_THROWS_AS(xai::batch_explain(model, ds, testing::typical_baselines(), cfg, 0),
                        InvalidConfig);
    }
}

TEST_SUITE("iic json") {
    TEST_CASE("explanation serializes with full component maps") {
        const std::size_t t = 16;
        const auto window = testing::random_window(61, t);
        const auto model = zero_fcn(t, 4);
        xai::IICConfig cfg;
        cfg.epochs = 10;
        const auto e = xai::explain(model, window, testing::typical_baselines(), cfg);

        const std::string text = xai::explanation_to_json(e, cfg);
        const auto j = nlohmann::json::parse(text);
        CHECK(j.at("method") == "iic");
        CHECK(j.at("window_id") == e.window_id);
        CHECK(j.at("predicted_class") == e.predicted_class);
        CHECK(j.at("degradation_final") == doctest::Approx(e.degradation_final).epsilon(1e-12));
        REQUIRE(j.at("weights").size() == e.component_names.size());
        REQUIRE(j.at("binary").size() == e.component_names.size());
        for (std::size_t i = 0; i < e.component_names.size(); ++i) {
            const auto& name = e.component_names[i];
            CHECK(j.at("weights").at(name).get<double>() ==
                  doctest::Approx(e.w[i]).epsilon(1e-12));
            CHECK(j.at("binary").at(name).get<int>() == (e.binary[i] ? 1 : 0));
        }
        CHECK(j.at("config").at("epochs") == cfg.epochs);
        CHECK(j.at("config").at("threshold") == doctest::Approx(cfg.threshold).epsilon(1e-12));
        CHECK(j.at("config").at("deg_stat") == "mean");
        CHECK(j.at("config").at("representation") == "probs");
        CHECK(text.back() == '\n');
    }
}

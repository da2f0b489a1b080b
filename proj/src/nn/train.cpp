#include "iic/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "iic/core/numeric.hpp"
#include "iic/errors.hpp"

namespace iic::nn {

namespace {

int argmax(const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

struct Prepared {
    std::vector<Eigen::MatrixXd> inputs;
    std::vector<int> labels;
};

Prepared prepare(const core::Dataset& ds, const ModelSpec& spec, const char* which) {
    Prepared out;
    out.inputs.reserve(ds.windows.size());
    out.labels.reserve(ds.windows.size());
    for (const auto& w : ds.windows) {
        if (!w.label) {
            throw InvalidConfig(std::string("train: unlabeled window '") + w.window_id +
                                "' in " + which + " split");
        }
        auto x = window_to_matrix(w);
        if (x.rows() != spec.input_length || x.cols() != spec.input_channels) {
            throw ShapeMismatch(std::string(which) + " window '" + w.window_id +
                                "' does not match the model input shape");
        }
        out.inputs.push_back(std::move(x));
        out.labels.push_back(*w.label);
    }
    return out;
}

std::pair<double, double> dataset_loss(const Model& model, const Prepared& data) {
    std::vector<double> losses;
    losses.reserve(data.inputs.size());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.inputs.size(); ++i) {
        auto out = model.forward(data.inputs[i]);
        auto obj = cross_entropy_objective(data.labels[i]);
        losses.push_back(obj.value(out));
        if (argmax(out.probs) == data.labels[i]) ++correct;
    }
    const double loss = core::pairwise_mean(losses);
    const double acc = data.inputs.empty()
                           ? 0.0
                           : static_cast<double>(correct) / static_cast<double>(data.inputs.size());
    return {loss, acc};
}

struct InputScaling {
    Eigen::VectorXd shift, scale;
};

/// Per-channel mean/std over every train sample; degenerate channels keep
/// scale 1 so constant inputs pass through unchanged.
InputScaling fit_input_scaling(const Prepared& tr, const ModelSpec& spec) {
    InputScaling s;
    s.shift = Eigen::VectorXd::Zero(spec.input_channels);
    s.scale = Eigen::VectorXd::Ones(spec.input_channels);
    if (tr.inputs.empty()) return s;

    const double n =
        static_cast<double>(tr.inputs.size()) * static_cast<double>(spec.input_length);
    for (const auto& x : tr.inputs) s.shift += x.colwise().sum().transpose();
    s.shift /= n;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(spec.input_channels);
    for (const auto& x : tr.inputs) {
        var += (x.rowwise() - s.shift.transpose()).array().square().colwise().sum().matrix().transpose();
    }
    var /= n;
    for (Eigen::Index c = 0; c < var.size(); ++c) {
        if (var[c] > 1e-12) s.scale[c] = std::sqrt(var[c]);
    }
    return s;
}

struct RestartOutcome {
    std::vector<double> best_params;
    std::vector<EpochStats> history;
    int best_epoch = 0;
    double best_eval_loss = std::numeric_limits<double>::infinity();
};

RestartOutcome run_restart(const ModelSpec& spec, const Prepared& tr, const Prepared& ev,
                           const TrainConfig& cfg, int restart, const InputScaling& scaling) {
    ModelSpec rspec = spec;
    rspec.seed = spec.seed + static_cast<std::uint64_t>(restart);
    Model model = Model::init(rspec);
    model.set_input_scaling(scaling.shift, scaling.scale);

    std::mt19937_64 shuffle_rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(restart));
    auto params = model.parameters();
    AdamState adam;
    const AdamConfig adam_cfg{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps};

    RestartOutcome out;
    std::vector<std::size_t> order(tr.inputs.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grads(params.size());

    int since_best = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        std::vector<double> batch_losses;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::fill(grads.begin(), grads.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const auto i = order[k];
                auto obj = cross_entropy_objective(tr.labels[i]);
                batch_loss += model.objective_backward(tr.inputs[i], obj, nullptr, &grads);
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            batch_loss *= inv;
            for (auto& g : grads) g *= inv;
            if (!std::isfinite(batch_loss)) {
                throw DivergenceDetected("train: non-finite loss at epoch " +
                                         std::to_string(epoch));
            }
            adam_step(params, grads, adam, adam_cfg);
            model.set_parameters(params);
            batch_losses.push_back(batch_loss);
        }

        EpochStats st;
        st.train_loss = core::pairwise_mean(batch_losses);
        st.train_acc = dataset_loss(model, tr).second;
        std::tie(st.eval_loss, st.eval_acc) = dataset_loss(model, ev);
        out.history.push_back(st);

        if (st.eval_loss < out.best_eval_loss) {
            out.best_eval_loss = st.eval_loss;
            out.best_epoch = epoch;
            out.best_params = params;
            since_best = 0;
        } else {
            ++since_best;
            if (cfg.patience > 0 && since_best >= cfg.patience) break;
        }
    }
    return out;
}

} // namespace

std::pair<double, double> evaluate_loss(const Model& model, const core::Dataset& ds) {
    return dataset_loss(model, prepare(ds, model.spec(), "eval"));
}

TrainResult train(const ModelSpec& spec, const core::Dataset& train_ds,
                  const core::Dataset& eval_ds, const TrainConfig& cfg) {
    validate_spec(spec);
    if (cfg.lr <= 0.0 || cfg.epochs < 1 || cfg.batch_size < 1 || cfg.restarts < 1) {
        throw InvalidConfig("train: lr, epochs, batch_size and restarts must be positive");
    }
    if (train_ds.empty()) throw EmptyDataset("train: empty train split");
    if (eval_ds.empty()) throw EmptyDataset("train: empty eval split");

    auto tr = prepare(train_ds, spec, "train");
    auto ev = prepare(eval_ds, spec, "eval");

    std::vector<bool> seen(static_cast<std::size_t>(spec.num_classes), false);
    for (int y : tr.labels) {
        if (y < 0 || y >= spec.num_classes) {
            throw InvalidConfig("train: label " + std::to_string(y) + " outside num_classes");
        }
        seen[static_cast<std::size_t>(y)] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw InvalidConfig("train: some classes have no train-split examples");
    }

    const InputScaling scaling = fit_input_scaling(tr, spec);
    RestartOutcome best;
    int best_restart = 0;
    for (int r = 0; r < cfg.restarts; ++r) {
        auto out = run_restart(spec, tr, ev, cfg, r, scaling);
        if (out.best_eval_loss < best.best_eval_loss) {
            best = std::move(out);
            best_restart = r;
        }
    }

    ModelSpec bspec = spec;
    bspec.seed = spec.seed + static_cast<std::uint64_t>(best_restart);
    TrainResult result{Model::from_parameters(bspec, best.best_params), std::move(best.history),
                       best.best_epoch, best_restart, best.best_eval_loss};
    result.model.set_input_scaling(scaling.shift, scaling.scale);
    return result;
}

} // namespace iic::nn

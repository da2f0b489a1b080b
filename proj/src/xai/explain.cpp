#include "iic/xai/explain.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <optional>
#include <thread>

#include <json.hpp>

#include "iic/decomp/decompose.hpp"
#include "iic/decomp/reconstruct.hpp"
#include "iic/errors.hpp"
#include "iic/nn/adam.hpp"

namespace iic::xai {
namespace {

using decomp::ComponentSet;
using decomp::WeightVector;

const std::vector<double>& representation_of(const nn::ModelOutput& out, Representation rep) {
    return rep == Representation::Probs ? out.probs : out.logits;
}

/// |diff| collapsed per config; `grad` (optional) receives d(deg)/d(output).
double output_difference(const std::vector<double>& cur, const std::vector<double>& orig,
                         DegStat stat, std::vector<double>* grad) {
    const std::size_t k = cur.size();
    if (grad) grad->assign(k, 0.0);
    if (stat == DegStat::Mean) {
        double acc = 0.0;
        for (std::size_t i = 0; i < k; ++i) acc += std::abs(cur[i] - orig[i]);
        const double deg = acc / static_cast<double>(k);
        if (grad) {
            for (std::size_t i = 0; i < k; ++i) {
                const double diff = cur[i] - orig[i];
                (*grad)[i] = (diff > 0.0 ? 1.0 : diff < 0.0 ? -1.0 : 0.0) / static_cast<double>(k);
            }
        }
        return deg;
    }
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double a = std::abs(cur[i] - orig[i]);
        if (a > best) {
            best = a;
            arg = i;
        }
    }
    if (grad) {
        const double diff = cur[arg] - orig[arg];
        (*grad)[arg] = diff > 0.0 ? 1.0 : diff < 0.0 ? -1.0 : 0.0;
    }
    return best;
}

/// Objective whose value is the degradation of `out` against `original`.
nn::OutputObjective degradation_objective(const nn::ModelOutput& original, DegStat stat,
                                          Representation rep) {
    nn::OutputObjective obj;
    const std::vector<double> ref = representation_of(original, rep);
    obj.value = [ref, stat, rep](const nn::ModelOutput& out) {
        return output_difference(representation_of(out, rep), ref, stat, nullptr);
    };
    auto grad_fn = [ref, stat, rep](const nn::ModelOutput& out) {
        std::vector<double> g;
        output_difference(representation_of(out, rep), ref, stat, &g);
        return g;
    };
    if (rep == Representation::Probs)
        obj.grad_probs = grad_fn;
    else
        obj.grad_logits = grad_fn;
    return obj;
}

int argmax_class(const std::vector<double>& probs) {
    return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

Explanation explain_decomposed(const nn::Model& model, const ComponentSet& cs,
                               const nn::ModelOutput& original, const IICConfig& cfg) {
    const std::size_t d = cs.dim();
    Explanation e;
    e.window_id = cs.window_id;
    e.component_names = cs.names();
    e.predicted_class = argmax_class(original.probs);
    e.loss_trace.reserve(static_cast<std::size_t>(cfg.epochs) + 1);

    WeightVector w = WeightVector::ones(d);
    nn::AdamState adam;
    const nn::AdamConfig adam_cfg{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps};
    const nn::OutputObjective deg_obj =
        degradation_objective(original, cfg.deg_stat, cfg.representation);

    double deg = 0.0;
    for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
        const core::MultimodalWindow recon = decomp::reconstruct(cs, w);
        const nn::ModelOutput out = nn::forward(model, recon);
        deg = output_difference(representation_of(out, cfg.representation),
                                representation_of(original, cfg.representation), cfg.deg_stat,
                                nullptr);
        const LossParts parts = loss(w, deg, cfg);
        if (!std::isfinite(deg) || !std::isfinite(parts.total))
            throw NonFiniteLoss("weight optimization produced a non-finite loss at epoch " +
                                std::to_string(epoch) + " for window '" + cs.window_id + "'");
        e.loss_trace.emplace_back(parts.weights, parts.degradation);
        if (epoch == cfg.epochs) break;

        std::vector<double> grad(d, 1.0 / static_cast<double>(d));
        if (deg > cfg.max_deg) {
            const decomp::WindowGrad g_x = nn::input_gradient(model, recon, deg_obj);
            const std::vector<double> jvp = decomp::weight_jvp(cs, w, g_x);
            for (std::size_t i = 0; i < d; ++i) grad[i] += cfg.penalty * jvp[i];
        }
        nn::adam_step(w.w, grad, adam, adam_cfg);
        for (double& wi : w.w) wi = std::clamp(wi, 0.0, 1.0);
    }

    e.w = std::move(w);
    e.degradation_final = deg;
    e.binary.resize(d);
    for (std::size_t i = 0; i < d; ++i) e.binary[i] = e.w[i] >= cfg.threshold;
    return e;
}

} // namespace

void validate_config(const IICConfig& cfg) {
    if (cfg.epochs < 1) throw InvalidConfig("epochs must be >= 1");
    if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) throw InvalidConfig("lr must be positive");
    if (!(cfg.max_deg >= 0.0)) throw InvalidConfig("max_deg must be >= 0");
    if (!(cfg.penalty >= 0.0)) throw InvalidConfig("penalty must be >= 0");
    if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0))
        throw InvalidConfig("threshold must lie in [0, 1]");
    if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
        throw InvalidConfig("adam betas must lie in [0, 1)");
    if (!(cfg.eps > 0.0)) throw InvalidConfig("adam eps must be positive");
}

double degradation(const nn::Model& model, const ComponentSet& cs, const WeightVector& w,
                   const nn::ModelOutput& original, DegStat stat, Representation rep) {
    decomp::validate_weights(w, cs.dim());
    const nn::ModelOutput out = nn::forward(model, decomp::reconstruct(cs, w));
    return output_difference(representation_of(out, rep), representation_of(original, rep), stat,
                             nullptr);
}

LossParts loss(const WeightVector& w, double deg, const IICConfig& cfg) {
    if (w.size() == 0) throw DimensionMismatch("loss over an empty weight vector");
    LossParts parts;
    double acc = 0.0;
    for (double wi : w.w) acc += wi;
    parts.weights = acc / static_cast<double>(w.size());
    parts.degradation = cfg.penalty * std::max(0.0, deg - cfg.max_deg);
    parts.total = parts.weights + parts.degradation;
    return parts;
}

Explanation explain(const nn::Model& model, const core::MultimodalWindow& window,
                    const core::BaselineSet& baselines, const IICConfig& cfg) {
    validate_config(cfg);
    core::validate_window(window);
    const ComponentSet cs = decomp::decompose(window, baselines, cfg.decomp);
    const nn::ModelOutput original = nn::forward(model, window);
    return explain_decomposed(model, cs, original, cfg);
}

BatchResult batch_explain(const nn::Model& model, const core::Dataset& dataset,
                          const core::BaselineSet& baselines, const IICConfig& cfg, int jobs) {
    validate_config(cfg);
    if (jobs < 1) throw InvalidConfig("jobs must be >= 1");

    const std::size_t n = dataset.windows.size();
    std::vector<std::optional<Explanation>> slots(n);
    std::vector<std::optional<BatchFailure>> errors(n);

    auto run_one = [&](std::size_t i) {
        const core::MultimodalWindow& win = dataset.windows[i];
        try {
            slots[i] = explain(model, win, baselines, cfg);
        } catch (const std::exception& ex) {
            errors[i] = BatchFailure{win.window_id, ex.what()};
        }
    };

    const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run_one(i);
            });
        for (std::thread& th : pool) th.join();
    }

    BatchResult result;
    result.explanations.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (slots[i]) result.explanations.push_back(std::move(*slots[i]));
        if (errors[i]) result.failures.push_back(std::move(*errors[i]));
    }
    return result;
}

std::string explanation_to_json(const Explanation& e, const IICConfig& cfg) {
    nlohmann::ordered_json j;
    j["method"] = "iic";
    j["window_id"] = e.window_id;
    j["predicted_class"] = e.predicted_class;
    nlohmann::ordered_json weights;
    nlohmann::ordered_json binary;
    for (std::size_t i = 0; i < e.component_names.size(); ++i) {
        weights[e.component_names[i]] = e.w[i];
        binary[e.component_names[i]] = e.binary[i] ? 1 : 0;
    }
    j["weights"] = std::move(weights);
    j["binary"] = std::move(binary);
    j["degradation_final"] = e.degradation_final;
    j["config"] = {
        {"epochs", cfg.epochs},
        {"lr", cfg.lr},
        {"max_deg", cfg.max_deg},
        {"penalty", cfg.penalty},
        {"threshold", cfg.threshold},
        {"deg_stat", cfg.deg_stat == DegStat::Mean ? "mean" : "max"},
        {"representation", cfg.representation == Representation::Probs ? "probs" : "logits"},
    };
    return j.dump(2) + "\n";
}

} // namespace iic::xai

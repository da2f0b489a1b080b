#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "iic/decomp/component_set.hpp"
#include "iic/nn/model.hpp"

namespace iic::xai {

/// How the output difference between original and reconstructed inputs is
/// collapsed to a scalar.
enum class DegStat { Mean, Max };

/// Which model output the degradation compares.
enum class Representation { Probs, Logits };

struct IICConfig {
    int epochs = 200;
    double lr = 1e-2;
    double max_deg = 0.01;
    double penalty = 25.0;
    double threshold = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    DegStat deg_stat = DegStat::Mean;
    Representation representation = Representation::Probs;
    decomp::DecompConfig decomp;
};

/// Throws InvalidConfig.
void validate_config(const IICConfig& cfg);

struct LossParts {
    double weights = 0.0;      // mean(w)
    double degradation = 0.0;  // penalty * max(0, deg - max_deg)
    double total = 0.0;
};

struct Explanation {
    std::string window_id;
    std::vector<std::string> component_names;
    decomp::WeightVector w;
    std::vector<bool> binary; // w_i >= threshold
    double degradation_final = 0.0;
    int predicted_class = 0;
    /// (L_weights, L_degradation) for the weights entering each epoch, plus
    /// one final entry for the returned weights; the tail therefore matches
    /// degradation_final recomputed from `w`.
    std::vector<std::pair<double, double>> loss_trace;
};

/// Output difference between the model on the weighted reconstruction and
/// the cached original output.
double degradation(const nn::Model& model, const decomp::ComponentSet& cs,
                   const decomp::WeightVector& w, const nn::ModelOutput& original,
                   DegStat stat = DegStat::Mean, Representation rep = Representation::Probs);

LossParts loss(const decomp::WeightVector& w, double deg, const IICConfig& cfg);

/// Per-instance weight optimization: w starts at 1, runs exactly cfg.epochs
/// Adam steps on L = mean(w) + penalty * hinge(deg - max_deg), clamping to
/// [0,1] after every step. Deterministic given (model, window, cfg).
Explanation explain(const nn::Model& model, const core::MultimodalWindow& window,
                    const core::BaselineSet& baselines, const IICConfig& cfg = {});

struct BatchFailure {
    std::string window_id;
    std::string message;
};

struct BatchResult {
    std::vector<Explanation> explanations; // dataset order, failed windows omitted
    std::vector<BatchFailure> failures;
};

/// Independent per-window runs; failures are collected, not fatal. `jobs`
/// fans windows out across threads without changing any result.
BatchResult batch_explain(const nn::Model& model, const core::Dataset& dataset,
                          const core::BaselineSet& baselines, const IICConfig& cfg = {},
                          int jobs = 1);

/// `{window_id, predicted_class, weights, binary, degradation_final, config}`
/// with a `method: "iic"` tag; canonical field order.
std::string explanation_to_json(const Explanation& e, const IICConfig& cfg);

} // namespace iic::xai

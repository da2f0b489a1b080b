#include "iic/eval/masking.hpp"

#include <algorithm>

#include "iic/decomp/decompose.hpp"
#include "iic/decomp/reconstruct.hpp"
#include "iic/errors.hpp"

namespace iic::eval {
namespace {

int argmax(const std::vector<double>& p) {
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

void check_mask(const std::vector<bool>& mask, std::size_t dim) {
    if (mask.size() != dim)
        throw DimensionMismatch("mask length " + std::to_string(mask.size()) +
                                " != input dimension " + std::to_string(dim));
}

} // namespace

int WindowPredictor::predict(const core::MultimodalWindow& w) const { return argmax(probs(w)); }

std::vector<double> NnPredictor::probs(const core::MultimodalWindow& w) const {
    return nn::forward(*model_, w).probs;
}

std::vector<double> LcbmPredictor::probs(const core::MultimodalWindow& w) const {
    const auto cs = decomp::decompose(w, baselines_, model_->decomp);
    return model_->predict_probs(baselines::concept_vector(cs).values);
}

std::vector<double> FcshapPredictor::probs(const core::MultimodalWindow& w) const {
    return model_->predict_probs(baselines::stat_features(w).values);
}

IicMasker::IicMasker(const nn::Model& model, const core::BaselineSet& baselines,
                     std::vector<std::string> component_names, decomp::DecompConfig cfg)
    : model_(&model), baselines_(baselines), names_(std::move(component_names)), cfg_(cfg) {}

int IicMasker::predict_masked(const core::MultimodalWindow& w,
                              const std::vector<bool>& mask) const {
    check_mask(mask, names_.size());
    const auto cs = decomp::decompose(w, baselines_, cfg_);
    if (cs.names() != names_)
        throw DimensionMismatch("window '" + w.window_id +
                                "' decomposes into a different component set");
    decomp::WeightVector weights = decomp::WeightVector::ones(cs.dim());
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) weights.w[i] = 0.0;
    return argmax(nn::forward(*model_, decomp::reconstruct(cs, weights)).probs);
}

int LcbmMasker::predict_masked(const core::MultimodalWindow& w,
                               const std::vector<bool>& mask) const {
    check_mask(mask, dim());
    const auto cs = decomp::decompose(w, baselines_, model_->decomp);
    std::vector<double> concepts = baselines::concept_vector(cs).values;
    if (concepts.size() != dim())
        throw DimensionMismatch("window '" + w.window_id +
                                "' decomposes into a different concept set");
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) concepts[i] = model_->concept_train_means[i];
    return argmax(model_->predict_probs(concepts));
}

int FcshapMasker::predict_masked(const core::MultimodalWindow& w,
                                 const std::vector<bool>& mask) const {
    check_mask(mask, dim());
    std::vector<double> features = baselines::stat_features(w).values;
    if (features.size() != dim())
        throw DimensionMismatch("window '" + w.window_id + "' yields a different feature set");
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) features[i] = model_->feature_train_means[i];
    return argmax(model_->predict_probs(features));
}

ClassificationMetrics evaluate_classifier(const WindowPredictor& predictor,
                                          const core::Dataset& ds, int num_classes) {
    if (ds.windows.empty()) throw EmptyEval("no windows to score");
    std::vector<int> y_true, y_pred;
    y_true.reserve(ds.windows.size());
    y_pred.reserve(ds.windows.size());
    for (const auto& w : ds.windows) {
        if (!w.label) throw InvalidConfig("window '" + w.window_id + "' has no label");
        y_true.push_back(*w.label);
        y_pred.push_back(predictor.predict(w));
    }
    return classification_metrics(y_true, y_pred, num_classes);
}

} // namespace iic::eval

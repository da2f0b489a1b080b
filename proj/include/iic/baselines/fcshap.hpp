#pragma once

#include <string>
#include <vector>

#include "iic/baselines/features.hpp"
#include "iic/baselines/shapley.hpp"
#include "iic/core/types.hpp"
#include "iic/nn/train.hpp"

namespace iic::baselines {

struct FcshapConfig {
    int hidden_size = 32;
    int num_layers = 1;
    nn::TrainConfig train;
};

/// Fully connected classifier over standardized statistical features,
/// explained post hoc with exact Shapley values.
struct FcshapModel {
    std::vector<std::string> feature_names;
    Standardizer standardizer;
    std::vector<double> feature_train_means; // raw scale, masking baseline
    nn::Model model;

    std::vector<double> predict_probs(const std::vector<double>& raw_features) const;
    int predict(const std::vector<double>& raw_features) const;

    /// Shapley attribution of the predicted-class probability, masking
    /// toward the train-mean feature vector.
    ShapleyAttribution shapley(const std::vector<double>& raw_features) const;
};

FcshapModel fcshap_fit(const core::Dataset& train, const core::Dataset& eval,
                       const FcshapConfig& cfg = {});

std::vector<RankedImportance> global_importances(const std::vector<ShapleyAttribution>& attrs,
                                                 const std::vector<std::string>& names);

} // namespace iic::baselines

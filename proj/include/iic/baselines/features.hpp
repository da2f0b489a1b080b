#pragma once

#include <string>
#include <vector>

#include "iic/core/types.hpp"
#include "iic/decomp/component_set.hpp"

namespace iic::baselines {

/// One scalar per decomposition component: scalar components pass through,
/// series components are summarized by their time-axis mean. Names follow
/// the fixed component order.
struct ConceptVector {
    std::vector<std::string> names;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

ConceptVector concept_vector(const decomp::ComponentSet& cs);

/// Mean/min/max/std per modality (population std), named "HR.Max" etc.,
/// modalities in enum order.
struct StatFeatureVector {
    std::vector<std::string> names;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

StatFeatureVector stat_features(const core::MultimodalWindow& w);

/// Per-feature affine scaling fit on the train split only. Zero-variance
/// features are passed through centered (scale treated as 1) and flagged so
/// downstream fits can pin their coefficients.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev; // 0 marks a zero-variance feature

    std::size_t size() const { return mean.size(); }
    std::vector<double> transform(const std::vector<double>& x) const;
};

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows);

} // namespace iic::baselines

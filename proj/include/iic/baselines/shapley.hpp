#pragma once

#include <functional>
#include <string>
#include <vector>

namespace iic::baselines {

struct ShapleyAttribution {
    std::vector<double> phi;
    double base_value = 0.0; // f at the all-masked point
};

/// Scalar-valued function over a raw feature vector (typically the
/// predicted-class probability of a classifier).
using FeatureFunction = std::function<double(const std::vector<double>&)>;

/// Exact Shapley values by full coalition enumeration: features outside the
/// coalition are replaced by `baseline`. Satisfies efficiency exactly
/// (sum(phi) = f(x) - f(baseline)); deterministic mask order. Throws
/// TooManyFeatures beyond 20 features, DimensionMismatch on size mismatch.
ShapleyAttribution exact_shapley(const FeatureFunction& f, const std::vector<double>& x,
                                 const std::vector<double>& baseline);

struct RankedImportance {
    std::string name;
    double value = 0.0;
};

/// Sorted descending; ties keep the incoming (fixed component) order.
std::vector<RankedImportance> ranked_importances(const std::vector<std::string>& names,
                                                 const std::vector<double>& values);

/// Mean |phi| per feature over a set of attributions, normalized to sum 1
/// (left at zero when every attribution is zero).
std::vector<double> mean_abs_phi(const std::vector<ShapleyAttribution>& attributions,
                                 std::size_t num_features);

/// Local/global importances rendered in the shared explanation JSON schema:
/// `{method, window_id, predicted_class, weights, binary, degradation_final,
/// config}` where binary marks values >= threshold.
std::string attribution_to_json(const std::string& method, const std::string& window_id,
                                int predicted_class, const std::vector<std::string>& names,
                                const std::vector<double>& values, double threshold);

} // namespace iic::baselines

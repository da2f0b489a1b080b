#include "iic/baselines/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>

#include <json.hpp>

#include "iic/core/numeric.hpp"
#include "iic/errors.hpp"

namespace iic::baselines {
namespace {

constexpr std::size_t kMaxFeatures = 20;

// exact up to 20! (fits in unsigned 64-bit)
long double factorial(unsigned n) {
    unsigned long long f = 1;
    for (unsigned i = 2; i <= n; ++i) f *= i;
    return static_cast<long double>(f);
}

} // namespace

ShapleyAttribution exact_shapley(const FeatureFunction& f, const std::vector<double>& x,
                                 const std::vector<double>& baseline) {
    const std::size_t n = x.size();
    if (baseline.size() != n)
        throw DimensionMismatch("feature vector and masking baseline differ in length");
    if (n == 0) throw DimensionMismatch("no features to attribute");
    if (n > kMaxFeatures)
        throw TooManyFeatures("exact enumeration is capped at " + std::to_string(kMaxFeatures) +
                              " features (" + std::to_string(n) +
                              " given); use a sampling approximation instead");

    // cache v(S) for every coalition; bit i set = feature i kept from x
    const std::uint32_t full = (1u << n) - 1u;
    std::vector<double> v(static_cast<std::size_t>(full) + 1);
    std::vector<double> probe(n);
    for (std::uint32_t mask = 0; mask <= full; ++mask) {
        for (std::size_t i = 0; i < n; ++i)
            probe[i] = (mask >> i) & 1u ? x[i] : baseline[i];
        v[mask] = f(probe);
    }

    std::vector<long double> weight(n);
    const long double fact_n = factorial(static_cast<unsigned>(n));
    for (std::size_t s = 0; s < n; ++s)
        weight[s] = factorial(static_cast<unsigned>(s)) *
                    factorial(static_cast<unsigned>(n - s - 1)) / fact_n;

    ShapleyAttribution out;
    out.base_value = v[0];
    out.phi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t bit = 1u << i;
        long double acc = 0.0L;
        for (std::uint32_t mask = 0; mask <= full; ++mask) {
            if (mask & bit) continue;
            const unsigned s = static_cast<unsigned>(std::popcount(mask));
            acc += weight[s] * static_cast<long double>(v[mask | bit] - v[mask]);
        }
        out.phi[i] = static_cast<double>(acc);
    }
    return out;
}

std::vector<RankedImportance> ranked_importances(const std::vector<std::string>& names,
                                                 const std::vector<double>& values) {
    if (names.size() != values.size())
        throw DimensionMismatch("importance names and values differ in length");
    std::vector<RankedImportance> out(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) out[i] = {names[i], values[i]};
    std::stable_sort(out.begin(), out.end(),
                     [](const RankedImportance& a, const RankedImportance& b) {
                         return a.value > b.value;
                     });
    return out;
}

std::vector<double> mean_abs_phi(const std::vector<ShapleyAttribution>& attributions,
                                 std::size_t num_features) {
    std::vector<double> out(num_features, 0.0);
    if (attributions.empty()) return out;
    std::vector<double> col(attributions.size());
    for (std::size_t j = 0; j < num_features; ++j) {
        for (std::size_t i = 0; i < attributions.size(); ++i) {
            if (attributions[i].phi.size() != num_features)
                throw DimensionMismatch("attribution width does not match feature count");
            col[i] = std::abs(attributions[i].phi[j]);
        }
        out[j] = core::pairwise_mean(col);
    }
    const double total = core::pairwise_sum(out);
    if (total > 0.0)
        for (double& o : out) o /= total;
    return out;
}

std::string attribution_to_json(const std::string& method, const std::string& window_id,
                                int predicted_class, const std::vector<std::string>& names,
                                const std::vector<double>& values, double threshold) {
    if (names.size() != values.size())
        throw DimensionMismatch("attribution names and values differ in length");
    nlohmann::ordered_json j;
    j["method"] = method;
    j["window_id"] = window_id;
    j["predicted_class"] = predicted_class;
    nlohmann::ordered_json weights;
    nlohmann::ordered_json binary;
    for (std::size_t i = 0; i < names.size(); ++i) {
        weights[names[i]] = values[i];
        binary[names[i]] = values[i] >= threshold ? 1 : 0;
    }
    j["weights"] = std::move(weights);
    j["binary"] = std::move(binary);
    j["degradation_final"] = 0.0;
    j["config"] = {{"threshold", threshold}};
    return j.dump(2) + "\n";
}

} // namespace iic::baselines

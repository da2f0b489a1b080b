#include "iic/core/numeric.hpp"

namespace iic::core {

namespace {

double pairwise_sum_impl(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum_impl(v.subspan(0, half)) + pairwise_sum_impl(v.subspan(half));
}

} // namespace

double pairwise_sum(std::span<const double> values) {
    return pairwise_sum_impl(values);
}

double pairwise_mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return pairwise_sum(values) / static_cast<double>(values.size());
}

double population_std(std::span<const double> values) {
    if (values.empty()) return 0.0;
    const double mu = pairwise_mean(values);
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - mu;
        sq[i] = d * d;
    }
    return std::sqrt(pairwise_mean(sq));
}

} // namespace iic::core

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace iic::core {

/// Pairwise (cascade) summation. Order-independent of how the caller gathered
/// the values and with O(log n) error growth, which keeps aggregated metrics
/// reproducible across runs.
double pairwise_sum(std::span<const double> values);

double pairwise_mean(std::span<const double> values);

/// Population standard deviation (divides by n).
double population_std(std::span<const double> values);

inline bool all_finite(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

} // namespace iic::core

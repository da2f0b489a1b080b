#pragma once

#include <cstddef>
#include <vector>

#include "iic/core/types.hpp"
#include "iic/eval/masking.hpp"

namespace iic::eval {

struct FlipReport {
    double flip_rate = 0.0; // mean(flips)
    std::size_t n = 0;
    std::vector<bool> flips;
};

/// Masks each window's top-k inputs (per-window importance ranking, ties
/// broken by the fixed input order) and reports how often the prediction
/// flips. k = 0 flips nothing. Throws KTooLarge when k exceeds the input
/// dimension, EmptyEval, DimensionMismatch.
FlipReport fidelity(const Masker& masker, const core::Dataset& eval_ds,
                    const std::vector<std::vector<double>>& importances, std::size_t k);

/// Masks every input whose importance falls below tau and reports the flip
/// rate; tau = 0 masks nothing exactly, tau > max importance is equivalent
/// to fidelity at k = dim.
FlipReport sufficiency(const Masker& masker, const core::Dataset& eval_ds,
                       const std::vector<std::vector<double>>& importances, double tau);

} // namespace iic::eval

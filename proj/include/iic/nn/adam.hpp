#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace iic::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moment estimates; sized lazily on the first step.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t step = 0;
};

/// One Adam update with bias correction:
///   m = b1 m + (1-b1) g;  v = b2 v + (1-b2) g^2
///   theta -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg);

} // namespace iic::nn

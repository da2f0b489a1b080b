#include "iic/nn/adam.hpp"

#include <cmath>

#include "iic/errors.hpp"

namespace iic::nn {

void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg) {
    const std::size_t n = params.size();
    if (grads.size() != n) {
        throw ShapeMismatch("adam_step: gradient length " + std::to_string(grads.size()) +
                            " does not match parameter length " + std::to_string(n));
    }
    if (state.m.empty()) {
        state.m.assign(n, 0.0);
        state.v.assign(n, 0.0);
    } else if (state.m.size() != n || state.v.size() != n) {
        throw ShapeMismatch("adam_step: optimizer state sized for a different parameter vector");
    }

    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

} // namespace iic::nn

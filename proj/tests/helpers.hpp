#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "iic/core/types.hpp"

namespace iic::testing {

/// Physiologically plausible random window over all four modalities; the
/// occasional ACC spike exercises the outlier path.
inline core::MultimodalWindow random_window(std::uint64_t seed, std::size_t t,
                                            double rate_hz = 4.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    core::MultimodalWindow w;
    w.window_id = "w" + std::to_string(seed);
    w.subject_id = "s" + std::to_string(seed % 3);
    w.sample_rate_hz = rate_hz;

    core::Samples acc(t), hr(t), eda(t), temp(t);
    double drift = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        acc[i] = 1.0 + 0.25 * n(rng);
        if (u(rng) < 0.02) acc[i] += 4.0 + u(rng); // sporadic high-z spike
        hr[i] = 72.0 + 9.0 * n(rng);
        if (hr[i] < 35.0) hr[i] = 35.0;
        drift += 0.01 * n(rng);
        eda[i] = 2.0 + drift + 0.05 * n(rng);
        temp[i] = 34.0 + 0.15 * n(rng);
    }
    w.channels[core::Modality::ACC] = std::move(acc);
    w.channels[core::Modality::HR] = std::move(hr);
    w.channels[core::Modality::EDA] = std::move(eda);
    w.channels[core::Modality::TEMP] = std::move(temp);
    return w;
}

inline core::BaselineSet typical_baselines() {
    core::BaselineSet b;
    b.b[core::Modality::ACC] = 1.0;
    b.b[core::Modality::HR] = 70.0;
    b.b[core::Modality::EDA] = 2.0;
    b.b[core::Modality::TEMP] = 34.0;
    return b;
}

} // namespace iic::testing

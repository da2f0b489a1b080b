#include "iic/core/ops.hpp"

#include <algorithm>
#include <cmath>

#include "iic/core/numeric.hpp"
#include "iic/errors.hpp"

namespace iic::core {

BaselineSet compute_baselines(const Dataset& train) {
    if (train.empty()) {
        throw EmptyDataset("compute_baselines: train dataset is empty");
    }
    if (train.split != Split::Train) {
        throw InvalidConfig("compute_baselines: baselines must come from the train split");
    }
    BaselineSet out;
    for (Modality m : kAllModalities) {
        std::vector<double> flat;
        for (const auto& w : train.windows) {
            auto it = w.channels.find(m);
            if (it == w.channels.end()) continue;
            flat.insert(flat.end(), it->second.begin(), it->second.end());
        }
        if (flat.empty()) continue;
        // sort so the mean is bit-identical under any window/sample permutation
        std::sort(flat.begin(), flat.end());
        out.b[m] = pairwise_mean(flat);
    }
    if (out.b.empty()) {
        throw MissingModality("compute_baselines: no modality present in train dataset");
    }
    return out;
}

Samples resultant_acceleration(const Samples& x, const Samples& y, const Samples& z) {
    if (x.size() != y.size() || x.size() != z.size()) {
        throw LengthMismatch("resultant_acceleration: axis lengths differ");
    }
    Samples r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || !std::isfinite(z[i])) {
            throw InvalidWindow("resultant_acceleration: non-finite sample at index " +
                                std::to_string(i));
        }
        r[i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
    }
    return r;
}

Samples resample_linear(const Samples& x, double from_hz, double to_hz) {
    if (from_hz <= 0.0 || to_hz <= 0.0) {
        throw InvalidConfig("resample_linear: rates must be positive");
    }
    if (x.empty()) return {};
    if (from_hz == to_hz) return x;
    const double duration = static_cast<double>(x.size()) / from_hz;
    const auto n_out = static_cast<std::size_t>(std::llround(duration * to_hz));
    Samples out(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        const double src = static_cast<double>(i) * from_hz / to_hz;
        const auto lo = static_cast<std::size_t>(std::floor(src));
        if (lo + 1 >= x.size()) {
            out[i] = x.back();
            continue;
        }
        const double frac = src - static_cast<double>(lo);
        out[i] = x[lo] * (1.0 - frac) + x[lo + 1] * frac;
    }
    return out;
}

} // namespace iic::core

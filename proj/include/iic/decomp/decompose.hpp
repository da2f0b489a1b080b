#pragma once

#include "iic/decomp/component_set.hpp"

namespace iic::decomp {

// Per-modality decomposition results, exposed separately so each forward
// transform can be tested against its defining arithmetic.

struct AccDecomp {
    double meanob = 0.0;         // mean(r - b), scalar
    core::Samples outlier;       // zero except where |z-score| > threshold
    core::Samples activity;      // |residual|, elementwise >= 0
    std::vector<std::int8_t> signs;
};

struct HrDecomp {
    double meanob = 0.0;         // 60000/mean(x_RR) - b, bpm
    core::Samples variability;   // |diff(x_RR)|, length t-1, ms
    std::vector<std::int8_t> signs;
    double anchor_rr_ms = 0.0;   // x_RR[0] - mean(x_RR)
};

struct EdaDecomp {
    double tonic_meanob = 0.0;   // mean(tonic - b), scalar
    core::Samples tonic_change;  // tonic - b - tonic_meanob
    core::Samples phasic;        // x - tonic (residual, exact by construction)
};

struct TempDecomp {
    double meanob = 0.0;
    core::Samples rising;        // max(diff, 0), length t-1
    core::Samples falling;       // min(diff, 0), length t-1
    double anchor = 0.0;         // first zero-mean sample
};

AccDecomp decompose_acc(const core::Samples& r, double b_acc, double z_thresh = 3.0);
HrDecomp decompose_hr(const core::Samples& x_hr, double b_hr);
EdaDecomp decompose_eda(const core::Samples& x_eda, double b_eda, double sample_rate_hz,
                        const DecompConfig& cfg = {});
TempDecomp decompose_temp(const core::Samples& x_temp, double b_temp);

/// Skin-conductance-level extraction: moving median over
/// `tonic_median_window_s`, then a first-order low-pass at
/// `tonic_lowpass_hz`, applied forward and backward so the tonic estimate
/// has no phase shift. Edges are padded by odd reflection before filtering.
core::Samples tonic_filter(const core::Samples& x, double sample_rate_hz,
                           const DecompConfig& cfg = {});

/// Full forward transform: dispatches per modality and concatenates
/// components in the fixed global order.
ComponentSet decompose(const core::MultimodalWindow& window, const core::BaselineSet& baselines,
                       const DecompConfig& cfg = {});

} // namespace iic::decomp

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "iic/core/types.hpp"

namespace iic::decomp {

/// One named, domain-interpretable signal component. Payload is either a
/// broadcast scalar or a series (length t, or t-1 for components derived
/// from consecutive differences).
struct Component {
    std::string name; // "HR.MeanOB", "ACC.Outlier", ...
    core::Modality modality;
    bool is_scalar = false;
    double scalar = 0.0;
    core::Samples series; // empty when is_scalar

    std::size_t series_length() const { return is_scalar ? 0 : series.size(); }
};

/// Unweighted inversion state. Never scaled by weights; exists solely so
/// that reconstruction with all-ones weights is exact.
struct AuxState {
    std::vector<std::int8_t> acc_signs; // length t, in {-1,0,+1}
    std::vector<std::int8_t> hr_signs;  // length t-1, in {-1,0,+1}
    double hr_anchor_rr_ms = 0.0;       // x_RR[0] - mean(x_RR)
    double temp_anchor = 0.0;           // first zero-mean temperature sample
};

struct DecompConfig {
    double acc_z_thresh = 3.0;          // z-score cutoff separating outlier movement
    double rr_floor_ms = 200.0;         // RR clamp floor (= 300 bpm ceiling)
    double tonic_median_window_s = 4.0; // EDA tonic: moving-median window
    double tonic_lowpass_hz = 0.05;     // EDA tonic: bidirectional low-pass cutoff

    bool operator==(const DecompConfig&) const = default;
};

/// Canonical global component order. A window missing a modality simply
/// drops that modality's entries.
inline constexpr std::array<std::string_view, 11> kComponentOrder = {
    "ACC.MeanOB",  "ACC.Outlier",     "ACC.Activity",   "HR.MeanOB",
    "HR.Variability", "EDA.TonicMeanOB", "EDA.TonicChange", "EDA.Phasic",
    "TEMP.MeanOB", "TEMP.Rising",     "TEMP.Falling"};

/// Ordered component list plus everything needed for exact inversion:
/// auxiliary signs/anchors, per-modality baselines, window geometry.
struct ComponentSet {
    std::vector<Component> components; // fixed global order (subset if modality absent)
    AuxState aux;
    core::BaselineSet baselines;
    std::size_t t = 0;
    double sample_rate_hz = 0.0;
    std::string window_id;
    std::string subject_id;
    DecompConfig config;

    std::size_t dim() const { return components.size(); }
    /// Index into `components`, or -1 when the named component is absent.
    int index_of(std::string_view name) const;
    std::vector<std::string> names() const;
};

/// Per-component weights in [0,1]; the explanation object.
struct WeightVector {
    std::vector<double> w;

    static WeightVector ones(std::size_t d) { return WeightVector{std::vector<double>(d, 1.0)}; }
    static WeightVector zeros(std::size_t d) { return WeightVector{std::vector<double>(d, 0.0)}; }
    std::size_t size() const { return w.size(); }
    double operator[](std::size_t i) const { return w[i]; }
};

/// Throws WeightOutOfRange / DimensionMismatch.
void validate_weights(const WeightVector& w, std::size_t expected_dim);

} // namespace iic::decomp

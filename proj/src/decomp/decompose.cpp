#include "iic/decomp/decompose.hpp"

#include <algorithm>
#include <cmath>

#include "iic/core/numeric.hpp"
#include "iic/errors.hpp"

namespace iic::decomp {

using core::Modality;
using core::Samples;

namespace {

std::int8_t sign_of(double v) {
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

void require_finite(const Samples& x, const char* what) {
    if (!core::all_finite(x)) {
        throw InvalidWindow(std::string(what) + ": non-finite sample");
    }
}

Component scalar_component(std::string name, Modality m, double value) {
    Component c;
    c.name = std::move(name);
    c.modality = m;
    c.is_scalar = true;
    c.scalar = value;
    return c;
}

Component series_component(std::string name, Modality m, Samples series) {
    Component c;
    c.name = std::move(name);
    c.modality = m;
    c.is_scalar = false;
    c.series = std::move(series);
    return c;
}

} // namespace

AccDecomp decompose_acc(const Samples& r, double b_acc, double z_thresh) {
    require_finite(r, "decompose_acc");
    const std::size_t t = r.size();

    Samples r_ob(t);
    for (std::size_t i = 0; i < t; ++i) r_ob[i] = r[i] - b_acc;
    const double meanob = core::pairwise_mean(r_ob);

    Samples zm(t);
    for (std::size_t i = 0; i < t; ++i) zm[i] = r_ob[i] - meanob;

    const double zm_mean = core::pairwise_mean(zm); // ~0 by construction
    const double zm_std = core::population_std(zm);

    AccDecomp out;
    out.meanob = meanob;
    out.outlier.assign(t, 0.0);
    out.activity.resize(t);
    out.signs.resize(t);
    for (std::size_t i = 0; i < t; ++i) {
        // std == 0 means a constant residual: no sample can be an outlier.
        if (zm_std > 0.0 && std::abs(zm[i] - zm_mean) / zm_std > z_thresh) {
            out.outlier[i] = zm[i];
        }
        const double residual = zm[i] - out.outlier[i];
        out.activity[i] = std::abs(residual);
        out.signs[i] = sign_of(residual);
    }
    return out;
}

HrDecomp decompose_hr(const Samples& x_hr, double b_hr) {
    require_finite(x_hr, "decompose_hr");
    if (b_hr <= 0.0) throw NonPositiveHeartRate("decompose_hr: baseline must be > 0 bpm");
    for (double v : x_hr) {
        if (v <= 0.0) throw NonPositiveHeartRate("decompose_hr: heart rate must be > 0 bpm");
    }
    const std::size_t t = x_hr.size();

    Samples x_rr(t);
    for (std::size_t i = 0; i < t; ++i) x_rr[i] = 60000.0 / x_hr[i];
    const double rr_mean = core::pairwise_mean(x_rr);

    HrDecomp out;
    out.meanob = 60000.0 / rr_mean - b_hr;
    out.anchor_rr_ms = x_rr[0] - rr_mean;
    if (t >= 2) {
        out.variability.resize(t - 1);
        out.signs.resize(t - 1);
        for (std::size_t i = 0; i + 1 < t; ++i) {
            const double d = x_rr[i + 1] - x_rr[i];
            out.variability[i] = std::abs(d);
            out.signs[i] = sign_of(d);
        }
    }
    return out;
}

Samples tonic_filter(const Samples& x, double sample_rate_hz, const DecompConfig& cfg) {
    if (sample_rate_hz <= 0.0) throw InvalidConfig("tonic_filter: sample rate must be > 0");
    const std::size_t t = x.size();
    if (t == 0) return {};
    if (t == 1) return x;

    // Moving-median window, forced odd so the window is centered.
    std::size_t med_win =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.tonic_median_window_s *
                                                                      sample_rate_hz)));
    if (med_win % 2 == 0) ++med_win;

    const double dt = 1.0 / sample_rate_hz;
    const double rc = 1.0 / (2.0 * M_PI * cfg.tonic_lowpass_hz);
    const double alpha = dt / (rc + dt);

    // Odd-reflection padding: continues trends across the boundary so both
    // the median and the IIR passes settle before touching real samples.
    std::size_t pad = std::max(med_win, static_cast<std::size_t>(std::ceil(6.0 * rc / dt)));
    pad = std::min(pad, t - 1);

    const std::size_t n = t + 2 * pad;
    Samples ext(n);
    for (std::size_t i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
    for (std::size_t i = 0; i < t; ++i) ext[pad + i] = x[i];
    for (std::size_t i = 0; i < pad; ++i) ext[pad + t + i] = 2.0 * x[t - 1] - x[t - 2 - i];

    // Centered moving median (window truncated near the padded ends).
    Samples med(n);
    const std::size_t half = med_win / 2;
    std::vector<double> buf;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n - 1, i + half);
        buf.assign(ext.begin() + static_cast<std::ptrdiff_t>(lo),
                   ext.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
        auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
        std::nth_element(buf.begin(), mid, buf.end());
        if (buf.size() % 2 == 1) {
            med[i] = *mid;
        } else {
            const double upper = *mid;
            const double lower = *std::max_element(buf.begin(), mid);
            med[i] = 0.5 * (lower + upper);
        }
    }

    // First-order low-pass, forward then backward (zero phase).
    Samples fwd(n);
    fwd[0] = med[0];
    for (std::size_t i = 1; i < n; ++i) fwd[i] = fwd[i - 1] + alpha * (med[i] - fwd[i - 1]);
    Samples bwd(n);
    bwd[n - 1] = fwd[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) bwd[i] = bwd[i + 1] + alpha * (fwd[i] - bwd[i + 1]);

    return Samples(bwd.begin() + static_cast<std::ptrdiff_t>(pad),
                   bwd.begin() + static_cast<std::ptrdiff_t>(pad + t));
}

EdaDecomp decompose_eda(const Samples& x_eda, double b_eda, double sample_rate_hz,
                        const DecompConfig& cfg) {
    require_finite(x_eda, "decompose_eda");
    const std::size_t t = x_eda.size();
    const Samples tonic = tonic_filter(x_eda, sample_rate_hz, cfg);

    Samples tonic_ob(t);
    for (std::size_t i = 0; i < t; ++i) tonic_ob[i] = tonic[i] - b_eda;

    EdaDecomp out;
    out.tonic_meanob = core::pairwise_mean(tonic_ob);
    out.tonic_change.resize(t);
    out.phasic.resize(t);
    for (std::size_t i = 0; i < t; ++i) {
        out.tonic_change[i] = tonic_ob[i] - out.tonic_meanob;
        out.phasic[i] = x_eda[i] - tonic[i];
    }
    return out;
}

TempDecomp decompose_temp(const Samples& x_temp, double b_temp) {
    require_finite(x_temp, "decompose_temp");
    const std::size_t t = x_temp.size();

    Samples ob(t);
    for (std::size_t i = 0; i < t; ++i) ob[i] = x_temp[i] - b_temp;
    const double meanob = core::pairwise_mean(ob);

    TempDecomp out;
    out.meanob = meanob;
    out.anchor = ob.empty() ? 0.0 : ob[0] - meanob;
    if (t >= 2) {
        out.rising.resize(t - 1);
        out.falling.resize(t - 1);
        for (std::size_t i = 0; i + 1 < t; ++i) {
            const double d = ob[i + 1] - ob[i]; // the zero-mean shift cancels in the diff
            out.rising[i] = std::max(d, 0.0);
            out.falling[i] = std::min(d, 0.0);
        }
    }
    return out;
}

ComponentSet decompose(const core::MultimodalWindow& window, const core::BaselineSet& baselines,
                       const DecompConfig& cfg) {
    core::validate_window(window);
    ComponentSet cs;
    cs.t = window.length();
    cs.sample_rate_hz = window.sample_rate_hz;
    cs.window_id = window.window_id;
    cs.subject_id = window.subject_id;
    cs.config = cfg;
    cs.aux = AuxState{};

    for (const auto& [m, samples] : window.channels) {
        cs.baselines.b[m] = baselines.at(m);
    }

    if (window.has(Modality::ACC)) {
        auto acc = decompose_acc(window.channels.at(Modality::ACC), baselines.at(Modality::ACC),
                                 cfg.acc_z_thresh);
        cs.components.push_back(scalar_component("ACC.MeanOB", Modality::ACC, acc.meanob));
        cs.components.push_back(series_component("ACC.Outlier", Modality::ACC, std::move(acc.outlier)));
        cs.components.push_back(
            series_component("ACC.Activity", Modality::ACC, std::move(acc.activity)));
        cs.aux.acc_signs = std::move(acc.signs);
    }
    if (window.has(Modality::HR)) {
        auto hr = decompose_hr(window.channels.at(Modality::HR), baselines.at(Modality::HR));
        cs.components.push_back(scalar_component("HR.MeanOB", Modality::HR, hr.meanob));
        cs.components.push_back(
            series_component("HR.Variability", Modality::HR, std::move(hr.variability)));
        cs.aux.hr_signs = std::move(hr.signs);
        cs.aux.hr_anchor_rr_ms = hr.anchor_rr_ms;
    }
    if (window.has(Modality::EDA)) {
        auto eda = decompose_eda(window.channels.at(Modality::EDA), baselines.at(Modality::EDA),
                                 window.sample_rate_hz, cfg);
        cs.components.push_back(
            scalar_component("EDA.TonicMeanOB", Modality::EDA, eda.tonic_meanob));
        cs.components.push_back(
            series_component("EDA.TonicChange", Modality::EDA, std::move(eda.tonic_change)));
        cs.components.push_back(series_component("EDA.Phasic", Modality::EDA, std::move(eda.phasic)));
    }
    if (window.has(Modality::TEMP)) {
        auto temp = decompose_temp(window.channels.at(Modality::TEMP), baselines.at(Modality::TEMP));
        cs.components.push_back(scalar_component("TEMP.MeanOB", Modality::TEMP, temp.meanob));
        cs.components.push_back(series_component("TEMP.Rising", Modality::TEMP, std::move(temp.rising)));
        cs.components.push_back(
            series_component("TEMP.Falling", Modality::TEMP, std::move(temp.falling)));
        cs.aux.temp_anchor = temp.anchor;
    }
    return cs;
}

} // namespace iic::decomp

#include "iic/decomp/reconstruct.hpp"

#include <cmath>

#include "iic/errors.hpp"

namespace iic::decomp {

using core::Modality;
using core::Samples;

namespace {

struct Indices {
    int acc_mean = -1, acc_out = -1, acc_act = -1;
    int hr_mean = -1, hr_var = -1;
    int eda_mean = -1, eda_change = -1, eda_phasic = -1;
    int temp_mean = -1, temp_rise = -1, temp_fall = -1;
};

Indices find_indices(const ComponentSet& cs) {
    Indices ix;
    ix.acc_mean = cs.index_of("ACC.MeanOB");
    ix.acc_out = cs.index_of("ACC.Outlier");
    ix.acc_act = cs.index_of("ACC.Activity");
    ix.hr_mean = cs.index_of("HR.MeanOB");
    ix.hr_var = cs.index_of("HR.Variability");
    ix.eda_mean = cs.index_of("EDA.TonicMeanOB");
    ix.eda_change = cs.index_of("EDA.TonicChange");
    ix.eda_phasic = cs.index_of("EDA.Phasic");
    ix.temp_mean = cs.index_of("TEMP.MeanOB");
    ix.temp_rise = cs.index_of("TEMP.Rising");
    ix.temp_fall = cs.index_of("TEMP.Falling");
    return ix;
}

/// Unclamped RR series rr'_i = m' + anchor + w_v * P_i, where P is the
/// signed prefix sum of the variability magnitudes.
struct HrRecon {
    Samples rr_raw;     // before the clamp
    Samples rr;         // after the clamp
    Samples prefix;     // P_i
    double m_prime = 0.0;
    double u = 0.0;     // b_hr + w_m * c_meanob
};

HrRecon hr_reconstruct(const ComponentSet& cs, double w_mean, double w_var, int hr_mean,
                       int hr_var) {
    const double b_hr = cs.baselines.at(Modality::HR);
    const double c_meanob = cs.components[static_cast<std::size_t>(hr_mean)].scalar;
    const auto& c_var = cs.components[static_cast<std::size_t>(hr_var)].series;
    const auto& signs = cs.aux.hr_signs;
    const std::size_t t = cs.t;

    HrRecon out;
    out.u = b_hr + w_mean * c_meanob;
    out.m_prime = 60000.0 / out.u;
    out.prefix.resize(t);
    out.prefix[0] = 0.0;
    for (std::size_t i = 0; i + 1 < t; ++i) {
        out.prefix[i + 1] = out.prefix[i] + static_cast<double>(signs[i]) * c_var[i];
    }
    out.rr_raw.resize(t);
    out.rr.resize(t);
    const double floor_ms = cs.config.rr_floor_ms;
    for (std::size_t i = 0; i < t; ++i) {
        out.rr_raw[i] = out.m_prime + cs.aux.hr_anchor_rr_ms + w_var * out.prefix[i];
        out.rr[i] = std::max(out.rr_raw[i], floor_ms);
    }
    return out;
}

} // namespace

core::MultimodalWindow reconstruct(const ComponentSet& cs, const WeightVector& w) {
    validate_weights(w, cs.dim());
    const auto ix = find_indices(cs);
    const std::size_t t = cs.t;

    core::MultimodalWindow out;
    out.window_id = cs.window_id;
    out.subject_id = cs.subject_id;
    out.sample_rate_hz = cs.sample_rate_hz;

    if (ix.acc_mean >= 0) {
        const double b = cs.baselines.at(Modality::ACC);
        const double meanob = cs.components[static_cast<std::size_t>(ix.acc_mean)].scalar;
        const auto& outlier = cs.components[static_cast<std::size_t>(ix.acc_out)].series;
        const auto& activity = cs.components[static_cast<std::size_t>(ix.acc_act)].series;
        const double wm = w[static_cast<std::size_t>(ix.acc_mean)];
        const double wo = w[static_cast<std::size_t>(ix.acc_out)];
        const double wa = w[static_cast<std::size_t>(ix.acc_act)];
        Samples r(t);
        for (std::size_t i = 0; i < t; ++i) {
            r[i] = b + wm * meanob + wa * static_cast<double>(cs.aux.acc_signs[i]) * activity[i] +
                   wo * outlier[i];
        }
        out.channels[Modality::ACC] = std::move(r);
    }

    if (ix.hr_mean >= 0) {
        const auto hr = hr_reconstruct(cs, w[static_cast<std::size_t>(ix.hr_mean)],
                                       w[static_cast<std::size_t>(ix.hr_var)], ix.hr_mean, ix.hr_var);
        Samples x(t);
        for (std::size_t i = 0; i < t; ++i) x[i] = 60000.0 / hr.rr[i];
        out.channels[Modality::HR] = std::move(x);
    }

    if (ix.eda_mean >= 0) {
        const double b = cs.baselines.at(Modality::EDA);
        const double meanob = cs.components[static_cast<std::size_t>(ix.eda_mean)].scalar;
        const auto& change = cs.components[static_cast<std::size_t>(ix.eda_change)].series;
        const auto& phasic = cs.components[static_cast<std::size_t>(ix.eda_phasic)].series;
        const double wm = w[static_cast<std::size_t>(ix.eda_mean)];
        const double wc = w[static_cast<std::size_t>(ix.eda_change)];
        const double wp = w[static_cast<std::size_t>(ix.eda_phasic)];
        Samples x(t);
        for (std::size_t i = 0; i < t; ++i) {
            x[i] = b + wm * meanob + wc * change[i] + wp * phasic[i];
        }
        out.channels[Modality::EDA] = std::move(x);
    }

    if (ix.temp_mean >= 0) {
        const double b = cs.baselines.at(Modality::TEMP);
        const double meanob = cs.components[static_cast<std::size_t>(ix.temp_mean)].scalar;
        const auto& rising = cs.components[static_cast<std::size_t>(ix.temp_rise)].series;
        const auto& falling = cs.components[static_cast<std::size_t>(ix.temp_fall)].series;
        const double wm = w[static_cast<std::size_t>(ix.temp_mean)];
        const double wr = w[static_cast<std::size_t>(ix.temp_rise)];
        const double wf = w[static_cast<std::size_t>(ix.temp_fall)];
        Samples x(t);
        x[0] = b + wm * meanob + cs.aux.temp_anchor;
        for (std::size_t i = 0; i + 1 < t; ++i) {
            x[i + 1] = x[i] + wr * rising[i] + wf * falling[i];
        }
        out.channels[Modality::TEMP] = std::move(x);
    }

    return out;
}

std::vector<double> weight_jvp(const ComponentSet& cs, const WeightVector& w,
                               const WindowGrad& g_x) {
    validate_weights(w, cs.dim());
    const auto ix = find_indices(cs);
    const std::size_t t = cs.t;
    std::vector<double> grad(cs.dim(), 0.0);

    for (const auto& [m, g] : g_x) {
        if (g.size() != t) {
            throw DimensionMismatch("weight_jvp: gradient channel " +
                                    std::string(core::modality_name(m)) + " has length " +
                                    std::to_string(g.size()) + ", expected " + std::to_string(t));
        }
    }

    if (ix.acc_mean >= 0 && g_x.count(Modality::ACC)) {
        const auto& g = g_x.at(Modality::ACC);
        const double meanob = cs.components[static_cast<std::size_t>(ix.acc_mean)].scalar;
        const auto& outlier = cs.components[static_cast<std::size_t>(ix.acc_out)].series;
        const auto& activity = cs.components[static_cast<std::size_t>(ix.acc_act)].series;
        double gm = 0.0, go = 0.0, ga = 0.0;
        for (std::size_t i = 0; i < t; ++i) {
            gm += g[i] * meanob;
            go += g[i] * outlier[i];
            ga += g[i] * static_cast<double>(cs.aux.acc_signs[i]) * activity[i];
        }
        grad[static_cast<std::size_t>(ix.acc_mean)] += gm;
        grad[static_cast<std::size_t>(ix.acc_out)] += go;
        grad[static_cast<std::size_t>(ix.acc_act)] += ga;
    }

    if (ix.hr_mean >= 0 && g_x.count(Modality::HR)) {
        const auto& g = g_x.at(Modality::HR);
        const auto hr = hr_reconstruct(cs, w[static_cast<std::size_t>(ix.hr_mean)],
                                       w[static_cast<std::size_t>(ix.hr_var)], ix.hr_mean, ix.hr_var);
        const double c_meanob = cs.components[static_cast<std::size_t>(ix.hr_mean)].scalar;
        // dm'/dw_m through m' = 60000 / (b + w_m c).
        const double dmprime_dwm = -60000.0 * c_meanob / (hr.u * hr.u);
        double gm = 0.0, gv = 0.0;
        for (std::size_t i = 0; i < t; ++i) {
            if (hr.rr_raw[i] <= cs.config.rr_floor_ms) continue; // clamped: flat
            const double dx_drr = -60000.0 / (hr.rr[i] * hr.rr[i]);
            gm += g[i] * dx_drr * dmprime_dwm;
            gv += g[i] * dx_drr * hr.prefix[i];
        }
        grad[static_cast<std::size_t>(ix.hr_mean)] += gm;
        grad[static_cast<std::size_t>(ix.hr_var)] += gv;
    }

    if (ix.eda_mean >= 0 && g_x.count(Modality::EDA)) {
        const auto& g = g_x.at(Modality::EDA);
        const double meanob = cs.components[static_cast<std::size_t>(ix.eda_mean)].scalar;
        const auto& change = cs.components[static_cast<std::size_t>(ix.eda_change)].series;
        const auto& phasic = cs.components[static_cast<std::size_t>(ix.eda_phasic)].series;
        double gm = 0.0, gc = 0.0, gp = 0.0;
        for (std::size_t i = 0; i < t; ++i) {
            gm += g[i] * meanob;
            gc += g[i] * change[i];
            gp += g[i] * phasic[i];
        }
        grad[static_cast<std::size_t>(ix.eda_mean)] += gm;
        grad[static_cast<std::size_t>(ix.eda_change)] += gc;
        grad[static_cast<std::size_t>(ix.eda_phasic)] += gp;
    }

    if (ix.temp_mean >= 0 && g_x.count(Modality::TEMP)) {
        const auto& g = g_x.at(Modality::TEMP);
        const double meanob = cs.components[static_cast<std::size_t>(ix.temp_mean)].scalar;
        const auto& rising = cs.components[static_cast<std::size_t>(ix.temp_rise)].series;
        const auto& falling = cs.components[static_cast<std::size_t>(ix.temp_fall)].series;
        // x'_i = b + w_m c_mean + anchor + w_r R_i + w_f F_i with prefix sums R, F.
        double gm = 0.0, gr = 0.0, gf = 0.0;
        double rise_prefix = 0.0, fall_prefix = 0.0;
        for (std::size_t i = 0; i < t; ++i) {
            if (i > 0) {
                rise_prefix += rising[i - 1];
                fall_prefix += falling[i - 1];
            }
            gm += g[i] * meanob;
            gr += g[i] * rise_prefix;
            gf += g[i] * fall_prefix;
        }
        grad[static_cast<std::size_t>(ix.temp_mean)] += gm;
        grad[static_cast<std::size_t>(ix.temp_rise)] += gr;
        grad[static_cast<std::size_t>(ix.temp_fall)] += gf;
    }

    return grad;
}

} // namespace iic::decomp

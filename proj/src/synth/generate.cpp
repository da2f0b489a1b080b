#include "iic/synth/generate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "iic/decomp/component_set.hpp"
#include "iic/errors.hpp"

namespace iic::synth {
namespace {

constexpr double kArPhi = 0.9;
constexpr double kHrFloorBpm = 30.0;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stationary AR(1) path, one draw per sample.
core::Samples ar1(std::mt19937_64& rng, std::size_t t, double sigma) {
    std::normal_distribution<double> n(0.0, 1.0);
    core::Samples x(t);
    double state = sigma / std::sqrt(1.0 - kArPhi * kArPhi) * n(rng);
    for (std::size_t i = 0; i < t; ++i) {
        x[i] = state;
        state = kArPhi * state + sigma * n(rng);
    }
    return x;
}

struct SubjectBaselines {
    double acc = 1.0;
    double hr = 65.0;
    double eda = 2.0;
    double temp = 34.0;
};

SubjectBaselines draw_baselines(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SubjectBaselines b;
    b.acc = 1.0 + 0.1 * u(rng);
    b.hr = 65.0 + 5.0 * u(rng);
    b.eda = 2.0 + 0.5 * u(rng);
    b.temp = 34.0 + 0.4 * u(rng);
    return b;
}

core::MultimodalWindow make_window(const SynthConfig& cfg, const SubjectBaselines& base,
                                   std::mt19937_64& rng, int subject, int cls, int index) {
    core::MultimodalWindow w;
    w.subject_id = "subj" + std::to_string(subject);
    w.window_id = w.subject_id + "_c" + std::to_string(cls) + "_w" + std::to_string(index);
    w.label = cls;
    w.sample_rate_hz = cfg.sample_rate_hz;
    const std::size_t t = cfg.t;

    if (cfg.include_acc) {
        core::Samples acc = ar1(rng, t, cfg.acc_noise);
        for (double& v : acc) v = std::max(0.0, base.acc + v);
        if (cls == 1 && cfg.acc_outlier_rate > 0.0) {
            std::poisson_distribution<int> bursts(cfg.acc_outlier_rate);
            std::uniform_int_distribution<std::size_t> pos(0, t - 1);
            std::uniform_real_distribution<double> amp(4.0, 8.0);
            const int n_bursts = bursts(rng);
            for (int b = 0; b < n_bursts; ++b) {
                const std::size_t at = pos(rng);
                const double a = amp(rng);
                acc[at] += a;
                if (at + 1 < t) acc[at + 1] += 0.5 * a;
            }
        }
        w.channels[core::Modality::ACC] = std::move(acc);
    }

    {
        const double sigma = cfg.hr_noise * (cls == 1 ? cfg.hr_var_scale : 1.0);
        core::Samples hr = ar1(rng, t, sigma);
        const double level = base.hr + (cls == 1 ? cfg.hr_mean_shift : 0.0);
        for (double& v : hr) v = std::max(kHrFloorBpm, level + v);
        w.channels[core::Modality::HR] = std::move(hr);
    }

    {
        core::Samples eda = ar1(rng, t, cfg.eda_noise);
        const double level = base.eda + (cls == 1 ? cfg.eda_tonic_shift : 0.0);
        for (double& v : eda) v = std::max(0.05, level + v);
        w.channels[core::Modality::EDA] = std::move(eda);
    }

    {
        core::Samples temp = ar1(rng, t, cfg.temp_noise);
        const double per_sample =
            (cls == 1 ? cfg.temp_drift : 0.0) / (60.0 * cfg.sample_rate_hz);
        for (std::size_t i = 0; i < t; ++i)
            temp[i] += base.temp + per_sample * static_cast<double>(i);
        w.channels[core::Modality::TEMP] = std::move(temp);
    }

    return w;
}

} // namespace

std::string_view task_name(Task t) { return t == Task::State ? "state" : "seizure"; }

std::optional<Task> task_from_name(std::string_view name) {
    if (name == "state") return Task::State;
    if (name == "seizure") return Task::Seizure;
    return std::nullopt;
}

SynthConfig default_config(Task task, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.task = task;
    cfg.seed = seed;
    if (task == Task::Seizure) {
        cfg.t = 60;
        cfg.sample_rate_hz = 1.0;
        cfg.include_acc = true;
        // balanced so no single cue separates the classes on its own; the
        // movement bursts carry the largest standardized deviations
        cfg.hr_mean_shift = 8.0;
        cfg.eda_tonic_shift = 0.0;
        cfg.acc_outlier_rate = 4.0;
        cfg.hr_var_scale = 1.5;
    }
    return cfg;
}

void validate_config(const SynthConfig& cfg) {
    if (cfg.n_subjects < 2) throw InvalidConfig("need at least two subjects for a disjoint split");
    if (cfg.windows_per_class < 1) throw InvalidConfig("windows_per_class must be >= 1");
    if (cfg.t < 2) throw InvalidConfig("window length must be >= 2");
    if (!(cfg.sample_rate_hz > 0.0)) throw InvalidConfig("sample rate must be positive");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
        throw InvalidConfig("train_fraction must lie in (0, 1)");
    if (cfg.hr_mean_shift < 0.0 || cfg.eda_tonic_shift < 0.0 || cfg.acc_outlier_rate < 0.0 ||
        cfg.hr_var_scale < 0.0 || cfg.temp_drift < 0.0)
        throw InvalidConfig("effect sizes must be >= 0");
    if (cfg.acc_noise < 0.0 || cfg.hr_noise < 0.0 || cfg.eda_noise < 0.0 || cfg.temp_noise < 0.0)
        throw InvalidConfig("noise levels must be >= 0");
}

SynthResult generate(const SynthConfig& cfg) {
    validate_config(cfg);
    SynthResult out;
    const std::vector<std::string> class_names =
        cfg.task == Task::State ? std::vector<std::string>{"rest", "active"}
                                : std::vector<std::string>{"interictal", "ictal"};
    out.train.split = core::Split::Train;
    out.train.class_names = class_names;
    out.eval.split = core::Split::Eval;
    out.eval.class_names = class_names;

    const int n_train =
        std::clamp(static_cast<int>(std::lround(cfg.train_fraction * cfg.n_subjects)), 1,
                   cfg.n_subjects - 1);

    for (int s = 0; s < cfg.n_subjects; ++s) {
        std::mt19937_64 rng(splitmix(cfg.seed ^ splitmix(static_cast<std::uint64_t>(s) + 1)));
        const SubjectBaselines base = draw_baselines(rng);
        core::Dataset& target = s < n_train ? out.train : out.eval;
        for (int i = 0; i < cfg.windows_per_class; ++i)
            for (int cls = 0; cls < 2; ++cls)
                target.windows.push_back(make_window(cfg, base, rng, s, cls, i));
    }

    core::validate_dataset(out.train);
    core::validate_dataset(out.eval);

    // planted components in the canonical order
    std::vector<std::string> planted;
    if (cfg.include_acc && cfg.acc_outlier_rate > 0.0) planted.push_back("ACC.Outlier");
    if (cfg.hr_mean_shift > 0.0) planted.push_back("HR.MeanOB");
    if (cfg.hr_var_scale != 1.0) planted.push_back("HR.Variability");
    if (cfg.eda_tonic_shift > 0.0) planted.push_back("EDA.TonicMeanOB");
    if (cfg.temp_drift > 0.0) planted.push_back("TEMP.Rising");
    out.ground_truth = std::move(planted);
    return out;
}

std::string ground_truth_json(const SynthConfig& cfg,
                              const std::vector<std::string>& components) {
    nlohmann::ordered_json j;
    j["task"] = std::string(task_name(cfg.task));
    j["components"] = components;
    return j.dump(2) + "\n";
}

} // namespace iic::synth

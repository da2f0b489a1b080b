#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iic/core/types.hpp"

namespace iic::synth {

enum class Task { State, Seizure };

std::string_view task_name(Task t);
std::optional<Task> task_from_name(std::string_view name);

/// Planted-signature generator settings. Class 1 carries the effect sizes;
/// class 0 is the matched control. Everything is derived from `seed`.
struct SynthConfig {
    Task task = Task::State;
    int n_subjects = 8;
    int windows_per_class = 8; // per subject
    std::size_t t = 120;
    double sample_rate_hz = 4.0;
    std::uint64_t seed = 0;
    double train_fraction = 0.75; // of subjects

    bool include_acc = false;

    // planted effect sizes
    double hr_mean_shift = 15.0;   // bpm added to class 1
    double eda_tonic_shift = 1.5;  // uS added to class 1
    double acc_outlier_rate = 0.0; // expected movement bursts per class-1 window
    double hr_var_scale = 1.0;     // class-1 HR noise multiplier
    double temp_drift = 0.0;       // degC per minute added to class 1

    // AR(1) innovation scale per modality (phi = 0.9)
    double acc_noise = 0.05;
    double hr_noise = 2.0;
    double eda_noise = 0.06;
    double temp_noise = 0.03;
};

/// Task presets: state = HR mean + EDA tonic shifts, no ACC channel,
/// 30 s at 4 Hz; seizure = ACC bursts + HR shift + widened variability on
/// all four channels, 60 s at 1 Hz.
SynthConfig default_config(Task task, std::uint64_t seed = 0);

void validate_config(const SynthConfig& cfg);

struct SynthResult {
    core::Dataset train;
    core::Dataset eval;
    /// Component names an ideal explainer should put on top.
    std::vector<std::string> ground_truth;
};

/// Subject-disjoint train/eval splits with per-subject baselines and
/// autocorrelated noise; identical output for identical config.
SynthResult generate(const SynthConfig& cfg);

/// `{task, components: [...]}`, canonical layout.
std::string ground_truth_json(const SynthConfig& cfg, const std::vector<std::string>& components);

} // namespace iic::synth

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "iic/core/numeric.hpp"
#include "iic/errors.hpp"
#include "iic/nn/train.hpp"
#include "iic/synth/generate.hpp"

using namespace iic;

namespace {

bool same_window(const core::MultimodalWindow& a, const core::MultimodalWindow& b) {
    return a.window_id == b.window_id && a.subject_id == b.subject_id && a.label == b.label &&
           a.sample_rate_hz == b.sample_rate_hz && a.channels == b.channels;
}

bool same_dataset(const core::Dataset& a, const core::Dataset& b) {
    if (a.class_names != b.class_names || a.windows.size() != b.windows.size()) return false;
    for (std::size_t i = 0; i < a.windows.size(); ++i)
        if (!same_window(a.windows[i], b.windows[i])) return false;
    return true;
}

/// Pooled per-class samples of one channel across both splits.
core::Samples pooled(const synth::SynthResult& r, core::Modality m, int cls) {
    core::Samples out;
    for (const core::Dataset* ds : {&r.train, &r.eval})
        for (const auto& w : ds->windows)
            if (w.label == cls && w.has(m))
                out.insert(out.end(), w.channels.at(m).begin(), w.channels.at(m).end());
    return out;
}

} // namespace

TEST_SUITE("synthetic data") {

TEST_CASE("task names round-trip") {
    CHECK(synth::task_name(synth::Task::State) == "state");
    CHECK(synth::task_name(synth::Task::Seizure) == "seizure");
    CHECK(synth::task_from_name("state") == synth::Task::State);
    CHECK(synth::task_from_name("seizure") == synth::Task::Seizure);
    CHECK_FALSE(synth::task_from_name("Seizure").has_value());
    CHECK_FALSE(synth::task_from_name("").has_value());
}

TEST_CASE("task presets") {
    const auto state = synth::default_config(synth::Task::State, 7);
    CHECK(state.seed == 7);
    CHECK_FALSE(state.include_acc);
    CHECK(state.t == 120);
    CHECK(state.sample_rate_hz == 4.0);
    CHECK(state.hr_mean_shift == 15.0);
    CHECK(state.eda_tonic_shift == 1.5);
    CHECK(state.hr_var_scale == 1.0);

    const auto seizure = synth::default_config(synth::Task::Seizure);
    CHECK(seizure.include_acc);
    CHECK(seizure.t == 60);
    CHECK(seizure.sample_rate_hz == 1.0);
    CHECK(seizure.hr_mean_shift == 8.0);
    CHECK(seizure.eda_tonic_shift == 0.0);
    CHECK(seizure.acc_outlier_rate == 4.0);
    CHECK(seizure.hr_var_scale == 1.5);
}

TEST_CASE("config validation") {
    auto cfg = synth::default_config(synth::Task::State);
    CHECK_NOTHROW(synth::validate_config(cfg));

    auto bad = cfg;
    bad.n_subjects = 1;
    CHECK_THROWS_AS(synth::validate_config(bad), InvalidConfig);
    bad = cfg;
    bad.windows_per_class = 0;
    CHECK_THROWS_AS(synth::validate_config(bad), InvalidConfig);
    bad = cfg;
    bad.t = 1;
    CHECK_THROWS_AS(synth::validate_config(bad), InvalidConfig);
    bad = cfg;
    bad.sample_rate_hz = 0.0;
    CHECK_THROWS_AS(synth::validate_config(bad), InvalidConfig);
    bad = cfg;
    bad.train_fraction = 1.0;
    CHECK_THROWS_AS(synth::validate_config(bad), InvalidConfig);
    bad = cfg;
    bad.train_fraction = 0.0;
    CHECK_THROWS_AS(synth::validate_config(bad), InvalidConfig);
    bad = cfg;
    bad.hr_mean_shift = -1.0;
    CHECK_THROWS_AS(synth::validate_config(bad), InvalidConfig);
    bad = cfg;
    bad.hr_var_scale = -0.5;
    CHECK_THROWS_AS(synth::validate_config(bad), InvalidConfig);
    bad = cfg;
    bad.eda_noise = -1e-9;
    CHECK_THROWS_AS(synth::validate_config(bad), InvalidConfig);
}

TEST_CASE("same seed reproduces every sample, different seed does not") {
    auto cfg = synth::default_config(synth::Task::Seizure, 42);
    cfg.n_subjects = 3;
    cfg.windows_per_class = 2;
    const auto a = synth::generate(cfg);
    const auto b = synth::generate(cfg);
    CHECK(same_dataset(a.train, b.train));
    CHECK(same_dataset(a.eval, b.eval));
    CHECK(a.ground_truth == b.ground_truth);

    cfg.seed = 43;
    const auto c = synth::generate(cfg);
    CHECK_FALSE(same_dataset(a.train, c.train));
}

TEST_CASE("shapes, ids and channel layout") {
    auto cfg = synth::default_config(synth::Task::State, 5);
    cfg.n_subjects = 4;
    cfg.windows_per_class = 3;
    const auto r = synth::generate(cfg);
    CHECK(r.train.class_names == std::vector<std::string>{"rest", "active"});
    CHECK(r.train.split == core::Split::Train);
    CHECK(r.eval.split == core::Split::Eval);

    std::set<std::string> ids;
    std::size_t n_class1 = 0;
    for (const core::Dataset* ds : {&r.train, &r.eval}) {
        for (const auto& w : ds->windows) {
            ids.insert(w.window_id);
            CHECK(w.length() == cfg.t);
            CHECK(w.sample_rate_hz == cfg.sample_rate_hz);
            CHECK_FALSE(w.has(core::Modality::ACC));
            CHECK(w.has(core::Modality::HR));
            CHECK(w.has(core::Modality::EDA));
            CHECK(w.has(core::Modality::TEMP));
            REQUIRE(w.label.has_value());
            n_class1 += static_cast<std::size_t>(*w.label == 1);
        }
    }
    const std::size_t total = static_cast<std::size_t>(cfg.n_subjects) * 2 * 3;
    CHECK(ids.size() == total);
    CHECK(r.train.windows.size() + r.eval.windows.size() == total);
    CHECK(n_class1 == total / 2);

    const auto sz = synth::generate(synth::default_config(synth::Task::Seizure, 5));
    for (const auto& w : sz.train.windows) CHECK(w.modalities().size() == 4);
}

TEST_CASE("train and eval subjects are disjoint") {
    auto cfg = synth::default_config(synth::Task::State, 11);
    const auto r = synth::generate(cfg);
    std::set<std::string> train_subjects, eval_subjects;
    for (const auto& w : r.train.windows) train_subjects.insert(w.subject_id);
    for (const auto& w : r.eval.windows) eval_subjects.insert(w.subject_id);
    CHECK(train_subjects.size() == 6); // 8 subjects, 0.75 train fraction
    CHECK(eval_subjects.size() == 2);
    for (const auto& s : eval_subjects) CHECK(train_subjects.count(s) == 0);

    cfg.n_subjects = 2;
    cfg.train_fraction = 0.9; // still leaves one eval subject
    const auto tiny = synth::generate(cfg);
    CHECK_FALSE(tiny.train.windows.empty());
    CHECK_FALSE(tiny.eval.windows.empty());
}

TEST_CASE("planted heart-rate shift shows up at its configured size") {
    auto cfg = synth::default_config(synth::Task::State, 3);
    cfg.hr_mean_shift = 50.0;
    cfg.hr_noise = 0.1;
    const auto r = synth::generate(cfg);
    const double m0 = core::pairwise_mean(pooled(r, core::Modality::HR, 0));
    const double m1 = core::pairwise_mean(pooled(r, core::Modality::HR, 1));
    CHECK(m1 - m0 == doctest::Approx(50.0).epsilon(0.02));
}

TEST_CASE("heart rate never goes below the physiological floor") {
    auto cfg = synth::default_config(synth::Task::State, 9);
    cfg.hr_mean_shift = 0.0;
    cfg.hr_noise = 40.0; // heavy-tailed enough to hit the clamp constantly
    const auto r = synth::generate(cfg);
    double lo = 1e300;
    for (int cls : {0, 1})
        for (double v : pooled(r, core::Modality::HR, cls)) lo = std::min(lo, v);
    CHECK(lo == 30.0);

    const auto sz = synth::generate(synth::default_config(synth::Task::Seizure, 9));
    for (int cls : {0, 1}) {
        for (double v : pooled(sz, core::Modality::ACC, cls)) CHECK(v >= 0.0);
        for (double v : pooled(sz, core::Modality::EDA, cls)) CHECK(v >= 0.05);
    }
}

TEST_CASE("seizure class carries movement bursts and widened variability") {
    const auto r = synth::generate(synth::default_config(synth::Task::Seizure, 1));
    const auto acc0 = pooled(r, core::Modality::ACC, 0);
    const auto acc1 = pooled(r, core::Modality::ACC, 1);
    CHECK(*std::max_element(acc0.begin(), acc0.end()) < 3.0);
    CHECK(*std::max_element(acc1.begin(), acc1.end()) > 4.0);

    const double sd0 = core::population_std(pooled(r, core::Modality::HR, 0));
    const double sd1 = core::population_std(pooled(r, core::Modality::HR, 1));
    CHECK(sd1 / sd0 > 1.25);
}

TEST_CASE("zero effect sizes leave the classes indistinguishable") {
    auto cfg = synth::default_config(synth::Task::State, 17);
    cfg.hr_mean_shift = 0.0;
    cfg.eda_tonic_shift = 0.0;
    cfg.n_subjects = 4;
    cfg.train_fraction = 0.5;
    cfg.windows_per_class = 6;
    cfg.t = 60;
    cfg.sample_rate_hz = 2.0;
    const auto null_run = synth::generate(cfg);
    CHECK(null_run.ground_truth.empty());

    nn::ModelSpec spec;
    spec.arch = nn::Arch::FCN;
    spec.hidden_size = 16;
    spec.num_layers = 1;
    spec.input_length = static_cast<int>(cfg.t);
    spec.input_channels = 3;
    spec.num_classes = 2;
    spec.seed = 17;
    nn::TrainConfig tc;
    tc.epochs = 12;
    tc.lr = 1e-3;
    tc.seed = 17;

    const auto null_model = nn::train(spec, null_run.train, null_run.eval, tc);
    const double null_acc = nn::evaluate_loss(null_model.model, null_run.eval).second;
    CHECK(null_acc <= 0.6);

    cfg.hr_mean_shift = 30.0; // same pipeline, planted signal back in
    const auto signal_run = synth::generate(cfg);
    const auto signal_model = nn::train(spec, signal_run.train, signal_run.eval, tc);
    const double signal_acc = nn::evaluate_loss(signal_model.model, signal_run.eval).second;
    CHECK(signal_acc >= 0.9);
}

TEST_CASE("ground truth lists exactly the planted components in canonical order") {
    CHECK(synth::generate(synth::default_config(synth::Task::State, 2)).ground_truth ==
          std::vector<std::string>{"HR.MeanOB", "EDA.TonicMeanOB"});
    CHECK(synth::generate(synth::default_config(synth::Task::Seizure, 2)).ground_truth ==
          std::vector<std::string>{"ACC.Outlier", "HR.MeanOB", "HR.Variability"});

    auto cfg = synth::default_config(synth::Task::State, 2);
    cfg.n_subjects = 2;
    cfg.windows_per_class = 1;
    cfg.temp_drift = 0.5;
    cfg.acc_outlier_rate = 2.0; // ignored: no ACC channel in this task
    const auto r = synth::generate(cfg);
    CHECK(r.ground_truth ==
          std::vector<std::string>{"HR.MeanOB", "EDA.TonicMeanOB", "TEMP.Rising"});
}

TEST_CASE("ground truth json layout") {
    const auto cfg = synth::default_config(synth::Task::Seizure, 0);
    const std::string text =
        synth::ground_truth_json(cfg, {"ACC.Outlier", "HR.MeanOB", "HR.Variability"});
    CHECK(text.back() == '\n');
    const auto j = nlohmann::json::parse(text);
    CHECK(j.at("task") == "seizure");
    CHECK(j.at("components") ==
          nlohmann::json::array({"ACC.Outlier", "HR.MeanOB", "HR.Variability"}));
}

} // TEST_SUITE

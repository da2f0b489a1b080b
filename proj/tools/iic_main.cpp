// Command-line front end: generate -> train -> explain -> evaluate -> report.
// Every subcommand writes its artifacts plus a manifest.json into --out.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "iic/baselines/fcshap.hpp"
#include "iic/baselines/lcbm.hpp"
#include "iic/baselines/shapley.hpp"
#include "iic/core/io.hpp"
#include "iic/core/ops.hpp"
#include "iic/core/types.hpp"
#include "iic/decomp/decompose.hpp"
#include "iic/errors.hpp"
#include "iic/eval/aggregate.hpp"
#include "iic/eval/faithfulness.hpp"
#include "iic/eval/masking.hpp"
#include "iic/eval/metrics.hpp"
#include "iic/nn/checkpoint.hpp"
#include "iic/nn/train.hpp"
#include "iic/synth/generate.hpp"
#include "iic/xai/explain.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

/// Flag combinations the parser cannot rule out statically (method-dependent
/// requirements); reported as usage errors, exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw iic::MissingInput("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw iic::Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw iic::Error("short write to '" + path.string() + "'");
}

void write_manifest(const fs::path& out_dir, const std::string& command, ordered_json config,
                    std::vector<std::string> inputs, std::vector<std::string> outputs,
                    std::uint64_t seed) {
    ordered_json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["seed"] = seed;
    j["config"] = std::move(config);
    j["inputs"] = std::move(inputs);
    std::sort(outputs.begin(), outputs.end());
    j["outputs"] = std::move(outputs);
    j["wall_clock_utc"] = utc_now();
    write_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

iic::core::Dataset load_ds(const fs::path& path, iic::core::Split split) {
    return iic::core::load_dataset(path, iic::core::format_from_extension(path), {}, split);
}

std::string baselines_to_json(const iic::core::BaselineSet& b) {
    ordered_json j;
    for (iic::core::Modality m : iic::core::kAllModalities)
        if (b.has(m)) j[std::string(iic::core::modality_name(m))] = b.at(m);
    return j.dump(2) + "\n";
}

iic::core::BaselineSet baselines_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw iic::SchemaMismatch("baseline file must be a JSON object");
    iic::core::BaselineSet b;
    for (const auto& [key, val] : j.items()) {
        const auto m = iic::core::modality_from_name(key);
        if (!m) throw iic::SchemaMismatch("unknown modality '" + key + "' in baseline file");
        if (!val.is_number()) throw iic::SchemaMismatch("baseline '" + key + "' must be a number");
        b.b[*m] = val.get<double>();
    }
    if (b.b.empty()) throw iic::SchemaMismatch("baseline file names no modality");
    return b;
}

/// Stable window-id -> file-stem mapping, shared by explain and evaluate.
std::map<std::string, std::string> id_file_stems(const iic::core::Dataset& ds) {
    std::map<std::string, std::string> stems;
    std::set<std::string> used;
    for (const auto& w : ds.windows) {
        std::string stem = w.window_id;
        for (char& c : stem)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-')
                c = '_';
        std::string candidate = stem;
        for (int n = 2; !used.insert(candidate).second; ++n)
            candidate = stem + "_" + std::to_string(n);
        stems[w.window_id] = candidate;
    }
    return stems;
}

enum class Method { Iic, Lcbm, Fcshap };

Method method_from_name(const std::string& name) {
    if (name == "iic") return Method::Iic;
    if (name == "lcbm") return Method::Lcbm;
    if (name == "fcshap") return Method::Fcshap;
    throw UsageError("unknown --method '" + name + "'");
}

double default_tau(Method m) { return m == Method::Fcshap ? 0.02 : 0.01; }

// ---------------------------------------------------------------- generate

struct GenerateOpts {
    std::string task = "state";
    std::uint64_t seed = 0;
    fs::path out;
    int subjects = 0;
    int windows_per_class = 0;
    std::size_t length = 0;
    double rate = 0.0;
    double train_fraction = 0.0;
    double hr_mean_shift = 0.0;
    double eda_tonic_shift = 0.0;
    double acc_outlier_rate = 0.0;
    double hr_var_scale = 0.0;
    double temp_drift = 0.0;
    bool include_acc = false;
    // which overridables were actually given on the command line / config
    std::set<std::string> given;
};

int cmd_generate(const GenerateOpts& o) {
    const auto task = iic::synth::task_from_name(o.task);
    if (!task) throw UsageError("unknown --task '" + o.task + "'");
    auto cfg = iic::synth::default_config(*task, o.seed);
    if (o.given.count("subjects")) cfg.n_subjects = o.subjects;
    if (o.given.count("windows-per-class")) cfg.windows_per_class = o.windows_per_class;
    if (o.given.count("length")) cfg.t = o.length;
    if (o.given.count("rate")) cfg.sample_rate_hz = o.rate;
    if (o.given.count("train-fraction")) cfg.train_fraction = o.train_fraction;
    if (o.given.count("hr-mean-shift")) cfg.hr_mean_shift = o.hr_mean_shift;
    if (o.given.count("eda-tonic-shift")) cfg.eda_tonic_shift = o.eda_tonic_shift;
    if (o.given.count("acc-outlier-rate")) cfg.acc_outlier_rate = o.acc_outlier_rate;
    if (o.given.count("hr-var-scale")) cfg.hr_var_scale = o.hr_var_scale;
    if (o.given.count("temp-drift")) cfg.temp_drift = o.temp_drift;
    if (o.given.count("include-acc")) cfg.include_acc = o.include_acc;

    const auto result = iic::synth::generate(cfg);
    fs::create_directories(o.out);
    iic::core::save_dataset(result.train, o.out / "train.json", iic::core::DataFormat::Json);
    iic::core::save_dataset(result.eval, o.out / "eval.json", iic::core::DataFormat::Json);
    write_file(o.out / "ground_truth.json",
               iic::synth::ground_truth_json(cfg, result.ground_truth));

    ordered_json config;
    config["task"] = o.task;
    config["n_subjects"] = cfg.n_subjects;
    config["windows_per_class"] = cfg.windows_per_class;
    config["t"] = cfg.t;
    config["sample_rate_hz"] = cfg.sample_rate_hz;
    config["train_fraction"] = cfg.train_fraction;
    config["include_acc"] = cfg.include_acc;
    config["hr_mean_shift"] = cfg.hr_mean_shift;
    config["eda_tonic_shift"] = cfg.eda_tonic_shift;
    config["acc_outlier_rate"] = cfg.acc_outlier_rate;
    config["hr_var_scale"] = cfg.hr_var_scale;
    config["temp_drift"] = cfg.temp_drift;
    write_manifest(o.out, "generate", std::move(config), {},
                   {"train.json", "eval.json", "ground_truth.json"}, cfg.seed);

    std::cout << "wrote " << result.train.size() << " train / " << result.eval.size()
              << " eval windows to " << o.out.string() << "\n";
    return 0;
}

// ------------------------------------------------------------------- train

struct TrainOpts {
    fs::path train_path, eval_path, out;
    std::string arch = "fcn";
    int hidden = 32;
    int layers = 1;
    int heads = 4;
    int epochs = 30;
    double lr = 1e-3;
    int batch = 16;
    int patience = 0;
    int restarts = 1;
    std::uint64_t seed = 0;
};

iic::nn::Arch arch_from_name(const std::string& name) {
    if (name == "fcn") return iic::nn::Arch::FCN;
    if (name == "lstm") return iic::nn::Arch::LSTM;
    if (name == "transformer") return iic::nn::Arch::TransformerEncoder;
    throw UsageError("unknown --arch '" + name + "'");
}

int cmd_train(const TrainOpts& o) {
    const auto train_ds = load_ds(o.train_path, iic::core::Split::Train);
    const auto eval_ds = load_ds(o.eval_path, iic::core::Split::Eval);
    if (train_ds.empty()) throw iic::EmptyDataset("training set has no windows");

    iic::nn::ModelSpec spec;
    spec.arch = arch_from_name(o.arch);
    spec.hidden_size = o.hidden;
    spec.num_layers = o.layers;
    spec.num_heads = o.heads;
    spec.input_length = static_cast<int>(train_ds.windows.front().length());
    spec.input_channels = static_cast<int>(train_ds.windows.front().modalities().size());
    spec.num_classes = static_cast<int>(train_ds.class_names.size());
    spec.seed = o.seed;

    iic::nn::TrainConfig tc;
    tc.lr = o.lr;
    tc.epochs = o.epochs;
    tc.batch_size = o.batch;
    tc.patience = o.patience;
    tc.restarts = o.restarts;
    tc.seed = o.seed;

    const auto result = iic::nn::train(spec, train_ds, eval_ds, tc);
    const auto baselines = iic::core::compute_baselines(train_ds);

    fs::create_directories(o.out);
    iic::nn::save_model(result.model, o.out / "model.json");
    write_file(o.out / "baselines.json", baselines_to_json(baselines));

    std::ostringstream history;
    history << "epoch,train_loss,train_acc,eval_loss,eval_acc\n";
    for (std::size_t i = 0; i < result.history.size(); ++i) {
        const auto& h = result.history[i];
        history << i << ',' << iic::core::format_double(h.train_loss) << ','
                << iic::core::format_double(h.train_acc) << ','
                << iic::core::format_double(h.eval_loss) << ','
                << iic::core::format_double(h.eval_acc) << '\n';
    }
    write_file(o.out / "history.csv", history.str());

    ordered_json config;
    config["arch"] = o.arch;
    config["hidden_size"] = o.hidden;
    config["num_layers"] = o.layers;
    config["num_heads"] = o.heads;
    config["epochs"] = o.epochs;
    config["lr"] = o.lr;
    config["batch_size"] = o.batch;
    config["patience"] = o.patience;
    config["restarts"] = o.restarts;
    write_manifest(o.out, "train", std::move(config),
                   {o.train_path.string(), o.eval_path.string()},
                   {"model.json", "baselines.json", "history.csv"}, o.seed);

    const auto [eval_loss, eval_acc] = iic::nn::evaluate_loss(result.model, eval_ds);
    std::cout << "best restart " << result.best_restart << " epoch " << result.best_epoch
              << "; eval loss " << iic::core::format_double(eval_loss) << ", eval acc "
              << iic::core::format_double(eval_acc) << "\n";
    return 0;
}

// ----------------------------------------------------------------- explain

struct ExplainOpts {
    fs::path model_path, baselines_path, data_path, train_path, out;
    std::string method = "iic";
    int epochs = 200;
    double lr = 1e-2;
    double max_deg = 0.01;
    double penalty = 25.0;
    double threshold = -1.0; // <0: per-method default
    std::string deg_stat = "mean";
    std::string representation = "probs";
    int jobs = 1;
    std::uint64_t seed = 0;
    bool dump_components = false;
};

void dump_window_components(const fs::path& out_dir, const std::string& stem,
                            const iic::core::MultimodalWindow& w,
                            const iic::core::BaselineSet& baselines) {
    const auto cs = iic::decomp::decompose(w, baselines);
    ordered_json comps = ordered_json::array();
    for (const auto& c : cs.components) {
        ordered_json jc;
        jc["name"] = c.name;
        jc["modality"] = std::string(iic::core::modality_name(c.modality));
        if (c.is_scalar) {
            jc["scalar"] = c.scalar;
        } else {
            jc["series"] = c.series;
        }
        comps.push_back(std::move(jc));
    }
    ordered_json j;
    j["window_id"] = w.window_id;
    j["components"] = std::move(comps);
    write_file(out_dir / (stem + ".components.json"), j.dump(2) + "\n");
}

int cmd_explain(const ExplainOpts& o) {
    const Method method = method_from_name(o.method);
    const double tau = o.threshold >= 0.0 ? o.threshold : default_tau(method);
    if (method != Method::Fcshap && o.baselines_path.empty())
        throw UsageError("--baselines is required for --method " + o.method);
    if (method != Method::Iic && o.train_path.empty())
        throw UsageError("--train is required for --method " + o.method);
    if (o.dump_components && o.baselines_path.empty())
        throw UsageError("--dump-components needs --baselines");

    const auto data = load_ds(o.data_path, iic::core::Split::Eval);
    fs::create_directories(o.out);

    ordered_json config;
    config["method"] = o.method;
    config["threshold"] = tau;

    std::vector<std::string> outputs = {"failures.json"};
    ordered_json failures = ordered_json::array();
    std::size_t n_explained = 0;

    if (data.empty()) {
        std::cerr << "warning: no windows to explain in '" << o.data_path.string() << "'\n";
    } else {
        const auto stems = id_file_stems(data);
        const auto baselines = o.baselines_path.empty()
                                   ? iic::core::BaselineSet{}
                                   : baselines_from_json(read_file(o.baselines_path));

        if (method == Method::Iic) {
            const auto model = iic::nn::load_model(o.model_path);
            iic::xai::IICConfig cfg;
            cfg.epochs = o.epochs;
            cfg.lr = o.lr;
            cfg.max_deg = o.max_deg;
            cfg.penalty = o.penalty;
            cfg.threshold = tau;
            if (o.deg_stat == "max") cfg.deg_stat = iic::xai::DegStat::Max;
            else if (o.deg_stat != "mean") throw UsageError("unknown --deg-stat '" + o.deg_stat + "'");
            if (o.representation == "logits")
                cfg.representation = iic::xai::Representation::Logits;
            else if (o.representation != "probs")
                throw UsageError("unknown --representation '" + o.representation + "'");

            const auto result = iic::xai::batch_explain(model, data, baselines, cfg, o.jobs);
            for (const auto& e : result.explanations) {
                const std::string& stem = stems.at(e.window_id);
                write_file(o.out / (stem + ".json"), iic::xai::explanation_to_json(e, cfg));
                outputs.push_back(stem + ".json");
            }
            n_explained = result.explanations.size();
            for (const auto& f : result.failures)
                failures.push_back({{"window_id", f.window_id}, {"message", f.message}});

            config["epochs"] = cfg.epochs;
            config["lr"] = cfg.lr;
            config["max_deg"] = cfg.max_deg;
            config["penalty"] = cfg.penalty;
            config["deg_stat"] = o.deg_stat;
            config["representation"] = o.representation;
            config["jobs"] = o.jobs;
        } else if (method == Method::Lcbm) {
            const auto train_ds = load_ds(o.train_path, iic::core::Split::Train);
            const auto model = iic::baselines::lcbm_fit(train_ds, baselines);
            const iic::eval::LcbmPredictor predictor(model, baselines);
            for (const auto& w : data.windows) {
                const std::string& stem = stems.at(w.window_id);
                write_file(o.out / (stem + ".json"),
                           iic::baselines::attribution_to_json(
                               "lcbm", w.window_id, predictor.predict(w), model.concept_names,
                               model.importances, tau));
                outputs.push_back(stem + ".json");
            }
            n_explained = data.size();
        } else {
            const auto train_ds = load_ds(o.train_path, iic::core::Split::Train);
            iic::baselines::FcshapConfig cfg;
            cfg.train.seed = o.seed;
            const auto model = iic::baselines::fcshap_fit(train_ds, data, cfg);
            for (const auto& w : data.windows) {
                const auto feats = iic::baselines::stat_features(w);
                const auto attr = model.shapley(feats.values);
                std::vector<double> magnitude(attr.phi.size());
                for (std::size_t i = 0; i < attr.phi.size(); ++i)
                    magnitude[i] = std::abs(attr.phi[i]);
                const std::string& stem = stems.at(w.window_id);
                write_file(o.out / (stem + ".json"),
                           iic::baselines::attribution_to_json(
                               "fcshap", w.window_id, model.predict(feats.values),
                               model.feature_names, magnitude, tau));
                outputs.push_back(stem + ".json");
            }
            n_explained = data.size();
        }

        if (o.dump_components) {
            for (const auto& w : data.windows) {
                dump_window_components(o.out, stems.at(w.window_id), w, baselines);
                outputs.push_back(stems.at(w.window_id) + ".components.json");
            }
        }
    }

    ordered_json summary;
    summary["n_windows"] = data.size();
    summary["n_explained"] = n_explained;
    summary["n_failed"] = failures.size();
    summary["failures"] = std::move(failures);
    write_file(o.out / "failures.json", summary.dump(2) + "\n");

    std::vector<std::string> inputs = {o.model_path.string(), o.data_path.string()};
    if (!o.baselines_path.empty()) inputs.push_back(o.baselines_path.string());
    if (!o.train_path.empty()) inputs.push_back(o.train_path.string());
    write_manifest(o.out, "explain", std::move(config), std::move(inputs), std::move(outputs),
                   o.seed);

    if (summary["n_failed"].get<std::size_t>() > 0)
        std::cerr << "warning: " << summary["n_failed"].get<std::size_t>() << " of "
                  << data.size() << " windows failed; see failures.json\n";
    std::cout << "explained " << n_explained << "/" << data.size() << " windows -> "
              << o.out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
    fs::path model_path, baselines_path, data_path, train_path, explanations, out;
    std::string method = "iic";
    std::size_t fidelity_k = 1;
    double sufficiency_tau = -1.0; // <0: per-method default
    std::uint64_t seed = 0;
};

/// Per-method predictor + masker pair over the same fitted model.
struct MethodStack {
    std::unique_ptr<iic::eval::WindowPredictor> predictor;
    std::unique_ptr<iic::eval::Masker> masker;
    // owned fitted models (referenced by the two interfaces above)
    std::shared_ptr<void> owned;
};

MethodStack build_stack(Method method, const fs::path& model_path,
                        const fs::path& baselines_path, const fs::path& train_path,
                        const iic::core::Dataset& data, std::uint64_t seed) {
    MethodStack s;
    if (method == Method::Iic) {
        auto model = std::make_shared<iic::nn::Model>(iic::nn::load_model(model_path));
        const auto baselines = baselines_from_json(read_file(baselines_path));
        const auto names = iic::decomp::decompose(data.windows.front(), baselines).names();
        s.predictor = std::make_unique<iic::eval::NnPredictor>(*model);
        s.masker = std::make_unique<iic::eval::IicMasker>(*model, baselines, names);
        s.owned = std::move(model);
    } else if (method == Method::Lcbm) {
        const auto baselines = baselines_from_json(read_file(baselines_path));
        const auto train_ds = load_ds(train_path, iic::core::Split::Train);
        auto model =
            std::make_shared<iic::baselines::LcbmModel>(iic::baselines::lcbm_fit(train_ds, baselines));
        s.predictor = std::make_unique<iic::eval::LcbmPredictor>(*model, baselines);
        s.masker = std::make_unique<iic::eval::LcbmMasker>(*model, baselines);
        s.owned = std::move(model);
    } else {
        const auto train_ds = load_ds(train_path, iic::core::Split::Train);
        iic::baselines::FcshapConfig cfg;
        cfg.train.seed = seed;
        auto model = std::make_shared<iic::baselines::FcshapModel>(
            iic::baselines::fcshap_fit(train_ds, data, cfg));
        s.predictor = std::make_unique<iic::eval::FcshapPredictor>(*model);
        s.masker = std::make_unique<iic::eval::FcshapMasker>(*model);
        s.owned = std::move(model);
    }
    return s;
}

int cmd_evaluate(const EvaluateOpts& o) {
    const Method method = method_from_name(o.method);
    const double tau = o.sufficiency_tau >= 0.0 ? o.sufficiency_tau : default_tau(method);
    if (method != Method::Fcshap && o.baselines_path.empty())
        throw UsageError("--baselines is required for --method " + o.method);
    if (method != Method::Iic && o.train_path.empty())
        throw UsageError("--train is required for --method " + o.method);

    const auto data = load_ds(o.data_path, iic::core::Split::Eval);
    if (data.empty()) throw iic::EmptyEval("no windows in '" + o.data_path.string() + "'");
    const auto stack =
        build_stack(method, o.model_path, o.baselines_path, o.train_path, data, o.seed);

    const auto metrics = iic::eval::evaluate_classifier(
        *stack.predictor, data, static_cast<int>(data.class_names.size()));

    // faithfulness runs on the subset of windows that have an explanation file
    const auto stems = id_file_stems(data);
    iic::core::Dataset explained;
    explained.split = data.split;
    explained.class_names = data.class_names;
    std::vector<std::vector<double>> importances;
    const auto& names = stack.masker->names();
    for (const auto& w : data.windows) {
        const fs::path file = o.explanations / (stems.at(w.window_id) + ".json");
        if (!fs::exists(file)) continue;
        const auto j = nlohmann::json::parse(read_file(file));
        if (!j.contains("weights"))
            throw iic::SchemaMismatch("'" + file.string() + "' lacks a weights object");
        std::vector<double> row(names.size());
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (!j["weights"].contains(names[i]))
                throw iic::SchemaMismatch("'" + file.string() + "' lacks weight '" + names[i] +
                                          "'");
            row[i] = j["weights"][names[i]].get<double>();
        }
        importances.push_back(std::move(row));
        explained.windows.push_back(w);
    }
    if (explained.empty())
        throw iic::MissingInput("no explanation files in '" + o.explanations.string() +
                                "' match '" + o.data_path.string() + "'");

    const auto fid = iic::eval::fidelity(*stack.masker, explained, importances, o.fidelity_k);
    const auto suf = iic::eval::sufficiency(*stack.masker, explained, importances, tau);

    std::vector<iic::eval::MetricRow> rows = {
        {"accuracy", "", metrics.accuracy},
        {"f1", "", metrics.f1},
        {"fidelity_flip_rate", std::to_string(o.fidelity_k), fid.flip_rate},
        {"sufficiency_flip_rate", iic::core::format_double(tau), suf.flip_rate},
        {"n_eval", "", static_cast<double>(data.size())},
        {"n_explained", "", static_cast<double>(explained.size())},
    };
    fs::create_directories(o.out);
    write_file(o.out / "metrics.csv", iic::eval::metrics_csv(rows));

    ordered_json config;
    config["method"] = o.method;
    config["fidelity_k"] = o.fidelity_k;
    config["sufficiency_tau"] = tau;
    std::vector<std::string> inputs = {o.data_path.string(), o.explanations.string()};
    if (!o.model_path.empty()) inputs.push_back(o.model_path.string());
    if (!o.baselines_path.empty()) inputs.push_back(o.baselines_path.string());
    if (!o.train_path.empty()) inputs.push_back(o.train_path.string());
    write_manifest(o.out, "evaluate", std::move(config), std::move(inputs), {"metrics.csv"},
                   o.seed);

    std::cout << "accuracy " << iic::core::format_double(metrics.accuracy) << ", f1 "
              << iic::core::format_double(metrics.f1) << ", fidelity@" << o.fidelity_k << " "
              << iic::core::format_double(fid.flip_rate) << ", sufficiency@"
              << iic::core::format_double(tau) << " " << iic::core::format_double(suf.flip_rate)
              << "\n";
    return 0;
}

// ------------------------------------------------------------------ report

struct ReportOpts {
    fs::path model_path, baselines_path, data_path, explanations, out;
    std::string method = "iic";
    std::uint64_t seed = 0;
};

std::string importance_csv(const std::vector<iic::baselines::RankedImportance>& ranking) {
    std::ostringstream out;
    out << "component,mean_importance,rank\n";
    for (std::size_t i = 0; i < ranking.size(); ++i)
        out << ranking[i].name << ',' << iic::core::format_double(ranking[i].value) << ','
            << i + 1 << '\n';
    return out.str();
}

iic::xai::Explanation explanation_from_json(const std::string& text) {
    const auto j = ordered_json::parse(text);
    iic::xai::Explanation e;
    e.window_id = j.at("window_id").get<std::string>();
    e.predicted_class = j.at("predicted_class").get<int>();
    e.degradation_final = j.at("degradation_final").get<double>();
    for (const auto& [name, val] : j.at("weights").items()) {
        e.component_names.push_back(name);
        e.w.w.push_back(val.get<double>());
    }
    for (const auto& [name, val] : j.at("binary").items()) {
        (void)name;
        e.binary.push_back(val.get<int>() != 0);
    }
    if (e.binary.size() != e.w.size())
        throw iic::SchemaMismatch("weights and binary disagree in length");
    return e;
}

int cmd_report(const ReportOpts& o) {
    const Method method = method_from_name(o.method);
    fs::create_directories(o.out);
    ordered_json config;
    config["method"] = o.method;

    if (method == Method::Iic) {
        if (o.model_path.empty() || o.baselines_path.empty() || o.data_path.empty())
            throw UsageError("--model, --baselines and --data are required for --method iic");
        const auto model = iic::nn::load_model(o.model_path);
        const auto baselines = baselines_from_json(read_file(o.baselines_path));
        const auto data = load_ds(o.data_path, iic::core::Split::Eval);
        if (data.empty()) throw iic::EmptyEval("no windows in '" + o.data_path.string() + "'");

        const auto stems = id_file_stems(data);
        std::vector<iic::xai::Explanation> explanations;
        for (const auto& w : data.windows) {
            const fs::path file = o.explanations / (stems.at(w.window_id) + ".json");
            if (fs::exists(file)) explanations.push_back(explanation_from_json(read_file(file)));
        }
        if (explanations.empty())
            throw iic::MissingInput("no explanation files in '" + o.explanations.string() + "'");

        const iic::eval::NnPredictor predictor(model);
        std::vector<int> predictions;
        predictions.reserve(data.size());
        for (const auto& w : data.windows) predictions.push_back(predictor.predict(w));

        const auto global = iic::eval::aggregate_global(explanations, data, predictions, baselines);
        write_file(o.out / "global_importance.csv", importance_csv(global.ranking));
        write_file(o.out / "distributions.csv",
                   iic::eval::distributions_csv(global.distributions));
        write_manifest(o.out, "report", std::move(config),
                       {o.explanations.string(), o.data_path.string(), o.model_path.string(),
                        o.baselines_path.string()},
                       {"global_importance.csv", "distributions.csv"}, o.seed);
        std::cout << "aggregated " << explanations.size() << " explanations over "
                  << global.component_names.size() << " components -> " << o.out.string() << "\n";
        return 0;
    }

    // feature-space methods: mean per-feature importance over the explanation files
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(o.explanations)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > 5 && name.ends_with(".json") &&
            name != "failures.json" && name != "manifest.json" &&
            !name.ends_with(".components.json"))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw iic::MissingInput("no explanation files in '" + o.explanations.string() + "'");

    std::vector<std::string> names;
    std::vector<double> sums;
    for (const auto& file : files) {
        const auto j = ordered_json::parse(read_file(file));
        if (!j.contains("weights"))
            throw iic::SchemaMismatch("'" + file.string() + "' lacks a weights object");
        if (names.empty()) {
            for (const auto& [name, val] : j["weights"].items()) {
                (void)val;
                names.push_back(name);
            }
            sums.assign(names.size(), 0.0);
        }
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (!j["weights"].contains(names[i]))
                throw iic::SchemaMismatch("'" + file.string() + "' lacks weight '" + names[i] +
                                          "'");
            sums[i] += j["weights"][names[i]].get<double>();
        }
    }
    for (double& s : sums) s /= static_cast<double>(files.size());
    const auto ranking = iic::baselines::ranked_importances(names, sums);
    write_file(o.out / "global_importance.csv", importance_csv(ranking));
    write_manifest(o.out, "report", std::move(config), {o.explanations.string()},
                   {"global_importance.csv"}, o.seed);
    std::cout << "aggregated " << files.size() << " explanations over " << names.size()
              << " features -> " << o.out.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interpretable-component pipeline for multimodal wearable windows"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read flag defaults from a key=value file (sections per subcommand)");

    GenerateOpts gen;
    auto* sub_gen = app.add_subcommand("generate", "Write synthetic train/eval datasets");
    sub_gen->add_option("--task", gen.task, "Dataset family")
        ->check(CLI::IsMember({"state", "seizure"}))
        ->required();
    sub_gen->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
    sub_gen->add_option("--out", gen.out, "Output directory")->required();
    const std::vector<std::pair<std::string, CLI::Option*>> gen_overrides = {
        {"subjects", sub_gen->add_option("--subjects", gen.subjects, "Number of subjects")},
        {"windows-per-class",
         sub_gen->add_option("--windows-per-class", gen.windows_per_class,
                             "Windows per class per subject")},
        {"length", sub_gen->add_option("--length", gen.length, "Samples per window")},
        {"rate", sub_gen->add_option("--rate", gen.rate, "Sample rate in Hz")},
        {"train-fraction",
         sub_gen->add_option("--train-fraction", gen.train_fraction, "Subject train fraction")},
        {"hr-mean-shift",
         sub_gen->add_option("--hr-mean-shift", gen.hr_mean_shift, "Class-1 HR shift in bpm")},
        {"eda-tonic-shift",
         sub_gen->add_option("--eda-tonic-shift", gen.eda_tonic_shift,
                             "Class-1 EDA tonic shift in uS")},
        {"acc-outlier-rate",
         sub_gen->add_option("--acc-outlier-rate", gen.acc_outlier_rate,
                             "Expected class-1 movement bursts")},
        {"hr-var-scale",
         sub_gen->add_option("--hr-var-scale", gen.hr_var_scale, "Class-1 HR noise multiplier")},
        {"temp-drift",
         sub_gen->add_option("--temp-drift", gen.temp_drift, "Class-1 TEMP drift in degC/min")},
        {"include-acc", sub_gen->add_flag("--include-acc", gen.include_acc, "Force ACC channel")},
    };

    TrainOpts tr;
    auto* sub_tr = app.add_subcommand("train", "Train a window classifier");
    sub_tr->add_option("--train", tr.train_path, "Training dataset (json/csv)")
        ->check(CLI::ExistingFile)
        ->required();
    sub_tr->add_option("--eval", tr.eval_path, "Held-out dataset for checkpoint selection")
        ->check(CLI::ExistingFile)
        ->required();
    sub_tr->add_option("--arch", tr.arch, "Classifier architecture")
        ->check(CLI::IsMember({"fcn", "lstm", "transformer"}))
        ->capture_default_str();
    sub_tr->add_option("--hidden", tr.hidden, "Hidden size")->capture_default_str();
    sub_tr->add_option("--layers", tr.layers, "Hidden/recurrent/encoder layers")
        ->capture_default_str();
    sub_tr->add_option("--heads", tr.heads, "Attention heads")->capture_default_str();
    sub_tr->add_option("--epochs", tr.epochs, "Training epochs")->capture_default_str();
    sub_tr->add_option("--lr", tr.lr, "Learning rate")->capture_default_str();
    sub_tr->add_option("--batch", tr.batch, "Batch size")->capture_default_str();
    sub_tr->add_option("--patience", tr.patience, "Early-stop patience (0 = off)")
        ->capture_default_str();
    sub_tr->add_option("--restarts", tr.restarts, "Independent restarts")->capture_default_str();
    sub_tr->add_option("--seed", tr.seed, "Init/shuffle seed")->capture_default_str();
    sub_tr->add_option("--out", tr.out, "Output directory")->required();

    ExplainOpts ex;
    auto* sub_ex = app.add_subcommand("explain", "Explain eval windows");
    sub_ex->add_option("--model", ex.model_path, "Trained checkpoint")
        ->check(CLI::ExistingFile)
        ->required();
    sub_ex->add_option("--data", ex.data_path, "Windows to explain")
        ->check(CLI::ExistingFile)
        ->required();
    sub_ex->add_option("--baselines", ex.baselines_path, "Per-modality baseline file")
        ->check(CLI::ExistingFile);
    sub_ex->add_option("--train", ex.train_path, "Training dataset (surrogate methods)")
        ->check(CLI::ExistingFile);
    sub_ex->add_option("--method", ex.method, "Explanation method")
        ->check(CLI::IsMember({"iic", "lcbm", "fcshap"}))
        ->capture_default_str();
    sub_ex->add_option("--epochs", ex.epochs, "Weight-optimization epochs")->capture_default_str();
    sub_ex->add_option("--lr", ex.lr, "Weight-optimization learning rate")->capture_default_str();
    sub_ex->add_option("--max-deg", ex.max_deg, "Allowed output degradation")
        ->capture_default_str();
    sub_ex->add_option("--penalty", ex.penalty, "Degradation penalty strength")
        ->capture_default_str();
    sub_ex->add_option("--threshold", ex.threshold,
                       "Importance cutoff for the binary view (default per method)");
    sub_ex->add_option("--deg-stat", ex.deg_stat, "Degradation statistic")
        ->check(CLI::IsMember({"mean", "max"}))
        ->capture_default_str();
    sub_ex->add_option("--representation", ex.representation, "Degradation representation")
        ->check(CLI::IsMember({"probs", "logits"}))
        ->capture_default_str();
    sub_ex->add_option("--jobs", ex.jobs, "Parallel explanation workers")->capture_default_str();
    sub_ex->add_option("--seed", ex.seed, "Surrogate training seed")->capture_default_str();
    sub_ex->add_flag("--dump-components", ex.dump_components,
                     "Also write each window's decomposition");
    sub_ex->add_option("--out", ex.out, "Output directory")->required();

    EvaluateOpts ev;
    auto* sub_ev = app.add_subcommand("evaluate", "Classification + faithfulness metrics");
    sub_ev->add_option("--model", ev.model_path, "Trained checkpoint")->check(CLI::ExistingFile);
    sub_ev->add_option("--baselines", ev.baselines_path, "Per-modality baseline file")
        ->check(CLI::ExistingFile);
    sub_ev->add_option("--data", ev.data_path, "Labeled eval dataset")
        ->check(CLI::ExistingFile)
        ->required();
    sub_ev->add_option("--train", ev.train_path, "Training dataset (surrogate methods)")
        ->check(CLI::ExistingFile);
    sub_ev->add_option("--explanations", ev.explanations, "Directory written by explain")
        ->check(CLI::ExistingDirectory)
        ->required();
    sub_ev->add_option("--method", ev.method, "Explanation method")
        ->check(CLI::IsMember({"iic", "lcbm", "fcshap"}))
        ->capture_default_str();
    sub_ev->add_option("--fidelity-k", ev.fidelity_k, "Top-k inputs masked per window")
        ->capture_default_str();
    sub_ev->add_option("--sufficiency-tau", ev.sufficiency_tau,
                       "Mask inputs below this importance (default per method)");
    sub_ev->add_option("--seed", ev.seed, "Surrogate training seed")->capture_default_str();
    sub_ev->add_option("--out", ev.out, "Output directory")->required();

    ReportOpts rep;
    auto* sub_rep = app.add_subcommand("report", "Aggregate explanations into global tables");
    sub_rep->add_option("--explanations", rep.explanations, "Directory written by explain")
        ->check(CLI::ExistingDirectory)
        ->required();
    sub_rep->add_option("--data", rep.data_path, "Eval dataset")->check(CLI::ExistingFile);
    sub_rep->add_option("--model", rep.model_path, "Trained checkpoint")
        ->check(CLI::ExistingFile);
    sub_rep->add_option("--baselines", rep.baselines_path, "Per-modality baseline file")
        ->check(CLI::ExistingFile);
    sub_rep->add_option("--method", rep.method, "Explanation method")
        ->check(CLI::IsMember({"iic", "lcbm", "fcshap"}))
        ->capture_default_str();
    sub_rep->add_option("--seed", rep.seed, "Recorded in the manifest")->capture_default_str();
    sub_rep->add_option("--out", rep.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sub_gen->parsed()) {
            for (const auto& [key, opt] : gen_overrides)
                if (opt->count() > 0) gen.given.insert(key);
            return cmd_generate(gen);
        }
        if (sub_tr->parsed()) return cmd_train(tr);
        if (sub_ex->parsed()) return cmd_explain(ex);
        if (sub_ev->parsed()) return cmd_evaluate(ev);
        if (sub_rep->parsed()) return cmd_report(rep);
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\nsee 'iic --help'\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

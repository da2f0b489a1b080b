#include "iic/baselines/fcshap.hpp"

#include <algorithm>
#include <utility>

#include "iic/errors.hpp"

namespace iic::baselines {
namespace {

/// Feature vectors ride through the window-based trainer as single-channel
/// windows (the channel choice is arbitrary; ACC accepts any finite values).
core::MultimodalWindow feature_window(const core::MultimodalWindow& src,
                                      const std::vector<double>& std_features) {
    core::MultimodalWindow w;
    w.window_id = src.window_id;
    w.subject_id = src.subject_id;
    w.label = src.label;
    w.sample_rate_hz = 1.0;
    w.channels[core::Modality::ACC] = std_features;
    return w;
}

core::Dataset feature_dataset(const core::Dataset& src, const Standardizer& stand,
                              std::vector<std::string>* names) {
    core::Dataset out;
    out.split = src.split;
    out.class_names = src.class_names;
    out.windows.reserve(src.windows.size());
    for (const auto& w : src.windows) {
        StatFeatureVector f = stat_features(w);
        if (names && names->empty()) *names = f.names;
        if (names && f.names != *names)
            throw DimensionMismatch("windows produce different feature sets");
        out.windows.push_back(feature_window(w, stand.transform(f.values)));
    }
    return out;
}

} // namespace

std::vector<double> FcshapModel::predict_probs(const std::vector<double>& raw_features) const {
    const std::vector<double> std_f = standardizer.transform(raw_features);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(std_f.size()), 1);
    for (std::size_t i = 0; i < std_f.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = std_f[i];
    return model.forward(x).probs;
}

int FcshapModel::predict(const std::vector<double>& raw_features) const {
    const std::vector<double> p = predict_probs(raw_features);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

ShapleyAttribution FcshapModel::shapley(const std::vector<double>& raw_features) const {
    const int cls = predict(raw_features);
    const FeatureFunction f = [this, cls](const std::vector<double>& v) {
        return predict_probs(v)[static_cast<std::size_t>(cls)];
    };
    return exact_shapley(f, raw_features, feature_train_means);
}

FcshapModel fcshap_fit(const core::Dataset& train, const core::Dataset& eval,
                       const FcshapConfig& cfg) {
    if (train.windows.empty()) throw EmptyDataset("fcshap fit needs train windows");
    core::validate_dataset(train);
    if (!eval.windows.empty()) core::validate_dataset(eval);

    std::vector<std::vector<double>> rows;
    rows.reserve(train.windows.size());
    for (const auto& w : train.windows) rows.push_back(stat_features(w).values);
    const Standardizer stand = fit_standardizer(rows);

    std::vector<std::string> names;
    const core::Dataset train_fw = feature_dataset(train, stand, &names);
    // with no held-out split, checkpoint selection falls back to train loss
    const core::Dataset eval_fw =
        eval.windows.empty() ? train_fw : feature_dataset(eval, stand, &names);

    int max_label = 0;
    for (const auto& w : train.windows)
        if (w.label) max_label = std::max(max_label, *w.label);
    const int classes = train.class_names.empty() ? max_label + 1
                                                  : static_cast<int>(train.class_names.size());

    nn::ModelSpec spec;
    spec.arch = nn::Arch::FCN;
    spec.hidden_size = cfg.hidden_size;
    spec.num_layers = cfg.num_layers;
    spec.input_length = static_cast<int>(names.size());
    spec.input_channels = 1;
    spec.num_classes = classes;
    spec.seed = cfg.train.seed;

    nn::TrainResult result = nn::train(spec, train_fw, eval_fw, cfg.train);
    return FcshapModel{std::move(names), stand, stand.mean, std::move(result.model)};
}

std::vector<RankedImportance> global_importances(const std::vector<ShapleyAttribution>& attrs,
                                                 const std::vector<std::string>& names) {
    return ranked_importances(names, mean_abs_phi(attrs, names.size()));
}

} // namespace iic::baselines

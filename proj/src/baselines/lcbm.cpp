#include "iic/baselines/lcbm.hpp"

#include <algorithm>
#include <cmath>

#include "iic/core/numeric.hpp"
#include "iic/decomp/decompose.hpp"
#include "iic/errors.hpp"
#include "iic/nn/adam.hpp"

namespace iic::baselines {
namespace {

int resolve_num_classes(const core::Dataset& ds) {
    int max_label = -1;
    for (const auto& w : ds.windows) {
        if (!w.label) throw InvalidConfig("window '" + w.window_id + "' has no label");
        max_label = std::max(max_label, *w.label);
    }
    return ds.class_names.empty() ? max_label + 1 : static_cast<int>(ds.class_names.size());
}

void check_labels(const std::vector<int>& labels, int k) {
    if (k < 2) throw InvalidConfig("need at least two classes");
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int label : labels) {
        if (label < 0 || label >= k)
            throw InvalidConfig("label " + std::to_string(label) + " outside [0, " +
                                std::to_string(k) + ")");
        ++counts[static_cast<std::size_t>(label)];
    }
    for (int c = 0; c < k; ++c)
        if (counts[static_cast<std::size_t>(c)] == 0)
            throw InvalidConfig("class " + std::to_string(c) + " absent from the train split");
}

Eigen::VectorXd softmax_row(const Eigen::VectorXd& z) {
    const double m = z.maxCoeff();
    Eigen::VectorXd e = (z.array() - m).exp();
    return e / e.sum();
}

} // namespace

std::vector<double> LcbmModel::predict_probs(const std::vector<double>& raw_concepts) const {
    const std::vector<double> std_c = standardizer.transform(raw_concepts);
    const Eigen::Map<const Eigen::VectorXd> x(std_c.data(),
                                              static_cast<Eigen::Index>(std_c.size()));
    const Eigen::VectorXd p = softmax_row(coef * x + intercept);
    return std::vector<double>(p.data(), p.data() + p.size());
}

int LcbmModel::predict(const std::vector<double>& raw_concepts) const {
    const std::vector<double> p = predict_probs(raw_concepts);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

LcbmModel lcbm_fit_concepts(const std::vector<std::vector<double>>& rows,
                            const std::vector<int>& labels,
                            const std::vector<std::string>& names, int num_classes,
                            const LcbmConfig& cfg) {
    if (rows.empty()) throw EmptyDataset("lcbm fit needs concept rows");
    if (rows.size() != labels.size())
        throw DimensionMismatch("concept rows and labels differ in length");
    if (!(cfg.l2 >= 0.0) || !(cfg.lr > 0.0) || cfg.iters < 1)
        throw InvalidConfig("lcbm fit settings must be positive");
    for (const auto& r : rows)
        if (r.size() != names.size()) throw DimensionMismatch("concept row width != names");
    check_labels(labels, num_classes);

    LcbmModel m;
    m.decomp = cfg.decomp;
    m.num_classes = num_classes;
    m.concept_names = names;
    m.standardizer = fit_standardizer(rows);
    m.concept_train_means = m.standardizer.mean;

    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index f = static_cast<Eigen::Index>(names.size());
    const Eigen::Index k = num_classes;
    Eigen::MatrixXd x(n, f);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::vector<double> std_row =
            m.standardizer.transform(rows[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < f; ++j) x(i, j) = std_row[static_cast<std::size_t>(j)];
    }
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, k);
    for (Eigen::Index i = 0; i < n; ++i) y(i, labels[static_cast<std::size_t>(i)]) = 1.0;

    // flat parameter block [coef col-major | intercept] driven by the shared
    // Adam stepper; zero init makes the convex fit deterministic
    const std::size_t wn = static_cast<std::size_t>(k * f);
    std::vector<double> params(wn + static_cast<std::size_t>(k), 0.0);
    std::vector<double> grads(params.size());
    nn::AdamState adam;
    const nn::AdamConfig adam_cfg{cfg.lr, 0.9, 0.999, 1e-8};

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, f);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
    for (int it = 0; it < cfg.iters; ++it) {
        Eigen::MatrixXd z = x * w.transpose();
        z.rowwise() += b.transpose();
        Eigen::MatrixXd p(n, k);
        for (Eigen::Index i = 0; i < n; ++i)
            p.row(i) = softmax_row(z.row(i).transpose()).transpose();

        const Eigen::MatrixXd delta = (p - y) / static_cast<double>(n);
        Eigen::MatrixXd gw = delta.transpose() * x + cfg.l2 * w;
        const Eigen::VectorXd gb = delta.colwise().sum().transpose();
        for (Eigen::Index j = 0; j < f; ++j)
            if (m.standardizer.stddev[static_cast<std::size_t>(j)] == 0.0) gw.col(j).setZero();

        Eigen::Map<Eigen::MatrixXd>(grads.data(), k, f) = gw;
        Eigen::Map<Eigen::VectorXd>(grads.data() + wn, k) = gb;
        nn::adam_step(params, grads, adam, adam_cfg);
        w = Eigen::Map<const Eigen::MatrixXd>(params.data(), k, f);
        b = Eigen::Map<const Eigen::VectorXd>(params.data() + wn, k);
        for (Eigen::Index j = 0; j < f; ++j)
            if (m.standardizer.stddev[static_cast<std::size_t>(j)] == 0.0) w.col(j).setZero();
    }

    m.coef = std::move(w);
    m.intercept = std::move(b);

    m.importances.assign(static_cast<std::size_t>(f), 0.0);
    for (Eigen::Index j = 0; j < f; ++j)
        m.importances[static_cast<std::size_t>(j)] = m.coef.col(j).cwiseAbs().sum();
    const double total = core::pairwise_sum(m.importances);
    if (total > 0.0)
        for (double& v : m.importances) v /= total;
    return m;
}

LcbmModel lcbm_fit(const core::Dataset& train, const core::BaselineSet& baselines,
                   const LcbmConfig& cfg) {
    if (train.windows.empty()) throw EmptyDataset("lcbm fit needs train windows");
    core::validate_dataset(train);
    const int k = resolve_num_classes(train);

    std::vector<std::vector<double>> rows;
    rows.reserve(train.windows.size());
    std::vector<int> labels;
    labels.reserve(train.windows.size());
    std::vector<std::string> names;
    for (const auto& w : train.windows) {
        const auto cs = decomp::decompose(w, baselines, cfg.decomp);
        ConceptVector c = concept_vector(cs);
        if (names.empty()) names = c.names;
        if (c.names != names)
            throw DimensionMismatch("windows decompose into different concept sets");
        rows.push_back(std::move(c.values));
        labels.push_back(*w.label);
    }
    return lcbm_fit_concepts(rows, labels, names, k, cfg);
}

std::vector<RankedImportance> global_importances(const LcbmModel& model) {
    return ranked_importances(model.concept_names, model.importances);
}

} // namespace iic::baselines

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "iic/baselines/features.hpp"
#include "iic/baselines/shapley.hpp"
#include "iic/core/types.hpp"
#include "iic/decomp/component_set.hpp"

namespace iic::baselines {

struct LcbmConfig {
    double l2 = 1e-3;
    double lr = 0.05;
    int iters = 800;
    decomp::DecompConfig decomp;
};

/// Linear concept-bottleneck classifier: softmax regression over
/// standardized concept vectors. Its explanation is global-only, read off
/// the coefficients.
struct LcbmModel {
    std::vector<std::string> concept_names;
    Standardizer standardizer;
    std::vector<double> concept_train_means; // raw scale, masking baseline
    Eigen::MatrixXd coef;                    // classes x features, standardized inputs
    Eigen::VectorXd intercept;
    std::vector<double> importances;         // sum_c |coef|, normalized to sum 1
    int num_classes = 2;
    decomp::DecompConfig decomp;

    std::vector<double> predict_probs(const std::vector<double>& raw_concepts) const;
    int predict(const std::vector<double>& raw_concepts) const;
};

/// Deterministic full-batch fit (Adam on the convex ridge objective, zero
/// init). Zero-variance concepts keep coefficient exactly 0. Throws
/// InvalidConfig on unlabeled windows or missing classes, EmptyDataset.
LcbmModel lcbm_fit(const core::Dataset& train, const core::BaselineSet& baselines,
                   const LcbmConfig& cfg = {});

/// Same fit over already-extracted concept rows (one row per window).
LcbmModel lcbm_fit_concepts(const std::vector<std::vector<double>>& rows,
                            const std::vector<int>& labels,
                            const std::vector<std::string>& names, int num_classes,
                            const LcbmConfig& cfg = {});

std::vector<RankedImportance> global_importances(const LcbmModel& model);

} // namespace iic::baselines

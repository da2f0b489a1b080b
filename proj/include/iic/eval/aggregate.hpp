#pragma once

#include <string>
#include <vector>

#include "iic/baselines/shapley.hpp"
#include "iic/core/types.hpp"
#include "iic/decomp/component_set.hpp"
#include "iic/xai/explain.hpp"

namespace iic::eval {

/// Dataset-level view of a set of per-window explanations: mean component
/// importance, the descending ranking, and plot-ready distributions of
/// per-window component summaries split by true-positive / true-negative
/// outcome (only windows where the component carried weight contribute).
struct GlobalExplanation {
    std::vector<std::string> component_names;
    std::vector<double> mean_importance;
    std::vector<baselines::RankedImportance> ranking;

    struct DistRow {
        std::string component;
        std::string group; // "tp" or "tn"
        double value = 0.0;
    };
    std::vector<DistRow> distributions;
};

/// `predictions[i]` must correspond to `eval_ds.windows[i]`; explanations
/// are matched to windows by window_id. Binary tasks only for the tp/tn
/// distribution split (other windows are skipped). Throws EmptyEval,
/// DimensionMismatch, MissingInput on an unmatched window_id.
GlobalExplanation aggregate_global(const std::vector<xai::Explanation>& explanations,
                                   const core::Dataset& eval_ds,
                                   const std::vector<int>& predictions,
                                   const core::BaselineSet& baselines,
                                   const decomp::DecompConfig& cfg = {});

struct MetricRow {
    std::string metric;
    std::string param; // k or tau rendering, empty when not applicable
    double value = 0.0;
};

/// "metric,param,value" CSV with canonical shortest-round-trip numbers.
std::string metrics_csv(const std::vector<MetricRow>& rows);

/// "component,group,value" CSV of the distribution rows.
std::string distributions_csv(const std::vector<GlobalExplanation::DistRow>& rows);

} // namespace iic::eval

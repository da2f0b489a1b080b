#include "iic/eval/aggregate.hpp"

#include <map>
#include <sstream>

#include "iic/core/io.hpp"
#include "iic/core/numeric.hpp"
#include "iic/decomp/decompose.hpp"
#include "iic/errors.hpp"

namespace iic::eval {

GlobalExplanation aggregate_global(const std::vector<xai::Explanation>& explanations,
                                   const core::Dataset& eval_ds,
                                   const std::vector<int>& predictions,
                                   const core::BaselineSet& baselines,
                                   const decomp::DecompConfig& cfg) {
    if (explanations.empty()) throw EmptyEval("no explanations to aggregate");
    if (predictions.size() != eval_ds.windows.size())
        throw DimensionMismatch("one prediction per eval window required");

    GlobalExplanation g;
    g.component_names = explanations.front().component_names;
    const std::size_t d = g.component_names.size();
    for (const auto& e : explanations)
        if (e.component_names != g.component_names)
            throw DimensionMismatch("explanations cover different component sets");

    g.mean_importance.resize(d);
    std::vector<double> col(explanations.size());
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < explanations.size(); ++i) col[i] = explanations[i].w[j];
        g.mean_importance[j] = core::pairwise_mean(col);
    }
    g.ranking = baselines::ranked_importances(g.component_names, g.mean_importance);

    std::map<std::string, std::size_t> window_index;
    for (std::size_t i = 0; i < eval_ds.windows.size(); ++i)
        window_index[eval_ds.windows[i].window_id] = i;

    for (const auto& e : explanations) {
        const auto it = window_index.find(e.window_id);
        if (it == window_index.end())
            throw MissingInput("explained window '" + e.window_id + "' not in the eval set");
        const core::MultimodalWindow& w = eval_ds.windows[it->second];
        if (!w.label) continue;
        const int pred = predictions[it->second];
        const char* group = nullptr;
        if (*w.label == 1 && pred == 1) group = "tp";
        if (*w.label == 0 && pred == 0) group = "tn";
        if (!group) continue;

        const auto cs = decomp::decompose(w, baselines, cfg);
        if (cs.names() != g.component_names)
            throw DimensionMismatch("window '" + w.window_id +
                                    "' decomposes into a different component set");
        for (std::size_t j = 0; j < d; ++j) {
            if (!(e.w[j] > 0.0)) continue; // only components the explanation kept
            const auto& comp = cs.components[j];
            const double value =
                comp.is_scalar ? comp.scalar : core::pairwise_mean(comp.series);
            g.distributions.push_back({g.component_names[j], group, value});
        }
    }
    return g;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
    std::ostringstream out;
    out << "metric,param,value\n";
    for (const auto& r : rows)
        out << r.metric << ',' << r.param << ',' << core::format_double(r.value) << '\n';
    return out.str();
}

std::string distributions_csv(const std::vector<GlobalExplanation::DistRow>& rows) {
    std::ostringstream out;
    out << "component,group,value\n";
    for (const auto& r : rows)
        out << r.component << ',' << r.group << ',' << core::format_double(r.value) << '\n';
    return out.str();
}

} // namespace iic::eval

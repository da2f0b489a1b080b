#include "iic/baselines/features.hpp"

#include <algorithm>
#include <cmath>

#include "iic/core/numeric.hpp"
#include "iic/errors.hpp"

namespace iic::baselines {

ConceptVector concept_vector(const decomp::ComponentSet& cs) {
    ConceptVector c;
    c.names = cs.names();
    c.values.reserve(cs.dim());
    for (const auto& comp : cs.components)
        c.values.push_back(comp.is_scalar ? comp.scalar : core::pairwise_mean(comp.series));
    return c;
}

StatFeatureVector stat_features(const core::MultimodalWindow& w) {
    core::validate_window(w);
    StatFeatureVector f;
    for (core::Modality m : w.modalities()) {
        const core::Samples& x = w.channels.at(m);
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        const std::string prefix = std::string(core::modality_name(m)) + ".";
        f.names.push_back(prefix + "Mean");
        f.values.push_back(core::pairwise_mean(x));
        f.names.push_back(prefix + "Min");
        f.values.push_back(*lo);
        f.names.push_back(prefix + "Max");
        f.values.push_back(*hi);
        f.names.push_back(prefix + "Std");
        f.values.push_back(core::population_std(x));
    }
    return f;
}

std::vector<double> Standardizer::transform(const std::vector<double>& x) const {
    if (x.size() != mean.size())
        throw DimensionMismatch("standardizer fit on " + std::to_string(mean.size()) +
                                " features, got " + std::to_string(x.size()));
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = stddev[i] > 0.0 ? stddev[i] : 1.0;
        out[i] = (x[i] - mean[i]) / s;
    }
    return out;
}

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw EmptyDataset("standardizer needs at least one row");
    const std::size_t f = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != f) throw DimensionMismatch("ragged feature rows");

    Standardizer s;
    s.mean.resize(f);
    s.stddev.resize(f);
    std::vector<double> col(rows.size());
    for (std::size_t j = 0; j < f; ++j) {
        for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i][j];
        s.mean[j] = core::pairwise_mean(col);
        s.stddev[j] = core::population_std(col);
    }
    return s;
}

} // namespace iic::baselines

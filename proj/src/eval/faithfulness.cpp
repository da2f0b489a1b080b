#include "iic/eval/faithfulness.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "iic/errors.hpp"

namespace iic::eval {
namespace {

void check_inputs(const Masker& masker, const core::Dataset& eval_ds,
                  const std::vector<std::vector<double>>& importances) {
    if (eval_ds.windows.empty()) throw EmptyEval("no windows to evaluate");
    if (importances.size() != eval_ds.windows.size())
        throw DimensionMismatch("one importance vector per window required (" +
                                std::to_string(importances.size()) + " for " +
                                std::to_string(eval_ds.windows.size()) + " windows)");
    for (const auto& imp : importances)
        if (imp.size() != masker.dim())
            throw DimensionMismatch("importance vector length does not match the input space");
}

FlipReport run_flips(const Masker& masker, const core::Dataset& eval_ds,
                     const std::vector<std::vector<bool>>& masks) {
    FlipReport report;
    report.n = eval_ds.windows.size();
    report.flips.resize(report.n);
    const std::vector<bool> none(masker.dim(), false);
    std::size_t flipped = 0;
    for (std::size_t i = 0; i < report.n; ++i) {
        const auto& w = eval_ds.windows[i];
        const int base = masker.predict_masked(w, none);
        const int masked = masker.predict_masked(w, masks[i]);
        report.flips[i] = masked != base;
        if (report.flips[i]) ++flipped;
    }
    report.flip_rate = static_cast<double>(flipped) / static_cast<double>(report.n);
    return report;
}

} // namespace

FlipReport fidelity(const Masker& masker, const core::Dataset& eval_ds,
                    const std::vector<std::vector<double>>& importances, std::size_t k) {
    check_inputs(masker, eval_ds, importances);
    const std::size_t d = masker.dim();
    if (k > d)
        throw KTooLarge("k = " + std::to_string(k) + " exceeds the " + std::to_string(d) +
                        "-dimensional input space");

    std::vector<std::vector<bool>> masks(eval_ds.windows.size());
    std::vector<std::size_t> order(d);
    for (std::size_t i = 0; i < masks.size(); ++i) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        const auto& imp = importances[i];
        // descending importance, ties keep the fixed input order
        std::stable_sort(order.begin(), order.end(),
                         [&imp](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
        masks[i].assign(d, false);
        for (std::size_t j = 0; j < k; ++j) masks[i][order[j]] = true;
    }
    return run_flips(masker, eval_ds, masks);
}

FlipReport sufficiency(const Masker& masker, const core::Dataset& eval_ds,
                       const std::vector<std::vector<double>>& importances, double tau) {
    check_inputs(masker, eval_ds, importances);
    std::vector<std::vector<bool>> masks(eval_ds.windows.size());
    for (std::size_t i = 0; i < masks.size(); ++i) {
        masks[i].assign(masker.dim(), false);
        for (std::size_t j = 0; j < masker.dim(); ++j)
            if (importances[i][j] < tau) masks[i][j] = true;
    }
    return run_flips(masker, eval_ds, masks);
}

} // namespace iic::eval

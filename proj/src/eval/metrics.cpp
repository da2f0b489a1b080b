#include "iic/eval/metrics.hpp"

#include <string>

#include "iic/core/numeric.hpp"
#include "iic/errors.hpp"

namespace iic::eval {

ClassificationMetrics classification_metrics(const std::vector<int>& y_true,
                                             const std::vector<int>& y_pred, int num_classes) {
    if (y_true.empty()) throw EmptyEval("no samples to score");
    if (y_true.size() != y_pred.size())
        throw DimensionMismatch("labels and predictions differ in length");
    if (num_classes < 2) throw InvalidConfig("need at least two classes");

    ClassificationMetrics m;
    const std::size_t k = static_cast<std::size_t>(num_classes);
    m.confusion.assign(k, std::vector<int>(k, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || y_true[i] >= num_classes || y_pred[i] < 0 ||
            y_pred[i] >= num_classes)
            throw InvalidConfig("class index outside [0, " + std::to_string(num_classes) + ")");
        ++m.confusion[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
        if (y_true[i] == y_pred[i]) ++correct;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());

    auto f1_of = [&](std::size_t cls) {
        long tp = m.confusion[cls][cls];
        long fp = 0, fn = 0;
        for (std::size_t other = 0; other < k; ++other) {
            if (other == cls) continue;
            fp += m.confusion[other][cls];
            fn += m.confusion[cls][other];
        }
        const long denom = 2 * tp + fp + fn;
        return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    };

    if (num_classes == 2) {
        m.f1 = f1_of(1);
    } else {
        std::vector<double> per_class(k);
        for (std::size_t cls = 0; cls < k; ++cls) per_class[cls] = f1_of(cls);
        m.f1 = core::pairwise_mean(per_class);
    }
    return m;
}

} // namespace iic::eval

#pragma once

#include <vector>

#include "iic/core/types.hpp"

namespace iic::eval {

struct ClassificationMetrics {
    double accuracy = 0.0;
    /// Positive-class F1 for binary tasks, macro-averaged otherwise.
    double f1 = 0.0;
    std::vector<std::vector<int>> confusion; // [true][predicted]
};

/// Throws EmptyEval on no samples, DimensionMismatch on length mismatch,
/// InvalidConfig on labels outside [0, num_classes).
ClassificationMetrics classification_metrics(const std::vector<int>& y_true,
                                             const std::vector<int>& y_pred, int num_classes);

} // namespace iic::eval

#pragma once

#include "iic/core/types.hpp"

namespace iic::core {

/// Mean of all samples of all train windows, per modality.
/// Requires a non-empty train-split dataset carrying every modality it names.
BaselineSet compute_baselines(const Dataset& train);

/// Elementwise sqrt(x^2 + y^2 + z^2). Raw 3-axis ACC is collapsed to this
/// resultant at ingestion; downstream code only ever sees the resultant.
Samples resultant_acceleration(const Samples& x, const Samples& y, const Samples& z);

/// Linear interpolation of a channel onto a new rate (used when aligning
/// modalities recorded at different frequencies at ingestion).
Samples resample_linear(const Samples& x, double from_hz, double to_hz);

} // namespace iic::core

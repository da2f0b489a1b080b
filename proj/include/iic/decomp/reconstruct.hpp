#pragma once

#include <map>

#include "iic/decomp/component_set.hpp"

namespace iic::decomp {

/// Weighted inverse transform F^-1(C_x w). With all-ones weights this
/// reproduces the original window to <= 1e-9 per sample; with zeros it
/// collapses each channel onto its baseline (plus unweighted anchors).
core::MultimodalWindow reconstruct(const ComponentSet& cs, const WeightVector& w);

/// Gradient of a scalar loss w.r.t. the reconstructed window, keyed like
/// the window's channels.
using WindowGrad = std::map<core::Modality, core::Samples>;

/// (dx'/dw)^T g_x, computed analytically from the reconstruction
/// formulas. ACC/EDA/TEMP contributions are linear in w; the HR channel
/// chains through rr = 60000/bpm with its prefix-sum structure, and RR
/// samples sitting on the clamp floor contribute zero.
std::vector<double> weight_jvp(const ComponentSet& cs, const WeightVector& w,
                               const WindowGrad& g_x);

} // namespace iic::decomp

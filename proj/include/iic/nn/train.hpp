#pragma once

#include "iic/core/types.hpp"
#include "iic/nn/adam.hpp"
#include "iic/nn/model.hpp"

namespace iic::nn {

struct TrainConfig {
    double lr = 1e-3;
    int epochs = 30;
    int batch_size = 16;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    /// Stop once eval loss has not improved for `patience` epochs (0 = off).
    int patience = 0;
    /// Independent initializations; the one with minimal eval loss wins.
    int restarts = 1;
    std::uint64_t seed = 0;
};

struct EpochStats {
    double train_loss = 0.0;
    double train_acc = 0.0;
    double eval_loss = 0.0;
    double eval_acc = 0.0;
};

struct TrainResult {
    Model model; // parameters from the epoch with minimal eval loss
    std::vector<EpochStats> history; // winning restart only
    int best_epoch = 0;
    int best_restart = 0;
    double best_eval_loss = 0.0;
};

/// Cross-entropy training with Adam, per-epoch shuffling, eval-loss
/// checkpointing, optional early stopping and multi-restart selection.
/// Deterministic for a fixed (cfg.seed, spec.seed, data).
TrainResult train(const ModelSpec& spec, const core::Dataset& train_ds,
                  const core::Dataset& eval_ds, const TrainConfig& cfg);

/// Mean cross-entropy and accuracy of `model` over a labeled dataset.
std::pair<double, double> evaluate_loss(const Model& model, const core::Dataset& ds);

} // namespace iic::nn

// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "steerguard/embedding.hpp"
#include "steerguard/mlp.hpp"

namespace steerguard {

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    /// Only "sgd-momentum" is implemented.
    std::string optimizer = "sgd-momentum";
    /// Stop after this many epochs without training-loss improvement; 0 disables.
    std::size_t early_stop_patience = 0;
    /// Weight samples by N / (2 N_class) so both classes contribute equally.
    bool class_weighting = false;
    std::vector<std::size_t> hidden{256, 64};

    void validate() const;
    /// Canonical JSON of every field, used for the weights sidecar hash.
    std::string to_json() const;
};

struct TrainLog {
    double initial_loss = 0.0;
    /// Full-training-set loss after each completed epoch.
    std::vector<double> epoch_losses;
    bool stopped_early = false;

    double final_loss() const { return epoch_losses.empty() ? initial_loss : epoch_losses.back(); }
};

struct TrainResult {
    MlpParams params;
    TrainLog log;
};

/// Mini-batch gradient descent with momentum on mean BCE. Single-threaded and
/// bit-reproducible for a fixed seed. Returned parameters are rounded to float32 and
/// the final log entry is the loss of those rounded parameters.
///
/// Throws Error(kInvalidArgument) for a single-class table and Error(kNumerical) with
/// the epoch index when the loss diverges.
TrainResult train_identifier(const EmbeddingTable& table, const TrainConfig& config);

struct TableSplit {
    EmbeddingTable train;
    EmbeddingTable test;
};

/// Seeded shuffle, then the first round(holdout * N) records form the test set.
TableSplit split_table(const EmbeddingTable& table, double holdout_fraction, std::uint64_t seed);

}  // namespace steerguard

// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "steerguard/embedding.hpp"

namespace steerguard {

enum class Activation { kRelu, kIdentity };

std::string_view to_string(Activation activation);
Activation parse_activation(std::string_view name);

/// Fully connected layer; weights are row-major [out x in].
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;
    std::vector<double> bias;
    Activation activation = Activation::kRelu;

    bool operator==(const DenseLayer&) const = default;
};

/// Binary phrase classifier: dense layers ending in a single logit, passed through the
/// logistic function by mlp_forward.
class MlpParams {
public:
    MlpParams() = default;
    /// Validates composition, final output dimension 1 and finiteness.
    explicit MlpParams(std::vector<DenseLayer> layers);

    std::size_t input_dim() const { return m_layers.front().in; }
    const std::vector<DenseLayer>& layers() const { return m_layers; }
    std::vector<DenseLayer>& mutable_layers() { return m_layers; }
    std::size_t parameter_count() const;

    bool operator==(const MlpParams&) const = default;

private:
    std::vector<DenseLayer> m_layers;
};

/// He-normal weights, zero biases; hidden layers ReLU, output layer identity.
MlpParams init_mlp(std::size_t input_dim, std::span<const std::size_t> hidden, std::uint64_t seed);

double logistic(double z);

/// Final pre-logistic activation. Throws on dimension mismatch or non-finite output.
double mlp_logit(const MlpParams& params, std::span<const double> input);
double mlp_forward(const MlpParams& params, const EmbeddingVector& e);

/// Predictions are clamped to [kBceClamp, 1 - kBceClamp] before taking logs.
inline constexpr double kBceClamp = 1e-7;

/// Mean binary cross-entropy. Labels must be 0 or 1.
double bce_loss(std::span<const double> predictions, std::span<const int> labels);

/// Same layout as MlpParams::layers(), holding d(loss)/d(parameter).
struct MlpGradient {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;
};

/// Weighted mean BCE over a batch and its analytic gradient. `sample_weights` may be
/// empty (all 1); the loss is sum(w_i * bce_i) / sum(w_i). The gradient uses
/// d(bce)/d(logit) = y_hat - y, i.e. it ignores the clamp.
double mlp_loss_and_gradient(const MlpParams& params, std::span<const EmbeddingVector* const> inputs,
                             std::span<const int> labels, std::span<const double> sample_weights,
                             MlpGradient& gradient);

/// Rounds every parameter to float32 precision (the persisted precision).
void quantize_to_float(MlpParams& params);

}  // namespace steerguard

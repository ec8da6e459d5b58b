// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "steerguard/error.hpp"
#include "steerguard/random.hpp"

namespace steerguard {

std::string_view to_string(Activation activation) {
    return activation == Activation::kRelu ? "relu" : "identity";
}

Activation parse_activation(std::string_view name) {
    if (name == "relu") {
        return Activation::kRelu;
    }
    if (name == "identity") {
        return Activation::kIdentity;
    }
    throw Error(ErrorKind::kFormat, "unknown activation \"" + std::string(name) + "\"");
}

MlpParams::MlpParams(std::vector<DenseLayer> layers) : m_layers(std::move(layers)) {
    if (m_layers.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "MLP needs at least one layer");
    }
    for (std::size_t l = 0; l < m_layers.size(); ++l) {
        const auto& layer = m_layers[l];
        const auto where = "layer " + std::to_string(l);
        if (layer.in == 0 || layer.out == 0) {
            throw Error(ErrorKind::kInvalidArgument, where + " has a zero dimension");
        }
        if (layer.weights.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
            throw Error(ErrorKind::kInvalidArgument, where + " parameter sizes do not match its shape");
        }
        if (l > 0 && m_layers[l - 1].out != layer.in) {
            throw Error(ErrorKind::kDimensionMismatch, where + " input " + std::to_string(layer.in) +
                                                           " does not match previous output " +
                                                           std::to_string(m_layers[l - 1].out));
        }
        for (const auto v : layer.weights) {
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::kNonFinite, where + " has a non-finite weight");
            }
        }
        for (const auto v : layer.bias) {
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::kNonFinite, where + " has a non-finite bias");
            }
        }
    }
    if (m_layers.back().out != 1) {
        throw Error(ErrorKind::kInvalidArgument, "final MLP layer must have one output");
    }
}

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : m_layers) {
        n += layer.weights.size() + layer.bias.size();
    }
    return n;
}

MlpParams init_mlp(std::size_t input_dim, std::span<const std::size_t> hidden, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<DenseLayer> layers;
    std::size_t in = input_dim;
    auto make = [&](std::size_t out, Activation activation) {
        DenseLayer layer{in, out, std::vector<double>(in * out), std::vector<double>(out, 0.0), activation};
        const double scale = std::sqrt(2.0 / static_cast<double>(in));
        for (auto& w : layer.weights) {
            w = rng.normal() * scale;
        }
        layers.push_back(std::move(layer));
        in = out;
    };
    for (const auto width : hidden) {
        make(width, Activation::kRelu);
    }
    make(1, Activation::kIdentity);
    return MlpParams(std::move(layers));
}

double logistic(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

void dense_forward(const DenseLayer& layer, std::span<const double> input, std::vector<double>& output) {
    output.assign(layer.out, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
        const double* row = layer.weights.data() + o * layer.in;
        double acc = layer.bias[o];
        for (std::size_t i = 0; i < layer.in; ++i) {
            acc += row[i] * input[i];
        }
        output[o] = layer.activation == Activation::kRelu && acc < 0.0 ? 0.0 : acc;
    }
}

}  // namespace

double mlp_logit(const MlpParams& params, std::span<const double> input) {
    if (params.layers().empty()) {
        throw Error(ErrorKind::kInvalidArgument, "MLP has no layers");
    }
    if (input.size() != params.input_dim()) {
        throw Error(ErrorKind::kDimensionMismatch, "MLP expects dimension " + std::to_string(params.input_dim()) +
                                                       ", got " + std::to_string(input.size()));
    }
    std::vector<double> current(input.begin(), input.end());
    std::vector<double> next;
    for (const auto& layer : params.layers()) {
        dense_forward(layer, current, next);
        current.swap(next);
    }
    if (!std::isfinite(current[0])) {
        throw Error(ErrorKind::kNonFinite, "MLP produced a non-finite logit");
    }
    return current[0];
}

double mlp_forward(const MlpParams& params, const EmbeddingVector& e) {
    return logistic(mlp_logit(params, e.values()));
}

double bce_loss(std::span<const double> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size() || predictions.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "bce_loss needs equal, non-zero lengths");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto y = labels[i];
        if (y != 0 && y != 1) {
            throw Error(ErrorKind::kInvalidArgument, "bce_loss label must be 0 or 1");
        }
        if (!std::isfinite(predictions[i])) {
            throw Error(ErrorKind::kNonFinite, "bce_loss prediction is not finite");
        }
        const double p = std::clamp(predictions[i], kBceClamp, 1.0 - kBceClamp);
        sum += y == 1 ? std::log(p) : std::log(1.0 - p);
    }
    return -sum / static_cast<double>(predictions.size());
}

double mlp_loss_and_gradient(const MlpParams& params, std::span<const EmbeddingVector* const> inputs,
                             std::span<const int> labels, std::span<const double> sample_weights,
                             MlpGradient& gradient) {
    const auto& layers = params.layers();
    if (inputs.size() != labels.size() || inputs.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "gradient batch needs equal, non-zero lengths");
    }
    if (!sample_weights.empty() && sample_weights.size() != inputs.size()) {
        throw Error(ErrorKind::kInvalidArgument, "sample weight count does not match the batch");
    }
    gradient.weights.resize(layers.size());
    gradient.bias.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        gradient.weights[l].assign(layers[l].weights.size(), 0.0);
        gradient.bias[l].assign(layers[l].bias.size(), 0.0);
    }

    double weight_sum = 0.0;
    for (std::size_t n = 0; n < inputs.size(); ++n) {
        weight_sum += sample_weights.empty() ? 1.0 : sample_weights[n];
    }
    if (!(weight_sum > 0.0)) {
        throw Error(ErrorKind::kInvalidArgument, "sample weights must sum to a positive value");
    }

    // activations[l] is the input to layer l; activations.back() holds the logit.
    std::vector<std::vector<double>> activations(layers.size() + 1);
    std::vector<double> delta;
    std::vector<double> delta_prev;
    double loss = 0.0;
    for (std::size_t n = 0; n < inputs.size(); ++n) {
        const auto& x = *inputs[n];
        if (x.dimension() != params.input_dim()) {
            throw Error(ErrorKind::kDimensionMismatch, "gradient input has dimension " +
                                                           std::to_string(x.dimension()) + ", expected " +
                                                           std::to_string(params.input_dim()));
        }
        activations[0].assign(x.values().begin(), x.values().end());
        for (std::size_t l = 0; l < layers.size(); ++l) {
            dense_forward(layers[l], activations[l], activations[l + 1]);
        }
        const double logit = activations.back()[0];
        if (!std::isfinite(logit)) {
            throw Error(ErrorKind::kNonFinite, "non-finite logit during training");
        }
        const double w = (sample_weights.empty() ? 1.0 : sample_weights[n]) / weight_sum;
        const double p = std::clamp(logistic(logit), kBceClamp, 1.0 - kBceClamp);
        const int y = labels[n];
        loss -= w * (y == 1 ? std::log(p) : std::log(1.0 - p));

        delta.assign(1, w * (logistic(logit) - static_cast<double>(y)));
        for (std::size_t l = layers.size(); l-- > 0;) {
            const auto& layer = layers[l];
            const auto& input = activations[l];
            auto& gw = gradient.weights[l];
            auto& gb = gradient.bias[l];
            for (std::size_t o = 0; o < layer.out; ++o) {
                gb[o] += delta[o];
                double* grow = gw.data() + o * layer.in;
                for (std::size_t i = 0; i < layer.in; ++i) {
                    grow[i] += delta[o] * input[i];
                }
            }
            if (l == 0) {
                break;
            }
            delta_prev.assign(layer.in, 0.0);
            for (std::size_t o = 0; o < layer.out; ++o) {
                const double* row = layer.weights.data() + o * layer.in;
                for (std::size_t i = 0; i < layer.in; ++i) {
                    delta_prev[i] += row[i] * delta[o];
                }
            }
            // The input of layer l is the output of layer l-1; mask by its ReLU.
            if (layers[l - 1].activation == Activation::kRelu) {
                for (std::size_t i = 0; i < layer.in; ++i) {
                    if (input[i] <= 0.0) {
                        delta_prev[i] = 0.0;
                    }
                }
            }
            delta.swap(delta_prev);
        }
    }
    return loss;
}

void quantize_to_float(MlpParams& params) {
    for (auto& layer : params.mutable_layers()) {
        for (auto& w : layer.weights) {
            w = static_cast<float>(w);
        }
        for (auto& b : layer.bias) {
            b = static_cast<float>(b);
        }
    }
}

}  // namespace steerguard

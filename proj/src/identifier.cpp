// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/identifier.hpp"

#include <cmath>
#include <json.hpp>
#include <numeric>

#include "steerguard/error.hpp"
#include "steerguard/random.hpp"

namespace steerguard {

void TrainConfig::validate() const {
    if (epochs < 1) {
        throw Error(ErrorKind::kInvalidArgument, "epochs must be >= 1");
    }
    if (batch_size < 1) {
        throw Error(ErrorKind::kInvalidArgument, "batch size must be >= 1");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw Error(ErrorKind::kInvalidArgument, "learning rate must be > 0");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw Error(ErrorKind::kInvalidArgument, "momentum must be in [0, 1)");
    }
    if (optimizer != "sgd-momentum") {
        throw Error(ErrorKind::kInvalidArgument, "unsupported optimizer \"" + optimizer + "\"");
    }
    for (const auto width : hidden) {
        if (width == 0) {
            throw Error(ErrorKind::kInvalidArgument, "hidden layer width must be >= 1");
        }
    }
}

std::string TrainConfig::to_json() const {
    const nlohmann::json j = {
        {"epochs", epochs},
        {"batch_size", batch_size},
        {"learning_rate", learning_rate},
        {"momentum", momentum},
        {"seed", seed},
        {"optimizer", optimizer},
        {"early_stop_patience", early_stop_patience},
        {"class_weighting", class_weighting},
        {"hidden", hidden},
    };
    return j.dump();
}

namespace {

struct Batch {
    std::vector<const EmbeddingVector*> inputs;
    std::vector<int> labels;
    std::vector<double> weights;
};

double full_loss(const MlpParams& params, const Batch& all, MlpGradient& scratch) {
    return mlp_loss_and_gradient(params, all.inputs, all.labels, all.weights, scratch);
}

}  // namespace

TrainResult train_identifier(const EmbeddingTable& table, const TrainConfig& config) {
    config.validate();
    const auto n_unsafe = table.count(Label::kUnsafe);
    const auto n_safe = table.count(Label::kSafe);
    if (n_unsafe == 0 || n_safe == 0) {
        throw Error(ErrorKind::kInvalidArgument, "training table must contain both classes (safe=" +
                                                     std::to_string(n_safe) + ", unsafe=" + std::to_string(n_unsafe) +
                                                     ")");
    }

    Batch all;
    for (const auto& record : table.records()) {
        all.inputs.push_back(&record.embedding);
        all.labels.push_back(record.label == Label::kUnsafe ? 1 : 0);
        if (config.class_weighting) {
            const double n_class = static_cast<double>(record.label == Label::kUnsafe ? n_unsafe : n_safe);
            all.weights.push_back(static_cast<double>(table.size()) / (2.0 * n_class));
        }
    }

    TrainResult result{init_mlp(table.dimension(), config.hidden, config.seed), {}};
    auto& params = result.params;
    MlpGradient gradient;
    result.log.initial_loss = full_loss(params, all, gradient);

    std::vector<std::vector<double>> velocity_w;
    std::vector<std::vector<double>> velocity_b;
    for (const auto& layer : params.layers()) {
        velocity_w.emplace_back(layer.weights.size(), 0.0);
        velocity_b.emplace_back(layer.bias.size(), 0.0);
    }

    // Offset the shuffle stream from the initialisation stream.
    Rng rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::size_t> order(table.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Batch batch;
    double best = result.log.initial_loss;
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const auto end = std::min(order.size(), start + config.batch_size);
            batch.inputs.clear();
            batch.labels.clear();
            batch.weights.clear();
            for (auto k = start; k < end; ++k) {
                batch.inputs.push_back(all.inputs[order[k]]);
                batch.labels.push_back(all.labels[order[k]]);
                if (!all.weights.empty()) {
                    batch.weights.push_back(all.weights[order[k]]);
                }
            }
            try {
                mlp_loss_and_gradient(params, batch.inputs, batch.labels, batch.weights, gradient);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::kNonFinite) {
                    throw;
                }
                throw Error(ErrorKind::kNumerical, "identifier training diverged at epoch " +
                                                       std::to_string(epoch + 1) + " (" + e.detail() + ")");
            }
            auto& layers = params.mutable_layers();
            for (std::size_t l = 0; l < layers.size(); ++l) {
                for (std::size_t i = 0; i < layers[l].weights.size(); ++i) {
                    velocity_w[l][i] = config.momentum * velocity_w[l][i] - config.learning_rate * gradient.weights[l][i];
                    layers[l].weights[i] += velocity_w[l][i];
                }
                for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
                    velocity_b[l][i] = config.momentum * velocity_b[l][i] - config.learning_rate * gradient.bias[l][i];
                    layers[l].bias[i] += velocity_b[l][i];
                }
            }
        }

        double loss = 0.0;
        try {
            loss = full_loss(params, all, gradient);
        } catch (const Error&) {
            loss = std::nan("");
        }
        if (!std::isfinite(loss)) {
            throw Error(ErrorKind::kNumerical, "identifier training diverged at epoch " + std::to_string(epoch + 1));
        }
        result.log.epoch_losses.push_back(loss);

        if (config.early_stop_patience > 0) {
            if (loss < best - 1e-9) {
                best = loss;
                since_best = 0;
            } else if (++since_best >= config.early_stop_patience) {
                result.log.stopped_early = true;
                break;
            }
        }
    }

    quantize_to_float(params);
    result.log.epoch_losses.back() = full_loss(params, all, gradient);
    return result;
}

TableSplit split_table(const EmbeddingTable& table, double holdout_fraction, std::uint64_t seed) {
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
        throw Error(ErrorKind::kInvalidArgument, "holdout fraction must be in (0, 1)");
    }
    std::vector<std::size_t> order(table.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    const auto n_test = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(table.size())));
    std::vector<PhraseRecord> train;
    std::vector<PhraseRecord> test;
    for (std::size_t k = 0; k < order.size(); ++k) {
        (k < n_test ? test : train).push_back(table[order[k]]);
    }
    return {EmbeddingTable(table.dimension(), std::move(train), table.provenance()),
            EmbeddingTable(table.dimension(), std::move(test), table.provenance())};
}

}  // namespace steerguard

// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "steerguard/dataset.hpp"
#include "steerguard/embedding.hpp"

namespace steerguard {

enum class SteerMethod { kClosedForm, kGradient };

std::string_view to_string(SteerMethod method);
SteerMethod parse_steer_method(std::string_view name);

struct SteerMetadata {
    SteerMethod method = SteerMethod::kClosedForm;
    double lambda = 0.0;
    std::uint64_t seed = 0;
};

/// Square D x D linear map with finite entries.
class SteerMatrix {
public:
    explicit SteerMatrix(Eigen::MatrixXd w, SteerMetadata metadata = {});

    static SteerMatrix identity(std::size_t dimension);

    std::size_t dimension() const { return static_cast<std::size_t>(m_w.rows()); }
    const Eigen::MatrixXd& matrix() const { return m_w; }
    const SteerMetadata& metadata() const { return m_metadata; }

private:
    Eigen::MatrixXd m_w;
    SteerMetadata m_metadata;
};

/// Unsafe/safe embedding pairs as D x M column matrices.
class PairSet {
public:
    PairSet(Eigen::MatrixXd unsafe, Eigen::MatrixXd safe);
    explicit PairSet(std::span<const EmbeddingPair> pairs);

    std::size_t size() const { return static_cast<std::size_t>(m_unsafe.cols()); }
    std::size_t dimension() const { return static_cast<std::size_t>(m_unsafe.rows()); }
    const Eigen::MatrixXd& unsafe() const { return m_unsafe; }
    const Eigen::MatrixXd& safe() const { return m_safe; }

private:
    Eigen::MatrixXd m_unsafe;
    Eigen::MatrixXd m_safe;
};

struct SteerConfig {
    double epsilon = 0.9;
    /// nullopt selects default_ridge_lambda().
    std::optional<double> lambda;
    /// Initial step of the backtracking line search.
    double learning_rate = 1.0;
    std::size_t epochs = 5000;
    /// Stop once the Frobenius norm of the gradient falls below this.
    double gradient_tolerance = 1e-12;
    std::uint64_t seed = 0;

    void validate() const;
};

/// eps * W e + (1 - eps) * e, evaluated exactly in that form.
std::vector<double> steer_embedding(const SteerMatrix& w, double epsilon, std::span<const double> e);
EmbeddingVector steer_embedding(const SteerMatrix& w, double epsilon, const EmbeddingVector& e);

/// Mean over pairs of |E_safe - W E_unsafe|^2.
double steer_loss(const SteerMatrix& w, const PairSet& pairs);
double steer_loss(const Eigen::MatrixXd& w, const PairSet& pairs);

/// steer_loss + (lambda / M) |W|_F^2; the closed form is its exact minimiser.
double steer_objective(const Eigen::MatrixXd& w, const PairSet& pairs, double lambda);
/// d(steer_objective)/dW = (2/M) ((W S_uu - S_su) + lambda W).
Eigen::MatrixXd steer_gradient(const Eigen::MatrixXd& w, const PairSet& pairs, double lambda);

/// 1e-3 * trace(S_uu) / D.
double default_ridge_lambda(const PairSet& pairs);

/// W = S_su (S_uu + lambda I)^-1. Throws Error(kNumerical) when the normal matrix is
/// singular (set lambda > 0).
SteerMatrix fit_steer_closed_form(const PairSet& pairs, double lambda);

struct SteerTrainResult {
    SteerMatrix steer;
    /// Objective before the first step, then after every accepted step.
    std::vector<double> loss_trace;
};

/// Full-batch gradient descent on steer_objective with backtracking: a step that does
/// not decrease the objective is halved until it does, and an accepted step doubles
/// the next trial step. The trace is therefore non-increasing. Starts from identity
/// unless `initial` is given.
SteerTrainResult train_steer_gradient(const PairSet& pairs, const SteerConfig& config,
                                      const std::optional<Eigen::MatrixXd>& initial = std::nullopt);

inline constexpr std::string_view kSteerMagic = "STSW1\n";

// STSW1 layout (little-endian): "STSW1\n" | u32 D | D*D f32 row-major.
std::string encode_steer(const SteerMatrix& w);
SteerMatrix decode_steer(std::string_view bytes, const nlohmann::json* sidecar = nullptr);
/// {"format","dimension","epsilon_default","lambda","method","seed","weights_sha256"}
nlohmann::json steer_sidecar(const SteerMatrix& w, double epsilon_default, std::string_view encoded);

/// Writes `path` and `path` + ".json".
void save_steer(const SteerMatrix& w, double epsilon_default, const std::filesystem::path& path);
SteerMatrix load_steer(const std::filesystem::path& path, nlohmann::json* sidecar_out = nullptr);

}  // namespace steerguard

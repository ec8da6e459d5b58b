// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/steering.hpp"

#include <cmath>

#include "steerguard/binary_io.hpp"
#include "steerguard/digest.hpp"
#include "steerguard/error.hpp"

namespace steerguard {

std::string_view to_string(SteerMethod method) {
    return method == SteerMethod::kClosedForm ? "closed-form" : "gradient";
}

SteerMethod parse_steer_method(std::string_view name) {
    if (name == "closed-form") {
        return SteerMethod::kClosedForm;
    }
    if (name == "gradient") {
        return SteerMethod::kGradient;
    }
    throw Error(ErrorKind::kInvalidArgument,
                "unknown steer method \"" + std::string(name) + "\" (expected closed-form or gradient)");
}

SteerMatrix::SteerMatrix(Eigen::MatrixXd w, SteerMetadata metadata) : m_w(std::move(w)), m_metadata(metadata) {
    if (m_w.rows() == 0 || m_w.rows() != m_w.cols()) {
        throw Error(ErrorKind::kInvalidArgument, "steer matrix must be square and non-empty");
    }
    if (!m_w.allFinite()) {
        throw Error(ErrorKind::kNonFinite, "steer matrix has non-finite entries");
    }
}

SteerMatrix SteerMatrix::identity(std::size_t dimension) {
    const auto d = static_cast<Eigen::Index>(dimension);
    return SteerMatrix(Eigen::MatrixXd::Identity(d, d));
}

PairSet::PairSet(Eigen::MatrixXd unsafe, Eigen::MatrixXd safe) : m_unsafe(std::move(unsafe)), m_safe(std::move(safe)) {
    if (m_unsafe.cols() == 0) {
        throw Error(ErrorKind::kInvalidArgument, "pair set is empty");
    }
    if (m_unsafe.rows() == 0 || m_unsafe.rows() != m_safe.rows() || m_unsafe.cols() != m_safe.cols()) {
        throw Error(ErrorKind::kDimensionMismatch, "unsafe and safe matrices must have identical shapes");
    }
}

namespace {

Eigen::MatrixXd stack(std::span<const EmbeddingPair> pairs, bool safe) {
    if (pairs.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "pair set is empty");
    }
    const auto dim = pairs.front().unsafe.dimension();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t m = 0; m < pairs.size(); ++m) {
        const auto& v = safe ? pairs[m].safe : pairs[m].unsafe;
        if (pairs[m].unsafe.dimension() != dim || pairs[m].safe.dimension() != dim) {
            throw Error(ErrorKind::kDimensionMismatch, "pair " + std::to_string(m) + " has a different dimension");
        }
        for (std::size_t j = 0; j < dim; ++j) {
            out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m)) = v[j];
        }
    }
    return out;
}

void check_epsilon(double epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw Error(ErrorKind::kInvalidArgument, "epsilon must be in [0, 1]");
    }
}

void check_pairs(const Eigen::MatrixXd& w, const PairSet& pairs) {
    if (static_cast<std::size_t>(w.rows()) != pairs.dimension() || w.rows() != w.cols()) {
        throw Error(ErrorKind::kDimensionMismatch, "steer matrix dimension " + std::to_string(w.rows()) +
                                                       " does not match pair dimension " +
                                                       std::to_string(pairs.dimension()));
    }
}

}  // namespace

PairSet::PairSet(std::span<const EmbeddingPair> pairs) : PairSet(stack(pairs, false), stack(pairs, true)) {}

void SteerConfig::validate() const {
    check_epsilon(epsilon);
    if (lambda && !(*lambda >= 0.0)) {
        throw Error(ErrorKind::kInvalidArgument, "ridge lambda must be >= 0");
    }
    if (!(learning_rate > 0.0)) {
        throw Error(ErrorKind::kInvalidArgument, "learning rate must be > 0");
    }
    if (epochs < 1) {
        throw Error(ErrorKind::kInvalidArgument, "epochs must be >= 1");
    }
}

std::vector<double> steer_embedding(const SteerMatrix& w, double epsilon, std::span<const double> e) {
    check_epsilon(epsilon);
    const auto dim = w.dimension();
    if (e.size() != dim) {
        throw Error(ErrorKind::kDimensionMismatch, "embedding dimension " + std::to_string(e.size()) +
                                                       " does not match steer dimension " + std::to_string(dim));
    }
    if (epsilon == 0.0) {
        // Bit-exact, including signed zeros that 0 * We + e would flip.
        return {e.begin(), e.end()};
    }
    const auto& m = w.matrix();
    std::vector<double> out(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        double we = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            we += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * e[j];
        }
        out[i] = epsilon * we + (1.0 - epsilon) * e[i];
    }
    return out;
}

EmbeddingVector steer_embedding(const SteerMatrix& w, double epsilon, const EmbeddingVector& e) {
    return EmbeddingVector(steer_embedding(w, epsilon, e.values()));
}

double steer_loss(const Eigen::MatrixXd& w, const PairSet& pairs) {
    check_pairs(w, pairs);
    const Eigen::MatrixXd residual = pairs.safe() - w * pairs.unsafe();
    return residual.colwise().squaredNorm().sum() / static_cast<double>(pairs.size());
}

double steer_loss(const SteerMatrix& w, const PairSet& pairs) {
    return steer_loss(w.matrix(), pairs);
}

double steer_objective(const Eigen::MatrixXd& w, const PairSet& pairs, double lambda) {
    return steer_loss(w, pairs) + lambda * w.squaredNorm() / static_cast<double>(pairs.size());
}

Eigen::MatrixXd steer_gradient(const Eigen::MatrixXd& w, const PairSet& pairs, double lambda) {
    check_pairs(w, pairs);
    const Eigen::MatrixXd residual = w * pairs.unsafe() - pairs.safe();
    return (2.0 / static_cast<double>(pairs.size())) * (residual * pairs.unsafe().transpose() + lambda * w);
}

double default_ridge_lambda(const PairSet& pairs) {
    return 1e-3 * pairs.unsafe().squaredNorm() / static_cast<double>(pairs.dimension());
}

SteerMatrix fit_steer_closed_form(const PairSet& pairs, double lambda) {
    if (!(lambda >= 0.0)) {
        throw Error(ErrorKind::kInvalidArgument, "ridge lambda must be >= 0");
    }
    const auto d = static_cast<Eigen::Index>(pairs.dimension());
    const Eigen::MatrixXd s_uu = pairs.unsafe() * pairs.unsafe().transpose();
    const Eigen::MatrixXd s_su = pairs.safe() * pairs.unsafe().transpose();
    const Eigen::MatrixXd normal = s_uu + lambda * Eigen::MatrixXd::Identity(d, d);

    // W (S_uu + lambda I) = S_su  <=>  (S_uu + lambda I) W^T = S_su^T, with a symmetric system.
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    const double scale = std::max(normal.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-12 ||
        ldlt.vectorD().minCoeff() <= 1e-14 * scale) {
        throw Error(ErrorKind::kNumerical,
                    "normal matrix S_uu + lambda I is singular or ill-conditioned; use lambda > 0");
    }
    Eigen::MatrixXd w = ldlt.solve(s_su.transpose()).transpose();
    return SteerMatrix(std::move(w), {SteerMethod::kClosedForm, lambda, 0});
}

SteerTrainResult train_steer_gradient(const PairSet& pairs, const SteerConfig& config,
                                      const std::optional<Eigen::MatrixXd>& initial) {
    config.validate();
    const double lambda = config.lambda.value_or(default_ridge_lambda(pairs));
    const auto d = static_cast<Eigen::Index>(pairs.dimension());
    Eigen::MatrixXd w = initial.value_or(Eigen::MatrixXd::Identity(d, d));
    check_pairs(w, pairs);

    std::vector<double> trace{steer_objective(w, pairs, lambda)};
    double step = config.learning_rate;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const Eigen::MatrixXd g = steer_gradient(w, pairs, lambda);
        if (!g.allFinite()) {
            throw Error(ErrorKind::kNumerical, "steer gradient diverged at step " + std::to_string(epoch));
        }
        if (g.norm() < config.gradient_tolerance) {
            break;
        }
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings) {
            Eigen::MatrixXd candidate = w - step * g;
            const double value = steer_objective(candidate, pairs, lambda);
            if (std::isfinite(value) && value <= trace.back()) {
                w = std::move(candidate);
                trace.push_back(value);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
        step *= 2.0;
    }
    return {SteerMatrix(std::move(w), {SteerMethod::kGradient, lambda, config.seed}), std::move(trace)};
}

std::string encode_steer(const SteerMatrix& w) {
    ByteWriter out;
    out.bytes(kSteerMagic);
    const auto d = static_cast<Eigen::Index>(w.dimension());
    out.u32(static_cast<std::uint32_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            out.f32(static_cast<float>(w.matrix()(i, j)));
        }
    }
    return std::move(out).take();
}

SteerMatrix decode_steer(std::string_view bytes, const nlohmann::json* sidecar) {
    ByteReader in(bytes, "STSW1");
    in.expect_magic(kSteerMagic);
    const auto dim = in.u32();
    if (dim == 0) {
        throw Error(ErrorKind::kFormat, "STSW1: dimension must be positive");
    }
    if (static_cast<std::uint64_t>(dim) * dim > in.remaining() / 4) {
        throw Error(ErrorKind::kTruncated, "STSW1: matrix exceeds the file");
    }
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const float v = in.f32();
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::kNonFinite, "STSW1: non-finite matrix entry");
            }
            m(i, j) = v;
        }
    }
    in.expect_end();
    SteerMetadata meta;
    if (sidecar) {
        try {
            meta.method = parse_steer_method(sidecar->at("method").get<std::string>());
            meta.lambda = sidecar->at("lambda").get<double>();
            meta.seed = sidecar->at("seed").get<std::uint64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::kFormat, std::string("STSW1 sidecar: ") + e.what());
        }
    }
    return SteerMatrix(std::move(m), meta);
}

nlohmann::json steer_sidecar(const SteerMatrix& w, double epsilon_default, std::string_view encoded) {
    return {
        {"format", "STSW1"},
        {"dimension", w.dimension()},
        {"epsilon_default", epsilon_default},
        {"lambda", w.metadata().lambda},
        {"method", to_string(w.metadata().method)},
        {"seed", w.metadata().seed},
        {"weights_sha256", sha256_hex(encoded)},
    };
}

void save_steer(const SteerMatrix& w, double epsilon_default, const std::filesystem::path& path) {
    check_epsilon(epsilon_default);
    const auto encoded = encode_steer(w);
    write_file(path, encoded);
    auto sidecar_path = path;
    sidecar_path += ".json";
    write_file(sidecar_path, steer_sidecar(w, epsilon_default, encoded).dump(2) + "\n");
}

SteerMatrix load_steer(const std::filesystem::path& path, nlohmann::json* sidecar_out) {
    const auto bytes = read_file(path);
    auto sidecar_path = path;
    sidecar_path += ".json";
    if (!std::filesystem::exists(sidecar_path)) {
        return decode_steer(bytes);
    }
    const auto sidecar = nlohmann::json::parse(read_file(sidecar_path), nullptr, false);
    if (sidecar.is_discarded()) {
        throw Error(ErrorKind::kFormat, sidecar_path.string() + " is not valid JSON");
    }
    if (sidecar.value("weights_sha256", std::string()) != sha256_hex(bytes)) {
        throw Error(ErrorKind::kIntegrity, path.string() + " does not match the hash in its sidecar");
    }
    if (sidecar_out) {
        *sidecar_out = sidecar;
    }
    return decode_steer(bytes, &sidecar);
}

}  // namespace steerguard

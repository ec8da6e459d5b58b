// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/pca.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "steerguard/error.hpp"

namespace steerguard {

PcaProjection pca_project(std::span<const EmbeddingVector> vectors, std::size_t k) {
    if (k < 1) {
        throw Error(ErrorKind::kInvalidArgument, "PCA needs k >= 1");
    }
    if (vectors.size() < k + 1) {
        throw Error(ErrorKind::kInvalidArgument, "PCA with k=" + std::to_string(k) + " needs at least " +
                                                     std::to_string(k + 1) + " vectors, got " +
                                                     std::to_string(vectors.size()));
    }
    const auto dim = vectors.front().dimension();
    if (k > dim) {
        throw Error(ErrorKind::kInvalidArgument, "PCA k exceeds the input dimension");
    }
    const auto n = static_cast<Eigen::Index>(vectors.size());
    Eigen::MatrixXd data(n, static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& v = vectors[static_cast<std::size_t>(i)];
        if (v.dimension() != dim) {
            throw Error(ErrorKind::kDimensionMismatch, "PCA input " + std::to_string(i) + " has a different dimension");
        }
        data.row(i) = Eigen::Map<const Eigen::RowVectorXd>(v.values().data(), static_cast<Eigen::Index>(dim));
    }

    const Eigen::RowVectorXd mean = data.colwise().mean();
    data.rowwise() -= mean;
    const Eigen::MatrixXd covariance = (data.transpose() * data) / static_cast<double>(n - 1);
    const double total = covariance.trace();
    if (!(total > 0.0)) {
        throw Error(ErrorKind::kInvalidArgument, "PCA input is degenerate (all vectors identical)");
    }

    // Eigenvalues come back ascending.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::kNumerical, "PCA eigendecomposition failed");
    }
    const auto& eigenvalues = solver.eigenvalues();
    const auto& eigenvectors = solver.eigenvectors();

    PcaProjection out;
    out.mean.assign(mean.data(), mean.data() + mean.size());
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) {
        const auto col = static_cast<Eigen::Index>(dim - 1 - c);
        Eigen::VectorXd direction = eigenvectors.col(col);
        Eigen::Index pivot = 0;
        direction.cwiseAbs().maxCoeff(&pivot);
        if (direction(pivot) < 0.0) {
            direction = -direction;
        }
        basis.col(static_cast<Eigen::Index>(c)) = direction;
        out.components.emplace_back(direction.data(), direction.data() + direction.size());
        out.explained_variance_ratio.push_back(std::max(0.0, eigenvalues(col)) / total);
    }

    const Eigen::MatrixXd projected = data * basis;
    out.points.resize(vectors.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        out.points[static_cast<std::size_t>(i)].resize(k);
        for (std::size_t c = 0; c < k; ++c) {
            out.points[static_cast<std::size_t>(i)][c] = projected(i, static_cast<Eigen::Index>(c));
        }
    }
    return out;
}

}  // namespace steerguard

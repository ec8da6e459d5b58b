// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "steerguard/embedding.hpp"

namespace steerguard {

struct PcaProjection {
    /// points[i] is the k-dimensional projection of input i.
    std::vector<std::vector<double>> points;
    /// Fraction of total variance per retained axis, non-increasing.
    std::vector<double> explained_variance_ratio;
    /// k principal directions, each of the input dimension. The largest-magnitude
    /// loading of every direction is positive.
    std::vector<std::vector<double>> components;
    std::vector<double> mean;
};

/// Mean-centred projection onto the top-k principal directions.
/// Requires at least k+1 vectors and 1 <= k <= dimension; throws on all-identical input.
PcaProjection pca_project(std::span<const EmbeddingVector> vectors, std::size_t k);

}  // namespace steerguard

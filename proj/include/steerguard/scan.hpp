// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "steerguard/embedding.hpp"
#include "steerguard/mlp.hpp"

namespace steerguard {

/// Half-open token range [start, end).
struct TokenSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - start; }
    bool operator==(const TokenSpan&) const = default;
};

/// Every contiguous span of each size w <= n_tokens, ordered by (w, start).
/// Throws Error(kInvalidArgument) for n_tokens == 0, an empty size set, or w == 0.
std::vector<TokenSpan> extract_windows(std::size_t n_tokens, const std::set<std::size_t>& window_sizes);
std::vector<TokenSpan> extract_windows(std::span<const std::string> tokens, const std::set<std::size_t>& window_sizes);

enum class Pooling { kMean, kMax };

std::string_view to_string(Pooling pooling);
Pooling parse_pooling(std::string_view name);

/// Pools the token vectors of `span` into one phrase vector.
std::vector<double> pool_span(const EmbeddingSequence& seq, TokenSpan span, Pooling pooling);

/// Per-concept mean embeddings used to attach a best-effort concept name to flags.
struct ConceptCentroids {
    std::vector<std::string> names;
    std::vector<EmbeddingVector> centroids;

    bool empty() const { return names.empty(); }
    /// Name of the centroid with the highest cosine similarity to `v`.
    std::optional<std::string> nearest(std::span<const double> v) const;
    bool operator==(const ConceptCentroids&) const = default;
};

/// Means of the unsafe records of `table`, grouped by concept tag (sorted by name).
ConceptCentroids concept_centroids(const EmbeddingTable& table);

struct ScanOptions {
    std::set<std::size_t> window_sizes{1, 2, 3};
    Pooling pooling = Pooling::kMean;
    double threshold = 0.5;

    void validate() const;
};

struct WindowScore {
    TokenSpan span;
    double probability = 0.0;
    bool flagged = false;
};

struct FlaggedSpan {
    TokenSpan span;
    /// Window size of the highest-scoring window merged into this span.
    std::size_t window_size = 0;
    double probability = 0.0;
    std::optional<std::string> concept_name;
};

struct ScanReport {
    std::vector<FlaggedSpan> flagged;
    std::vector<WindowScore> windows;
    double threshold = 0.5;
    std::size_t n_tokens = 0;

    std::size_t flagged_window_count() const;
};

/// Classifies every window that contains no special token. Windows with
/// probability >= threshold are flagged; overlapping flagged windows (sharing at least
/// one token) merge into maximal spans that keep the highest probability.
ScanReport scan_prompt(const MlpParams& params, const EmbeddingSequence& seq, const ScanOptions& options,
                       const ConceptCentroids* centroids = nullptr);

}  // namespace steerguard

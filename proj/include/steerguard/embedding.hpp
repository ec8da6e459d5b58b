// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace steerguard {

/// Fixed-length real vector with all entries finite.
///
/// Values are held in double precision for arithmetic; the on-disk formats store
/// float32, so anything read from a file or produced by the synthetic generators is
/// exactly float-representable.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    /// Throws Error(kNonFinite) if any entry is NaN or infinite.
    explicit EmbeddingVector(std::vector<double> values);

    static EmbeddingVector from_floats(std::span<const float> values);

    std::size_t dimension() const { return m_values.size(); }
    std::span<const double> values() const { return m_values; }
    double operator[](std::size_t i) const { return m_values[i]; }

    /// Entries rounded to float32, as they would be persisted.
    std::vector<float> to_floats() const;

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<double> m_values;
};

/// Per-token prompt embedding. Special tokens (begin/end/padding) are marked so that
/// scanning and steering can skip them.
class EmbeddingSequence {
public:
    EmbeddingSequence(std::vector<std::string> tokens, std::vector<EmbeddingVector> vectors,
                      std::vector<bool> special = {});

    std::size_t size() const { return m_tokens.size(); }
    std::size_t dimension() const { return m_vectors.front().dimension(); }
    const std::vector<std::string>& tokens() const { return m_tokens; }
    const std::vector<EmbeddingVector>& vectors() const { return m_vectors; }
    const std::vector<bool>& special() const { return m_special; }
    bool is_special(std::size_t i) const { return m_special[i]; }

    bool operator==(const EmbeddingSequence&) const = default;

private:
    std::vector<std::string> m_tokens;
    std::vector<EmbeddingVector> m_vectors;
    std::vector<bool> m_special;
};

enum class Label : std::uint8_t { kSafe = 0, kUnsafe = 1 };

struct PhraseRecord {
    std::string text;
    Label label = Label::kSafe;
    std::optional<std::string> concept_name;
    EmbeddingVector embedding;

    bool operator==(const PhraseRecord&) const = default;
};

struct Provenance {
    enum class Kind { kRealEncoder, kSynthetic };
    Kind kind = Kind::kRealEncoder;
    std::uint64_t seed = 0;
};

/// Immutable collection of labelled phrase embeddings sharing one dimension.
class EmbeddingTable {
public:
    /// Validates: dimension >= 1, every embedding has that dimension, phrase texts are
    /// unique, unsafe records carry a concept tag.
    EmbeddingTable(std::size_t dimension, std::vector<PhraseRecord> records, Provenance provenance = {});

    std::size_t dimension() const { return m_dimension; }
    std::size_t size() const { return m_records.size(); }
    bool empty() const { return m_records.empty(); }
    const std::vector<PhraseRecord>& records() const { return m_records; }
    const PhraseRecord& operator[](std::size_t i) const { return m_records[i]; }
    const Provenance& provenance() const { return m_provenance; }

    const PhraseRecord* find(std::string_view text) const;
    std::size_t count(Label label) const;

    /// Provenance is in-memory metadata only and does not take part in equality.
    bool operator==(const EmbeddingTable& other) const {
        return m_dimension == other.m_dimension && m_records == other.m_records;
    }

private:
    std::size_t m_dimension;
    std::vector<PhraseRecord> m_records;
    Provenance m_provenance;
    std::unordered_map<std::string, std::size_t> m_index;
};

/// Two isotropic unit-variance Gaussian clusters: safe records around +mu, unsafe
/// around -mu, with |2 mu| = separation along a seed-dependent random direction.
/// Safe records are named "safe_<i>", unsafe "unsafe_<i>" with concept "synthetic".
EmbeddingTable synth_cluster_table(std::uint64_t seed, std::size_t n_per_class, std::size_t dim,
                                   double separation);

/// Throws Error(kDimensionMismatch) or Error(kInvalidArgument) for zero vectors.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

}  // namespace steerguard

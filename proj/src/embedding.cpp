// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "steerguard/error.hpp"
#include "steerguard/random.hpp"

namespace steerguard {

EmbeddingVector::EmbeddingVector(std::vector<double> values) : m_values(std::move(values)) {
    for (std::size_t i = 0; i < m_values.size(); ++i) {
        if (!std::isfinite(m_values[i])) {
            throw Error(ErrorKind::kNonFinite, "embedding entry " + std::to_string(i) + " is not finite");
        }
    }
}

EmbeddingVector EmbeddingVector::from_floats(std::span<const float> values) {
    return EmbeddingVector(std::vector<double>(values.begin(), values.end()));
}

std::vector<float> EmbeddingVector::to_floats() const {
    std::vector<float> out(m_values.size());
    std::transform(m_values.begin(), m_values.end(), out.begin(), [](double v) { return static_cast<float>(v); });
    return out;
}

EmbeddingSequence::EmbeddingSequence(std::vector<std::string> tokens, std::vector<EmbeddingVector> vectors,
                                     std::vector<bool> special)
    : m_tokens(std::move(tokens)), m_vectors(std::move(vectors)), m_special(std::move(special)) {
    if (m_tokens.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "embedding sequence must contain at least one token");
    }
    if (m_tokens.size() != m_vectors.size()) {
        throw Error(ErrorKind::kInvalidArgument, "sequence has " + std::to_string(m_tokens.size()) + " tokens but " +
                                                     std::to_string(m_vectors.size()) + " vectors");
    }
    if (m_special.empty()) {
        m_special.assign(m_tokens.size(), false);
    } else if (m_special.size() != m_tokens.size()) {
        throw Error(ErrorKind::kInvalidArgument, "special-token mask length does not match token count");
    }
    const auto dim = m_vectors.front().dimension();
    if (dim == 0) {
        throw Error(ErrorKind::kInvalidArgument, "sequence vectors must have dimension >= 1");
    }
    for (std::size_t i = 1; i < m_vectors.size(); ++i) {
        if (m_vectors[i].dimension() != dim) {
            throw Error(ErrorKind::kDimensionMismatch, "token " + std::to_string(i) + " has dimension " +
                                                           std::to_string(m_vectors[i].dimension()) + ", expected " +
                                                           std::to_string(dim));
        }
    }
}

EmbeddingTable::EmbeddingTable(std::size_t dimension, std::vector<PhraseRecord> records, Provenance provenance)
    : m_dimension(dimension), m_records(std::move(records)), m_provenance(provenance) {
    if (m_dimension == 0) {
        throw Error(ErrorKind::kInvalidArgument, "table dimension must be >= 1");
    }
    m_index.reserve(m_records.size());
    for (std::size_t i = 0; i < m_records.size(); ++i) {
        const auto& record = m_records[i];
        if (record.embedding.dimension() != m_dimension) {
            throw Error(ErrorKind::kDimensionMismatch, "record \"" + record.text + "\" has dimension " +
                                                           std::to_string(record.embedding.dimension()) +
                                                           ", table dimension is " + std::to_string(m_dimension));
        }
        if (record.label == Label::kUnsafe && !record.concept_name) {
            throw Error(ErrorKind::kInvalidArgument, "unsafe record \"" + record.text + "\" has no concept tag");
        }
        if (!m_index.emplace(record.text, i).second) {
            throw Error(ErrorKind::kInvalidArgument, "duplicate phrase text \"" + record.text + "\"");
        }
    }
}

const PhraseRecord* EmbeddingTable::find(std::string_view text) const {
    const auto it = m_index.find(std::string(text));
    return it == m_index.end() ? nullptr : &m_records[it->second];
}

std::size_t EmbeddingTable::count(Label label) const {
    return static_cast<std::size_t>(
        std::count_if(m_records.begin(), m_records.end(), [label](const auto& r) { return r.label == label; }));
}

EmbeddingTable synth_cluster_table(std::uint64_t seed, std::size_t n_per_class, std::size_t dim, double separation) {
    if (n_per_class < 1) {
        throw Error(ErrorKind::kInvalidArgument, "n_per_class must be >= 1");
    }
    if (dim < 2) {
        throw Error(ErrorKind::kInvalidArgument, "dim must be >= 2");
    }
    if (!(separation >= 0.0) || !std::isfinite(separation)) {
        throw Error(ErrorKind::kInvalidArgument, "separation must be finite and >= 0");
    }

    Rng rng(seed);
    std::vector<double> direction(dim);
    double norm = 0.0;
    while (norm < 1e-6) {
        norm = 0.0;
        for (auto& v : direction) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
    }
    const double half = separation / 2.0;
    for (auto& v : direction) {
        v = half * v / norm;
    }

    auto sample = [&](double sign) {
        std::vector<double> values(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            values[j] = static_cast<float>(sign * direction[j] + rng.normal());
        }
        return EmbeddingVector(std::move(values));
    };

    std::vector<PhraseRecord> records;
    records.reserve(2 * n_per_class);
    for (std::size_t i = 0; i < n_per_class; ++i) {
        records.push_back({"safe_" + std::to_string(i), Label::kSafe, std::nullopt, sample(+1.0)});
    }
    for (std::size_t i = 0; i < n_per_class; ++i) {
        records.push_back({"unsafe_" + std::to_string(i), Label::kUnsafe, "synthetic", sample(-1.0)});
    }
    return EmbeddingTable(dim, std::move(records), {Provenance::Kind::kSynthetic, seed});
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        throw Error(ErrorKind::kDimensionMismatch, "cosine of vectors with dimensions " +
                                                       std::to_string(a.dimension()) + " and " +
                                                       std::to_string(b.dimension()));
    }
    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (std::size_t i = 0; i < a.dimension(); ++i) {
        dot += a[i] * b[i];
        norm_a += a[i] * a[i];
        norm_b += b[i] * b[i];
    }
    if (norm_a == 0.0 || norm_b == 0.0) {
        throw Error(ErrorKind::kInvalidArgument, "cosine similarity of a zero vector");
    }
    // sqrt(na) * sqrt(nb) is commutative, which keeps the result exactly symmetric.
    return std::clamp(dot / (std::sqrt(norm_a) * std::sqrt(norm_b)), -1.0, 1.0);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::kDimensionMismatch, "distance between vectors of different dimension");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

}  // namespace steerguard

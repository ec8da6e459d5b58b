// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/steb_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "steerguard/binary_io.hpp"
#include "steerguard/error.hpp"

namespace steerguard {
namespace {

void write_vector(ByteWriter& out, const EmbeddingVector& v) {
    for (const float x : v.to_floats()) {
        out.f32(x);
    }
}

EmbeddingVector read_vector(ByteReader& in, std::size_t dimension, const std::string& owner) {
    if (dimension > in.remaining() / 4) {
        throw Error(ErrorKind::kTruncated, owner + ": embedding extends past the end of the data");
    }
    std::vector<double> values(dimension);
    for (std::size_t j = 0; j < dimension; ++j) {
        const float x = in.f32();
        if (!std::isfinite(x)) {
            throw Error(ErrorKind::kNonFinite, owner + ": entry " + std::to_string(j) + " is not finite");
        }
        values[j] = x;
    }
    return EmbeddingVector(std::move(values));
}

std::uint32_t checked_u32(std::size_t value, const char* what) {
    if (value > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorKind::kInvalidArgument, std::string(what) + " does not fit in u32");
    }
    return static_cast<std::uint32_t>(value);
}

}  // namespace

std::string encode_embedding_table(const EmbeddingTable& table) {
    ByteWriter out;
    out.bytes(kStebMagic);
    out.u32(checked_u32(table.dimension(), "dimension"));
    out.u32(checked_u32(table.size(), "record count"));
    for (const auto& record : table.records()) {
        if (record.embedding.dimension() != table.dimension()) {
            throw Error(ErrorKind::kDimensionMismatch, "record \"" + record.text + "\" does not match table dimension");
        }
        out.str(record.text);
        out.u8(static_cast<std::uint8_t>(record.label));
        out.u8(record.concept_name ? 1 : 0);
        if (record.concept_name) {
            out.str(*record.concept_name);
        }
        write_vector(out, record.embedding);
    }
    return std::move(out).take();
}

EmbeddingTable decode_embedding_table(std::string_view bytes) {
    ByteReader in(bytes, "STEB");
    in.expect_magic(kStebMagic);
    const auto dimension = in.u32();
    if (dimension == 0) {
        throw Error(ErrorKind::kFormat, "STEB: declared dimension must be positive");
    }
    const auto count = in.u32();
    std::vector<PhraseRecord> records;
    // Cap the reservation so a corrupted count cannot trigger a huge allocation.
    records.reserve(std::min<std::size_t>(count, in.remaining() / (4 * static_cast<std::size_t>(dimension) + 6)));
    for (std::uint32_t i = 0; i < count; ++i) {
        PhraseRecord record;
        record.text = in.str();
        const auto label = in.u8();
        if (label > 1) {
            throw Error(ErrorKind::kFormat, "STEB: record " + std::to_string(i) + " has label " + std::to_string(label));
        }
        record.label = static_cast<Label>(label);
        const auto has_concept = in.u8();
        if (has_concept > 1) {
            throw Error(ErrorKind::kFormat, "STEB: record " + std::to_string(i) + " has invalid concept flag");
        }
        if (has_concept == 1) {
            record.concept_name = in.str();
        }
        record.embedding = read_vector(in, dimension, "STEB record " + std::to_string(i));
        records.push_back(std::move(record));
    }
    in.expect_end();
    try {
        return EmbeddingTable(dimension, std::move(records));
    } catch (const Error& e) {
        throw Error(ErrorKind::kFormat, "STEB: " + e.detail());
    }
}

void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path) {
    write_file(path, encode_embedding_table(table));
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path) {
    return decode_embedding_table(read_file(path));
}

std::string encode_sequences(std::span<const EmbeddingSequence> sequences, std::size_t dimension) {
    ByteWriter out;
    out.bytes(kSequenceMagic);
    out.u32(checked_u32(dimension, "dimension"));
    out.u32(checked_u32(sequences.size(), "sequence count"));
    for (std::size_t s = 0; s < sequences.size(); ++s) {
        const auto& seq = sequences[s];
        if (seq.dimension() != dimension) {
            throw Error(ErrorKind::kDimensionMismatch, "sequence " + std::to_string(s) + " has dimension " +
                                                           std::to_string(seq.dimension()) + ", expected " +
                                                           std::to_string(dimension));
        }
        out.u32(checked_u32(seq.size(), "token count"));
        for (std::size_t t = 0; t < seq.size(); ++t) {
            out.str(seq.tokens()[t]);
            out.u8(seq.is_special(t) ? 1 : 0);
            write_vector(out, seq.vectors()[t]);
        }
    }
    return std::move(out).take();
}

std::vector<EmbeddingSequence> decode_sequences(std::string_view bytes, std::size_t* dimension_out) {
    ByteReader in(bytes, "STSQ");
    in.expect_magic(kSequenceMagic);
    const auto dimension = in.u32();
    if (dimension == 0) {
        throw Error(ErrorKind::kFormat, "STSQ: declared dimension must be positive");
    }
    const auto count = in.u32();
    std::vector<EmbeddingSequence> sequences;
    for (std::uint32_t s = 0; s < count; ++s) {
        const auto n_tokens = in.u32();
        if (n_tokens == 0) {
            throw Error(ErrorKind::kFormat, "STSQ: sequence " + std::to_string(s) + " is empty");
        }
        std::vector<std::string> tokens;
        std::vector<EmbeddingVector> vectors;
        std::vector<bool> special;
        for (std::uint32_t t = 0; t < n_tokens; ++t) {
            tokens.push_back(in.str());
            const auto flag = in.u8();
            if (flag > 1) {
                throw Error(ErrorKind::kFormat, "STSQ: invalid special-token flag");
            }
            special.push_back(flag == 1);
            vectors.push_back(
                read_vector(in, dimension, "STSQ sequence " + std::to_string(s) + " token " + std::to_string(t)));
        }
        sequences.emplace_back(std::move(tokens), std::move(vectors), std::move(special));
    }
    in.expect_end();
    if (dimension_out) {
        *dimension_out = dimension;
    }
    return sequences;
}

void save_sequences(std::span<const EmbeddingSequence> sequences, std::size_t dimension,
                    const std::filesystem::path& path) {
    write_file(path, encode_sequences(sequences, dimension));
}

std::vector<EmbeddingSequence> load_sequences(const std::filesystem::path& path, std::size_t* dimension) {
    return decode_sequences(read_file(path), dimension);
}

}  // namespace steerguard

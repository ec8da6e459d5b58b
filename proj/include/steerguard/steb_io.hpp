// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "steerguard/embedding.hpp"

namespace steerguard {

inline constexpr std::string_view kStebMagic = "STEB1\n";
inline constexpr std::string_view kSequenceMagic = "STSQ1\n";

// STEB table layout (little-endian, no padding):
//   "STEB1\n" | u32 D | u32 N | N x record
//   record: u32 text_len | text | u8 label | u8 has_concept | [u32 len | concept] | D x f32
std::string encode_embedding_table(const EmbeddingTable& table);
EmbeddingTable decode_embedding_table(std::string_view bytes);

void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_embedding_table(const std::filesystem::path& path);

// Sequence file layout (little-endian, no padding):
//   "STSQ1\n" | u32 D | u32 S | S x sequence
//   sequence: u32 T | T x token
//   token: u32 text_len | text | u8 is_special | D x f32
std::string encode_sequences(std::span<const EmbeddingSequence> sequences, std::size_t dimension);
std::vector<EmbeddingSequence> decode_sequences(std::string_view bytes, std::size_t* dimension = nullptr);

void save_sequences(std::span<const EmbeddingSequence> sequences, std::size_t dimension,
                    const std::filesystem::path& path);
std::vector<EmbeddingSequence> load_sequences(const std::filesystem::path& path, std::size_t* dimension = nullptr);

}  // namespace steerguard

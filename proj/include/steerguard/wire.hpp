// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <json.hpp>
#include <string>

#include "steerguard/embedding.hpp"

namespace steerguard {

// Sequences travel as
//   {"dimension": D, "tokens": [..T strings..],
//    "embeddings": base64(T*D little-endian float32, token-major),
//    "special_tokens": [indices]}      (special_tokens optional)

/// Throws Error(kInvalidArgument) on missing/ill-typed fields and
/// Error(kDimensionMismatch) when `expected_dimension` is non-zero and differs.
EmbeddingSequence sequence_from_json(const nlohmann::json& j, std::size_t expected_dimension = 0);
nlohmann::json sequence_to_json(const EmbeddingSequence& seq);

std::string encode_float32_base64(const EmbeddingSequence& seq);

}  // namespace steerguard

// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>

#include "steerguard/mlp.hpp"

namespace steerguard {

inline constexpr std::string_view kMlpMagic = "STMW1\n";

// STMW1 layout (little-endian):
//   "STMW1\n" | u32 L | L x (u32 rows | u32 cols | rows*cols f32 weights | rows f32 biases)
// rows is the layer's output width, cols its input width. Activations live in the sidecar.
std::string encode_mlp(const MlpParams& params);
/// Without a sidecar, hidden layers are ReLU and the last layer is identity.
MlpParams decode_mlp(std::string_view bytes, const nlohmann::json* sidecar = nullptr);

struct MlpSidecar {
    std::uint64_t seed = 0;
    std::string train_config_hash;
};

/// {"format","input_dim","layers":[{"in","out","activation"}],"output":"logistic",
///  "seed","train_config_hash","weights_sha256"}
nlohmann::json mlp_sidecar(const MlpParams& params, const MlpSidecar& meta, std::string_view encoded);

/// Writes `path` and `path` + ".json".
void save_mlp(const MlpParams& params, const MlpSidecar& meta, const std::filesystem::path& path);
/// Reads `path` and, if present, its ".json" sidecar (whose weights hash must match).
MlpParams load_mlp(const std::filesystem::path& path, nlohmann::json* sidecar_out = nullptr);

}  // namespace steerguard

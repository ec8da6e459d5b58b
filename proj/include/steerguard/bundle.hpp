// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>

#include "steerguard/dataset.hpp"
#include "steerguard/mlp.hpp"
#include "steerguard/pipeline.hpp"
#include "steerguard/scan.hpp"
#include "steerguard/steering.hpp"

namespace steerguard {

inline constexpr std::string_view kBundleMagic = "STBD1\n";
inline constexpr std::string_view kBundleVersion = "steerguard-bundle/1";

/// Everything the guard needs at inference time, packaged as one immutable file.
struct ModelBundle {
    MlpParams identifier;
    SteerMatrix steer = SteerMatrix::identity(1);
    GuardPolicy policy;
    ConceptBlacklist blacklist = default_blacklist();
    std::string version = std::string(kBundleVersion);
    ConceptCentroids centroids;
    /// Optional sidecar metadata carried through from the weight files.
    nlohmann::json identifier_meta = nlohmann::json::object();

    /// Filled in by encode/decode.
    std::string identifier_sha256;
    std::string steer_sha256;
    std::string bundle_sha256;

    std::size_t dimension() const { return steer.dimension(); }
};

// Layout (little-endian):
//   "STBD1\n" | u32 manifest_len | manifest JSON
//   | u64 stmw_len | STMW1 bytes | u64 stsw_len | STSW1 bytes
//   | 32-byte SHA-256 of every preceding byte
// The manifest records the SHA-256 of each embedded payload.
std::string encode_bundle(ModelBundle& bundle);
/// Verifies every hash and the dimension agreement. Throws Error(kIntegrity) or Error(kFormat).
ModelBundle decode_bundle(std::string_view bytes);

void save_bundle(ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace steerguard

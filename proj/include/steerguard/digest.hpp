// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace steerguard {

using Sha256 = std::array<std::uint8_t, 32>;

Sha256 sha256(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);
std::string to_hex(const Sha256& digest);

std::string base64_encode(std::string_view bytes);
/// Throws Error(kFormat) on malformed input.
std::string base64_decode(std::string_view text);

}  // namespace steerguard

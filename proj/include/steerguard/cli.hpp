// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace steerguard::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the steerguard tool. Results go to `out`, diagnostics and usage text
/// to `err`. Returns 0 on success, 1 on a domain error, 2 on a usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace steerguard::cli

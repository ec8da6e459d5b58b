// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/error.hpp"

namespace steerguard {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kDimensionMismatch: return "dimension mismatch";
    case ErrorKind::kNonFinite: return "non-finite";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kNotFound: return "not found";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kEmptyResult: return "empty result";
    case ErrorKind::kIntegrity: return "integrity";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), m_kind(kind), m_detail(detail) {}

}  // namespace steerguard

// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace steerguard {

enum class ErrorKind {
    kInvalidArgument,
    kDimensionMismatch,
    kNonFinite,
    kFormat,
    kTruncated,
    kIo,
    kNotFound,
    kNumerical,
    kTransport,
    kEmptyResult,
    kIntegrity,
};

std::string_view to_string(ErrorKind kind);

/// All domain failures surface as this exception. what() is "<kind>: <detail>".
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail);

    ErrorKind kind() const noexcept { return m_kind; }
    const std::string& detail() const noexcept { return m_detail; }

private:
    ErrorKind m_kind;
    std::string m_detail;
};

}  // namespace steerguard

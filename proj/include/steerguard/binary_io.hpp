// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace steerguard {

/// Appends little-endian fields to a byte string.
class ByteWriter {
public:
    void bytes(std::string_view data) { m_out.append(data); }
    void u8(std::uint8_t value) { m_out.push_back(static_cast<char>(value)); }
    void u32(std::uint32_t value);
    void u64(std::uint64_t value);
    void f32(float value);
    /// u32 length prefix followed by the raw bytes.
    void str(std::string_view value);

    const std::string& data() const& { return m_out; }
    std::string take() && { return std::move(m_out); }

private:
    std::string m_out;
};

/// Cursor over a byte string. Every read throws Error(kTruncated) past the end.
class ByteReader {
public:
    ByteReader(std::string_view data, std::string what) : m_data(data), m_what(std::move(what)) {}

    /// Throws Error(kFormat) if the next bytes differ from `magic`.
    void expect_magic(std::string_view magic);
    std::string_view bytes(std::size_t count);
    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    std::string str();

    std::size_t offset() const { return m_pos; }
    std::size_t remaining() const { return m_data.size() - m_pos; }
    /// Throws Error(kFormat) on trailing bytes.
    void expect_end() const;

private:
    void need(std::size_t count) const;

    std::string_view m_data;
    std::string m_what;
    std::size_t m_pos = 0;
};

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, so readers never see a partial file.
void write_file(const std::filesystem::path& path, std::string_view data);

}  // namespace steerguard

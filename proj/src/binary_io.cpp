// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/binary_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <system_error>

#include "steerguard/error.hpp"

namespace steerguard {


void ByteWriter::u32(std::uint32_t value) {
    for (int shift = 0; shift < 32; shift += 8) {
        m_out.push_back(static_cast<char>((value >> shift) & 0xffu));
    }
}

void ByteWriter::u64(std::uint64_t value) {
    for (int shift = 0; shift < 64; shift += 8) {
        m_out.push_back(static_cast<char>((value >> shift) & 0xffu));
    }
}

void ByteWriter::f32(float value) {
    u32(std::bit_cast<std::uint32_t>(value));
}

void ByteWriter::str(std::string_view value) {
    u32(static_cast<std::uint32_t>(value.size()));
    m_out.append(value);
}

void ByteReader::need(std::size_t count) const {
    if (count > remaining()) {
        throw Error(ErrorKind::kTruncated, m_what + ": needed " + std::to_string(count) + " bytes at offset " +
                                               std::to_string(m_pos) + ", " + std::to_string(remaining()) +
                                               " available");
    }
}

void ByteReader::expect_magic(std::string_view magic) {
    if (remaining() < magic.size() || m_data.substr(m_pos, magic.size()) != magic) {
        throw Error(ErrorKind::kFormat, m_what + ": bad magic, expected \"" +
                                            std::string(magic.substr(0, magic.size() - 1)) + "\"");
    }
    m_pos += magic.size();
}

std::string_view ByteReader::bytes(std::size_t count) {
    need(count);
    const auto out = m_data.substr(m_pos, count);
    m_pos += count;
    return out;
}

std::uint8_t ByteReader::u8() {
    need(1);
    return static_cast<std::uint8_t>(m_data[m_pos++]);
}

std::uint32_t ByteReader::u32() {
    need(4);
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
        value |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(m_data[m_pos + i])) << (8 * i);
    }
    m_pos += 4;
    return value;
}

std::uint64_t ByteReader::u64() {
    need(8);
    std::uint64_t value = 0;
    for (int i = 0; i < 8; ++i) {
        value |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(m_data[m_pos + i])) << (8 * i);
    }
    m_pos += 8;
    return value;
}

float ByteReader::f32() {
    return std::bit_cast<float>(u32());
}

std::string ByteReader::str() {
    const auto length = u32();
    return std::string(bytes(length));
}

void ByteReader::expect_end() const {
    if (remaining() != 0) {
        throw Error(ErrorKind::kFormat, m_what + ": " + std::to_string(remaining()) + " trailing bytes");
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::kIo, "cannot open " + path.string());
    }
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error(ErrorKind::kIo, "read failed for " + path.string());
    }
    return data;
}

void write_file(const std::filesystem::path& path, std::string_view data) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorKind::kIo, "cannot open " + tmp.string() + " for writing");
        }
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        out.flush();
        if (!out) {
            throw Error(ErrorKind::kIo, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::kIo, "cannot move " + tmp.string() + " to " + path.string());
    }
}

}  // namespace steerguard

// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <limits>

#include "steerguard/binary_io.hpp"
#include "steerguard/error.hpp"
#include "steerguard/steb_io.hpp"
#include "support.hpp"

using namespace steerguard;

namespace {

// Byte size derived from the format definition: header, then per record a text length
// prefix and text, label and concept flag, optional concept, and D float32 values.
std::size_t expected_steb_size(const EmbeddingTable& t) {
    std::size_t size = 6 + 4 + 4;
    for (const auto& r : t.records()) {
        size += 4 + r.text.size() + 1 + 1;
        if (r.concept_name) {
            size += 4 + r.concept_name->size();
        }
        size += t.dimension() * 4;
    }
    return size;
}

EmbeddingTable two_records() {
    return EmbeddingTable(3, {{"got shot", Label::kUnsafe, "violence", EmbeddingVector({0.5, -1.25, 3.0})},
                              {"a dog", Label::kSafe, std::nullopt, EmbeddingVector({0.0009765625, 0.0, -7.5})}});
}

ErrorKind decode_kind(std::string_view bytes) {
    try {
        decode_embedding_table(bytes);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::kIo;
}

}  // namespace

TEST(Steb, EmptyTableRoundTrip) {
    sgtest::TempDir dir;
    const EmbeddingTable t(4, {});
    save_embedding_table(t, dir / "e.steb");
    const auto back = load_embedding_table(dir / "e.steb");
    EXPECT_EQ(back.dimension(), 4u);
    EXPECT_TRUE(back.empty());
    EXPECT_EQ(std::filesystem::file_size(dir / "e.steb"), 14u);
}

TEST(Steb, TwoRecordRoundTripIsBitExact) {
    sgtest::TempDir dir;
    const auto t = two_records();
    save_embedding_table(t, dir / "t.steb");
    const auto back = load_embedding_table(dir / "t.steb");
    EXPECT_EQ(back, t);
    EXPECT_EQ(encode_embedding_table(back), read_file(dir / "t.steb"));
}

TEST(Steb, HeaderLayout) {
    const auto bytes = encode_embedding_table(two_records());
    ASSERT_GE(bytes.size(), 14u);
    EXPECT_EQ(bytes.substr(0, 6), "STEB1\n");
    std::uint32_t d = 0;
    std::uint32_t n = 0;
    std::memcpy(&d, bytes.data() + 6, 4);
    std::memcpy(&n, bytes.data() + 10, 4);
    EXPECT_EQ(d, 3u);
    EXPECT_EQ(n, 2u);
}

TEST(Steb, SyntheticThousandRecordFileSize) {
    sgtest::TempDir dir;
    const auto t = synth_cluster_table(7, 500, 768, 8.0);
    save_embedding_table(t, dir / "big.steb");
    const auto size = std::filesystem::file_size(dir / "big.steb");
    EXPECT_EQ(size, expected_steb_size(t));
    // safe_0..safe_499 / unsafe_0..unsafe_499 with concept "synthetic".
    EXPECT_EQ(size, 3093294u);
    EXPECT_EQ(load_embedding_table(dir / "big.steb"), t);
}

TEST(Steb, BadMagicIsFormatError) {
    auto bytes = encode_embedding_table(two_records());
    bytes[0] = 'X';
    EXPECT_EQ(decode_kind(bytes), ErrorKind::kFormat);
    try {
        decode_embedding_table(bytes);
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("format"), std::string::npos);
    }
}

TEST(Steb, EveryTruncationIsTruncatedError) {
    const auto bytes = encode_embedding_table(two_records());
    for (std::size_t cut = 6; cut < bytes.size(); ++cut) {
        EXPECT_EQ(decode_kind(std::string_view(bytes).substr(0, cut)), ErrorKind::kTruncated) << "cut=" << cut;
    }
}

TEST(Steb, TruncatedFileYieldsNoTable) {
    sgtest::TempDir dir;
    const auto bytes = encode_embedding_table(synth_cluster_table(1, 5, 8, 1.0));
    write_file(dir / "cut.steb", bytes.substr(0, bytes.size() / 2));
    try {
        load_embedding_table(dir / "cut.steb");
        FAIL() << "expected truncation error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::kTruncated);
        EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
    }
}

TEST(Steb, RejectsNonFiniteValues) {
    auto bytes = encode_embedding_table(two_records());
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(bytes.data() + bytes.size() - 4, &nan, 4);
    EXPECT_EQ(decode_kind(bytes), ErrorKind::kNonFinite);
    const float inf = std::numeric_limits<float>::infinity();
    std::memcpy(bytes.data() + bytes.size() - 4, &inf, 4);
    EXPECT_EQ(decode_kind(bytes), ErrorKind::kNonFinite);
}

TEST(Steb, RejectsZeroDimensionBadLabelAndTrailingBytes) {
    auto zero_dim = encode_embedding_table(EmbeddingTable(4, {}));
    std::memset(zero_dim.data() + 6, 0, 4);
    EXPECT_EQ(decode_kind(zero_dim), ErrorKind::kFormat);

    auto bad_label = encode_embedding_table(two_records());
    // First record: u32 len + "got shot" then the label byte.
    bad_label[14 + 4 + 8] = 2;
    EXPECT_EQ(decode_kind(bad_label), ErrorKind::kFormat);

    EXPECT_EQ(decode_kind(encode_embedding_table(two_records()) + "x"), ErrorKind::kFormat);
}

TEST(Steb, MissingFileIsIoError) {
    try {
        load_embedding_table("/nonexistent/steerguard/none.steb");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::kIo);
    }
}

TEST(Sequences, RoundTripWithSpecialTokens) {
    sgtest::TempDir dir;
    std::mt19937_64 gen(3);
    std::vector<EmbeddingSequence> seqs;
    seqs.push_back(sgtest::random_sequence(gen, 5, 6, {true, false, false, false, true}));
    seqs.push_back(sgtest::random_sequence(gen, 1, 6));
    save_sequences(seqs, 6, dir / "s.stsq");
    std::size_t d = 0;
    const auto back = load_sequences(dir / "s.stsq", &d);
    EXPECT_EQ(d, 6u);
    EXPECT_EQ(back, seqs);
    EXPECT_EQ(encode_sequences(back, 6), read_file(dir / "s.stsq"));
}

TEST(Sequences, EmptyFileListAndErrors) {
    const auto bytes = encode_sequences({}, 3);
    std::size_t d = 0;
    EXPECT_TRUE(decode_sequences(bytes, &d).empty());
    EXPECT_EQ(d, 3u);
    std::mt19937_64 gen(4);
    const std::vector<EmbeddingSequence> one{sgtest::random_sequence(gen, 3, 2)};
    const auto full = encode_sequences(one, 2);
    for (std::size_t cut = 6; cut < full.size(); ++cut) {
        try {
            decode_sequences(std::string_view(full).substr(0, cut));
            ADD_FAILURE() << "cut=" << cut;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::kTruncated);
        }
    }
    EXPECT_THROW(encode_sequences(one, 3), Error);
}

TEST(Steb, HugeDeclaredDimensionIsTruncationNotAllocation) {
    auto bytes = encode_embedding_table(two_records());
    bytes[9] = static_cast<char>(0x7f);
    EXPECT_EQ(decode_kind(bytes), ErrorKind::kTruncated);
    std::mt19937_64 gen(4);
    const std::vector<EmbeddingSequence> seqs{sgtest::random_sequence(gen, 2, 3)};
    auto seq_bytes = encode_sequences(seqs, 3);
    seq_bytes[9] = static_cast<char>(0x7f);
    EXPECT_THROW(decode_sequences(seq_bytes), Error);
}

// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "steerguard/binary_io.hpp"
#include "steerguard/bundle.hpp"
#include "steerguard/digest.hpp"
#include "steerguard/error.hpp"
#include "steerguard/mlp_io.hpp"
#include "support.hpp"

using namespace steerguard;

TEST(Bundle, RoundTripPreservesEverything) {
    auto b = sgtest::make_bundle(6, 3);
    b.policy.epsilon = 0.4;
    b.policy.window_sizes = {1, 4};
    b.centroids = concept_centroids(EmbeddingTable(
        6, {{"x", Label::kUnsafe, "hate", EmbeddingVector({1, 0, 0, 0, 0, 0})},
            {"y", Label::kUnsafe, "violence", EmbeddingVector({0, 1, 0, 0, 0, 0})}}));
    const auto bytes = encode_bundle(b);
    EXPECT_EQ(bytes.substr(0, 6), kBundleMagic);
    EXPECT_EQ(b.bundle_sha256.size(), 64u);

    const auto back = decode_bundle(bytes);
    EXPECT_EQ(encode_mlp(back.identifier), encode_mlp(b.identifier));
    EXPECT_TRUE(back.steer.matrix() == b.steer.matrix());
    EXPECT_EQ(back.policy.to_json(), b.policy.to_json());
    EXPECT_EQ(back.blacklist, b.blacklist);
    EXPECT_EQ(back.centroids, b.centroids);
    EXPECT_EQ(back.version, kBundleVersion);
    EXPECT_EQ(back.bundle_sha256, b.bundle_sha256);
    EXPECT_EQ(back.identifier_sha256, sha256_hex(encode_mlp(b.identifier)));
    EXPECT_EQ(back.steer_sha256, sha256_hex(encode_steer(b.steer)));

    auto again = back;
    EXPECT_EQ(encode_bundle(again), bytes);
}

TEST(Bundle, SaveLoadFile) {
    sgtest::TempDir dir;
    auto b = sgtest::make_bundle(3, 4);
    save_bundle(b, dir / "m.bundle");
    const auto back = load_bundle(dir / "m.bundle");
    EXPECT_EQ(back.bundle_sha256, b.bundle_sha256);
    EXPECT_EQ(back.dimension(), 3u);
    EXPECT_THROW(load_bundle(dir / "missing.bundle"), Error);
}

TEST(Bundle, EverySingleByteCorruptionDetected) {
    auto b = sgtest::make_bundle(3, 5);
    const auto bytes = encode_bundle(b);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        auto bad = bytes;
        bad[i] = static_cast<char>(bad[i] ^ 0x5a);
        EXPECT_THROW(decode_bundle(bad), Error) << "byte " << i;
    }
    for (std::size_t cut = 0; cut < bytes.size(); cut += 7) {
        EXPECT_THROW(decode_bundle(std::string_view(bytes).substr(0, cut)), Error) << "cut " << cut;
    }
    EXPECT_THROW(decode_bundle(bytes + "x"), Error);
}

TEST(Bundle, PayloadTamperWithRecomputedTrailerIsIntegrityError) {
    auto b = sgtest::make_bundle(3, 6);
    auto bytes = encode_bundle(b);
    // Flip a byte in the steer payload (just before the trailer) and fix up the
    // outer hash: the manifest's per-payload hash must still catch it.
    bytes[bytes.size() - 33] = static_cast<char>(bytes[bytes.size() - 33] ^ 0x01);
    const auto digest = sha256(std::string_view(bytes).substr(0, bytes.size() - 32));
    std::copy(digest.begin(), digest.end(), bytes.end() - 32);
    try {
        decode_bundle(bytes);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::kIntegrity);
    }
}

TEST(Bundle, DimensionMismatchRejected) {
    auto b = sgtest::make_bundle(4, 7);
    b.steer = SteerMatrix::identity(3);
    EXPECT_THROW(encode_bundle(b), Error);
}

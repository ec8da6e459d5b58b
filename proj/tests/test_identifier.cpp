// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <json.hpp>

#include "steerguard/binary_io.hpp"
#include "steerguard/digest.hpp"
#include "steerguard/error.hpp"
#include "steerguard/eval.hpp"
#include "steerguard/identifier.hpp"
#include "steerguard/mlp_io.hpp"
#include "support.hpp"

using namespace steerguard;

namespace {

TrainConfig small_config(std::uint64_t seed) {
    TrainConfig c;
    c.seed = seed;
    c.epochs = 5;
    c.hidden = {16, 8};
    return c;
}

}  // namespace

TEST(TrainConfig, Validation) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.epochs = 0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.learning_rate = 0.0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.optimizer = "adam";
    EXPECT_THROW(c.validate(), Error);
}

TEST(TrainConfig, Defaults) {
    const TrainConfig c;
    EXPECT_EQ(c.epochs, 50u);
    EXPECT_EQ(c.batch_size, 32u);
    EXPECT_EQ(c.learning_rate, 1e-3);
    EXPECT_EQ(c.momentum, 0.9);
    EXPECT_EQ(c.hidden, (std::vector<std::size_t>{256, 64}));
}

TEST(TrainIdentifier, LossDecreases) {
    const auto t = synth_cluster_table(1, 100, 8, 4.0);
    const auto r = train_identifier(t, small_config(2));
    EXPECT_EQ(r.log.epoch_losses.size(), 5u);
    EXPECT_LT(r.log.final_loss(), r.log.initial_loss);
}

TEST(TrainIdentifier, BitReproducibleWeightFiles) {
    sgtest::TempDir dir;
    const auto t = synth_cluster_table(3, 60, 8, 3.0);
    TrainConfig c = small_config(11);
    const auto a = train_identifier(t, c);
    const auto b = train_identifier(t, c);
    const MlpSidecar meta{c.seed, sha256_hex(c.to_json())};
    save_mlp(a.params, meta, dir / "a.stmw");
    save_mlp(b.params, meta, dir / "b.stmw");
    EXPECT_EQ(read_file(dir / "a.stmw"), read_file(dir / "b.stmw"));
    EXPECT_EQ(read_file(dir / "a.stmw.json"), read_file(dir / "b.stmw.json"));
    EXPECT_EQ(a.log.epoch_losses, b.log.epoch_losses);
}

TEST(TrainIdentifier, SingleClassRejected) {
    const EmbeddingTable t(2, {{"a", Label::kSafe, std::nullopt, EmbeddingVector({1.0, 0.0})},
                               {"b", Label::kSafe, std::nullopt, EmbeddingVector({0.0, 1.0})}});
    EXPECT_THROW(train_identifier(t, small_config(1)), Error);
}

TEST(TrainIdentifier, DivergenceReportsEpoch) {
    const auto t = synth_cluster_table(4, 50, 4, 2.0);
    auto c = small_config(1);
    c.learning_rate = 1e200;
    c.momentum = 0.0;
    try {
        train_identifier(t, c);
        FAIL() << "expected divergence";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::kNumerical);
        EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
    }
}

TEST(TrainIdentifier, EarlyStopping) {
    // Zero inputs on a balanced table: zero biases make every gradient vanish, so the
    // loss sits at ln 2 and never improves.
    std::vector<PhraseRecord> records;
    for (int i = 0; i < 40; ++i) {
        records.push_back({"p" + std::to_string(i), i % 2 ? Label::kUnsafe : Label::kSafe,
                           i % 2 ? std::optional<std::string>("synthetic") : std::nullopt,
                           EmbeddingVector(std::vector<double>(4, 0.0))});
    }
    const EmbeddingTable t(4, records);
    auto c = small_config(1);
    c.epochs = 500;
    c.batch_size = 40;
    c.early_stop_patience = 2;
    const auto r = train_identifier(t, c);
    EXPECT_TRUE(r.log.stopped_early);
    EXPECT_EQ(r.log.epoch_losses.size(), 2u);
    EXPECT_NEAR(r.log.final_loss(), std::log(2.0), 1e-12);

    c.early_stop_patience = 0;
    c.epochs = 7;
    EXPECT_EQ(train_identifier(t, c).log.epoch_losses.size(), 7u);
}

TEST(TrainIdentifier, ClassWeightingHandlesImbalance) {
    // 20 unsafe vs 200 safe; weighting keeps recall on the minority class.
    auto base = synth_cluster_table(5, 200, 8, 5.0);
    std::vector<PhraseRecord> records;
    std::size_t unsafe = 0;
    for (const auto& r : base.records()) {
        if (r.label == Label::kUnsafe && unsafe++ >= 20) {
            continue;
        }
        records.push_back(r);
    }
    const EmbeddingTable t(8, records);
    auto c = small_config(3);
    c.epochs = 20;
    c.class_weighting = true;
    const auto r = train_identifier(t, c);
    const auto m = eval_identifier(r.params, t, 0.5);
    ASSERT_TRUE(m.recall);
    EXPECT_GE(*m.recall, 0.9);
}

TEST(SplitTable, DeterministicPartition) {
    const auto t = synth_cluster_table(2, 50, 4, 1.0);
    const auto a = split_table(t, 0.2, 9);
    const auto b = split_table(t, 0.2, 9);
    EXPECT_EQ(a.test, b.test);
    EXPECT_EQ(a.test.size(), 20u);
    EXPECT_EQ(a.train.size(), 80u);
    for (const auto& r : a.test.records()) {
        EXPECT_EQ(a.train.find(r.text), nullptr);
    }
    EXPECT_THROW(split_table(t, 0.0, 1), Error);
    EXPECT_THROW(split_table(t, 1.0, 1), Error);
}

TEST(MlpIo, RoundTripAndSidecar) {
    sgtest::TempDir dir;
    auto p = init_mlp(5, std::vector<std::size_t>{7, 3}, 4);
    quantize_to_float(p);
    save_mlp(p, {4, "abc"}, dir / "m.stmw");
    nlohmann::json side;
    const auto back = load_mlp(dir / "m.stmw", &side);
    EXPECT_EQ(back, p);
    EXPECT_EQ(side.at("seed"), 4);
    EXPECT_EQ(side.at("train_config_hash"), "abc");
    EXPECT_EQ(side.at("input_dim"), 5);
    EXPECT_EQ(side.at("layers").size(), 3u);
    EXPECT_EQ(side.at("weights_sha256"), sha256_hex(read_file(dir / "m.stmw")));
    EXPECT_EQ(encode_mlp(back), read_file(dir / "m.stmw"));
}

TEST(MlpIo, LayoutWithoutSidecar) {
    const auto p = sgtest::linear_mlp({0.5, -2.0}, 0.25);
    const auto bytes = encode_mlp(p);
    EXPECT_EQ(bytes.substr(0, 6), "STMW1\n");
    EXPECT_EQ(bytes.size(), 6u + 4 + (4 + 4 + 2 * 4 + 4));
    EXPECT_EQ(decode_mlp(bytes), p);
}

TEST(MlpIo, EverySingleByteCorruptionDetected) {
    sgtest::TempDir dir;
    auto p = init_mlp(3, std::vector<std::size_t>{4}, 1);
    quantize_to_float(p);
    save_mlp(p, {1, "h"}, dir / "m.stmw");
    const auto good = read_file(dir / "m.stmw");
    for (std::size_t i = 0; i < good.size(); ++i) {
        auto bad = good;
        bad[i] = static_cast<char>(bad[i] ^ 0x5a);
        write_file(dir / "m.stmw", bad);
        EXPECT_THROW(load_mlp(dir / "m.stmw"), Error) << "byte " << i;
    }
}

TEST(MlpIo, TruncationAndTrailingBytes) {
    const auto bytes = encode_mlp(sgtest::linear_mlp({1.0, 2.0, 3.0}, 0.0));
    for (std::size_t cut = 6; cut < bytes.size(); ++cut) {
        EXPECT_THROW(decode_mlp(std::string_view(bytes).substr(0, cut)), Error);
    }
    EXPECT_THROW(decode_mlp(bytes + "z"), Error);
}

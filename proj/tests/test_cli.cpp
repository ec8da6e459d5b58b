// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "steerguard/binary_io.hpp"
#include "steerguard/cli.hpp"
#include "steerguard/mlp_io.hpp"
#include "steerguard/service.hpp"
#include "steerguard/steb_io.hpp"
#include "steerguard/wire.hpp"
#include "support.hpp"

using namespace steerguard;

namespace {

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "steerguard");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

/// Writes identifier + steer weights and packs them; returns the bundle path.
std::string pack_bundle(const sgtest::TempDir& dir, std::size_t dim, std::uint64_t seed,
                        std::vector<std::string> extra = {}) {
    const auto b = sgtest::make_bundle(dim, seed);
    save_mlp(b.identifier, {seed, ""}, dir / "id.stmw");
    save_steer(b.steer, 0.9, dir / "w.stsw");
    std::vector<std::string> args{"bundle", "pack", "--identifier", (dir / "id.stmw").string(), "--steer",
                                  (dir / "w.stsw").string(), "--out", (dir / "m.bundle").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run_cli(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return (dir / "m.bundle").string();
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
    EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
    const auto missing = run_cli({"synth-table", "--seed", "1"});
    EXPECT_EQ(missing.code, cli::kExitUsage);
    EXPECT_NE(missing.err.find("--out"), std::string::npos);
    EXPECT_EQ(run_cli({"synth-table", "--seed", "x", "--out", "/tmp/never"}).code, cli::kExitUsage);
    const auto unknown = run_cli({"frobnicate"});
    EXPECT_EQ(unknown.code, cli::kExitUsage);
    EXPECT_NE(unknown.err.find("unknown subcommand \"frobnicate\""), std::string::npos);
}

TEST(Cli, DomainErrorsExitOne) {
    sgtest::TempDir dir;
    write_file(dir / "junk.bundle", "not a bundle");
    write_file(dir / "in.stsq", "STSQ1\n");
    const auto r = run_cli({"guard", "--bundle", (dir / "junk.bundle").string(), "--input",
                            (dir / "in.stsq").string(), "--out", (dir / "o.stsq").string()});
    EXPECT_EQ(r.code, cli::kExitDomainError);
    EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
    const auto bad = run_cli({"synth-table", "--seed", "1", "--dim", "0", "--out", (dir / "t.steb").string()});
    EXPECT_EQ(bad.code, cli::kExitDomainError);
}

TEST(Cli, TrainSteerOneDimensionalClosedForm) {
    sgtest::TempDir dir;
    save_embedding_table(EmbeddingTable(1, {{"u1", Label::kUnsafe, "violence", EmbeddingVector({2.0})},
                                            {"u2", Label::kUnsafe, "violence", EmbeddingVector({3.0})},
                                            {"s1", Label::kSafe, std::nullopt, EmbeddingVector({4.0})},
                                            {"s2", Label::kSafe, std::nullopt, EmbeddingVector({6.0})}}),
                         dir / "e.steb");
    write_file(dir / "pairs.tsv", "unsafe_text\tsafe_text\tconcept\nu1\ts1\tviolence\nu2\ts2\tviolence\n");
    const auto r = run_cli({"train-steer", "--pairs", (dir / "pairs.tsv").string(), "--embeddings",
                            (dir / "e.steb").string(), "--method", "closed-form", "--lambda", "0", "--out",
                            (dir / "w.stsw").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(load_steer(dir / "w.stsw").matrix()(0, 0), 2.0, 1e-9);
    EXPECT_NEAR(nlohmann::json::parse(r.out).at("loss").get<double>(), 0.0, 1e-12);
}

TEST(Cli, GuardEpsilonZeroIsByteIdentical) {
    sgtest::TempDir dir;
    const auto bundle = pack_bundle(dir, 4, 2);
    ASSERT_EQ(run_cli({"synth-sequences", "--seed", "5", "--count", "12", "--tokens", "6", "--dim", "4", "--out",
                       (dir / "in.stsq").string()})
                  .code,
              0);
    const auto r = run_cli({"guard", "--bundle", bundle, "--input", (dir / "in.stsq").string(), "--out",
                            (dir / "out.stsq").string(), "--epsilon", "0", "--threshold", "0.01"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_file(dir / "out.stsq"), read_file(dir / "in.stsq"));

    ASSERT_EQ(run_cli({"synth-table", "--seed", "3", "--n-per-class", "10", "--dim", "4", "--out",
                       (dir / "t.steb").string()})
                  .code,
              0);
    const auto t = run_cli({"guard", "--bundle", bundle, "--input", (dir / "t.steb").string(), "--out",
                            (dir / "t_out.steb").string(), "--epsilon", "0"});
    ASSERT_EQ(t.code, 0) << t.err;
    EXPECT_EQ(read_file(dir / "t_out.steb"), read_file(dir / "t.steb"));
}

TEST(Cli, GuardAgreesWithService) {
    sgtest::TempDir dir;
    const auto bundle = pack_bundle(dir, 4, 3, {"--threshold", "0.3"});
    ASSERT_EQ(run_cli({"synth-sequences", "--seed", "7", "--count", "10", "--tokens", "5", "--dim", "4", "--out",
                       (dir / "in.stsq").string()})
                  .code,
              0);
    const auto r = run_cli({"guard", "--bundle", bundle, "--input", (dir / "in.stsq").string(), "--out",
                            (dir / "out.stsq").string(), "--report", (dir / "report.json").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto inputs = load_sequences(dir / "in.stsq");
    const auto outputs = load_sequences(dir / "out.stsq");
    const auto reports = nlohmann::json::parse(read_file(dir / "report.json")).at("reports");
    ServiceConfig config;
    config.port = 0;
    GuardService service(load_bundle(bundle), config);
    ASSERT_EQ(outputs.size(), inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto reply = service.handle_guard(sequence_to_json(inputs[i]).dump());
        ASSERT_EQ(reply.status, 200);
        const auto j = nlohmann::json::parse(reply.body);
        EXPECT_EQ(sequence_from_json(j), outputs[i]);
        EXPECT_EQ(j.at("report"), reports[i]);
    }
}

TEST(Cli, BundleVerifyAndScan) {
    sgtest::TempDir dir;
    const auto bundle = pack_bundle(dir, 3, 4, {"--concepts", "hate,violence"});
    const auto v = run_cli({"bundle", "verify", "--bundle", bundle});
    ASSERT_EQ(v.code, 0) << v.err;
    const auto j = nlohmann::json::parse(v.out);
    EXPECT_EQ(j.at("status"), "ok");
    EXPECT_EQ(j.at("blacklist"), (nlohmann::json{"hate", "violence"}));
    EXPECT_EQ(j.at("policy").at("epsilon"), 0.9);

    auto bytes = read_file(bundle);
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 1);
    write_file(dir / "bad.bundle", bytes);
    EXPECT_EQ(run_cli({"bundle", "verify", "--bundle", (dir / "bad.bundle").string()}).code, cli::kExitDomainError);

    ASSERT_EQ(run_cli({"synth-sequences", "--seed", "1", "--count", "3", "--tokens", "4", "--dim", "3", "--out",
                       (dir / "s.stsq").string()})
                  .code,
              0);
    const auto s = run_cli({"scan", "--bundle", bundle, "--input", (dir / "s.stsq").string()});
    ASSERT_EQ(s.code, 0) << s.err;
    EXPECT_EQ(nlohmann::json::parse(s.out).at("reports").size(), 3u);
    const auto wrong = run_cli({"synth-sequences", "--seed", "1", "--count", "1", "--tokens", "2", "--dim", "5",
                                "--out", (dir / "w.stsq").string()});
    ASSERT_EQ(wrong.code, 0);
    EXPECT_EQ(run_cli({"scan", "--bundle", bundle, "--input", (dir / "w.stsq").string()}).code,
              cli::kExitDomainError);
}

TEST(Cli, TrainAndEvaluateIdentifier) {
    sgtest::TempDir dir;
    ASSERT_EQ(run_cli({"synth-table", "--seed", "8", "--n-per-class", "100", "--dim", "8", "--separation", "8",
                       "--out", (dir / "t.steb").string()})
                  .code,
              0);
    const auto train = run_cli({"train-identifier", "--data", (dir / "t.steb").string(), "--seed", "1", "--out",
                                (dir / "id.stmw").string(), "--epochs", "30", "--hidden", "16"});
    ASSERT_EQ(train.code, 0) << train.err;
    const auto eval = run_cli({"eval", "identifier", "--model", (dir / "id.stmw").string(), "--data",
                               (dir / "t.steb").string()});
    ASSERT_EQ(eval.code, 0) << eval.err;
    EXPECT_GE(nlohmann::json::parse(eval.out).at("accuracy").get<double>(), 0.99);
}

TEST(Cli, GenDataFromShippedFixture) {
    sgtest::TempDir dir;
    const auto r = run_cli({"gen-data", "--seed", "1", "--fixture", (sgtest::data_dir() / "llm_fixture.tsv").string(),
                            "--corpus", (sgtest::data_dir() / "corpus.txt").string(), "--blacklist",
                            (sgtest::data_dir() / "blacklist.txt").string(), "--hash-dim", "32", "--out-dir",
                            (dir / "gen").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto* f : {"pairs.tsv", "identifier.steb", "phrases.steb", "summary.json"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / "gen" / f)) << f;
    }
    EXPECT_EQ(load_term_pairs(dir / "gen" / "pairs.tsv"), load_term_pairs(sgtest::data_dir() / "term_pairs.tsv"));
    const auto again = run_cli({"gen-data", "--seed", "1", "--fixture",
                                (sgtest::data_dir() / "llm_fixture.tsv").string(), "--corpus",
                                (sgtest::data_dir() / "corpus.txt").string(), "--blacklist",
                                (sgtest::data_dir() / "blacklist.txt").string(), "--hash-dim", "32", "--out-dir",
                                (dir / "gen2").string()});
    ASSERT_EQ(again.code, 0);
    EXPECT_EQ(read_file(dir / "gen" / "identifier.steb"), read_file(dir / "gen2" / "identifier.steb"));
}

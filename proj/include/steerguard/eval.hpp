// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "steerguard/embedding.hpp"
#include "steerguard/mlp.hpp"
#include "steerguard/steering.hpp"

namespace steerguard {

/// Per-record classification outcome.
struct RecordPrediction {
    std::string text;
    Label label = Label::kSafe;
    double probability = 0.0;
    bool flagged = false;
};

struct IdentifierMetrics {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t true_negatives = 0;
    std::size_t false_negatives = 0;
    double threshold = 0.5;
    double accuracy = 0.0;
    /// Absent when undefined (no predicted positives / no actual positives / no negatives).
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> false_positive_rate;
    std::vector<RecordPrediction> records;

    std::size_t total() const { return true_positives + false_positives + true_negatives + false_negatives; }
};

/// Confusion-matrix metrics; probability == threshold counts as flagged.
IdentifierMetrics metrics_from_predictions(std::vector<RecordPrediction> records, double threshold);
IdentifierMetrics eval_identifier(const MlpParams& params, const EmbeddingTable& table, double threshold);

struct SteerPairDistance {
    double pre = 0.0;
    double post = 0.0;
};

struct SteerMetrics {
    double epsilon = 0.0;
    double mean_pre_distance = 0.0;
    double mean_post_distance = 0.0;
    /// 1 - post / pre (0 when pre is 0).
    double relative_reduction = 0.0;
    std::vector<SteerPairDistance> pairs;
};

SteerMetrics metrics_from_distances(std::vector<SteerPairDistance> pairs, double epsilon);
/// pre = |E_u - E_s|, post = |steer(E_u) - E_s| at the given epsilon.
SteerMetrics eval_steer(const SteerMatrix& w, double epsilon, const PairSet& pairs);

enum class PointTag { kSafe, kUnsafe, kSteered };
std::string_view to_string(PointTag tag);

struct TaggedVector {
    EmbeddingVector vector;
    Label label = Label::kSafe;
    PointTag tag = PointTag::kSafe;
};

/// CSV text: "# explained_variance_ratio=<r1>,<r2>,..." then "x,y,...,label,tag" rows.
/// Numbers use 17 significant digits so the output is byte-reproducible.
std::string projection_csv(std::span<const TaggedVector> points, std::size_t k = 2);
void emit_projection(std::span<const TaggedVector> points, const std::filesystem::path& path, std::size_t k = 2);

struct ProjectedPoint {
    std::vector<double> coords;
    Label label = Label::kSafe;
    PointTag tag = PointTag::kSafe;
};
/// Parses projection_csv output.
std::vector<ProjectedPoint> parse_projection_csv(const std::string& csv);

/// Probe rows: original phrase, one paraphrase, and the key of the paraphrase's
/// embedding in the probe table (defaults to the paraphrase text).
struct ProbeEntry {
    std::string original;
    std::vector<std::string> paraphrase_keys;
};

/// TSV "original<TAB>paraphrase[<TAB>key]". A row with only an original (or empty
/// paraphrase) registers the original without probes. Throws Error(kFormat).
std::vector<ProbeEntry> load_probe_file(const std::filesystem::path& path);
std::vector<ProbeEntry> parse_probe_tsv(const std::string& text);

struct ProbeOutcome {
    std::string original;
    bool original_flagged = false;
    std::size_t probes = 0;
    std::size_t probes_flagged = 0;
    /// Absent when the original had no probes.
    std::optional<double> flagged_fraction;
};

struct ProbeReport {
    std::vector<ProbeOutcome> outcomes;
    /// Fraction of originals flagged.
    double plain_recall = 0.0;
    /// Fraction of all paraphrases flagged; absent with no paraphrases at all.
    std::optional<double> recall_under_paraphrase;
    double threshold = 0.5;
};

/// Embeddings of originals and paraphrases are looked up in `table` by text/key.
ProbeReport paraphrase_probe(const MlpParams& params, std::span<const ProbeEntry> probes,
                             const EmbeddingTable& table, double threshold);

nlohmann::json identifier_metrics_json(const IdentifierMetrics& m);
std::string identifier_records_csv(const IdentifierMetrics& m);
nlohmann::json steer_metrics_json(const SteerMetrics& m);
std::string steer_pairs_csv(const SteerMetrics& m);
nlohmann::json probe_report_json(const ProbeReport& r);
std::string probe_csv(const ProbeReport& r);

}  // namespace steerguard

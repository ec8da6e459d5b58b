// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/eval.hpp"

#include <cstdio>
#include <sstream>

#include "steerguard/binary_io.hpp"
#include "steerguard/error.hpp"
#include "steerguard/pca.hpp"

namespace steerguard {
namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + '"';
}

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) {
            return out;
        }
        start = pos + 1;
    }
}

}  // namespace

IdentifierMetrics metrics_from_predictions(std::vector<RecordPrediction> records, double threshold) {
    IdentifierMetrics m;
    m.threshold = threshold;
    for (auto& r : records) {
        r.flagged = r.probability >= threshold;
        const bool positive = r.label == Label::kUnsafe;
        if (r.flagged) {
            ++(positive ? m.true_positives : m.false_positives);
        } else {
            ++(positive ? m.false_negatives : m.true_negatives);
        }
    }
    const auto total = m.total();
    if (total > 0) {
        m.accuracy = static_cast<double>(m.true_positives + m.true_negatives) / static_cast<double>(total);
    }
    if (m.true_positives + m.false_positives > 0) {
        m.precision = static_cast<double>(m.true_positives) / static_cast<double>(m.true_positives + m.false_positives);
    }
    if (m.true_positives + m.false_negatives > 0) {
        m.recall = static_cast<double>(m.true_positives) / static_cast<double>(m.true_positives + m.false_negatives);
    }
    if (m.false_positives + m.true_negatives > 0) {
        m.false_positive_rate =
            static_cast<double>(m.false_positives) / static_cast<double>(m.false_positives + m.true_negatives);
    }
    m.records = std::move(records);
    return m;
}

IdentifierMetrics eval_identifier(const MlpParams& params, const EmbeddingTable& table, double threshold) {
    if (table.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "cannot evaluate on an empty table");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorKind::kInvalidArgument, "threshold must be in (0, 1)");
    }
    std::vector<RecordPrediction> records;
    records.reserve(table.size());
    for (const auto& record : table.records()) {
        const double p = mlp_forward(params, record.embedding);
        records.push_back({record.text, record.label, p, p >= threshold});
    }
    return metrics_from_predictions(std::move(records), threshold);
}

SteerMetrics metrics_from_distances(std::vector<SteerPairDistance> pairs, double epsilon) {
    SteerMetrics m;
    m.epsilon = epsilon;
    for (const auto& p : pairs) {
        m.mean_pre_distance += p.pre;
        m.mean_post_distance += p.post;
    }
    if (!pairs.empty()) {
        m.mean_pre_distance /= static_cast<double>(pairs.size());
        m.mean_post_distance /= static_cast<double>(pairs.size());
    }
    m.relative_reduction = m.mean_pre_distance > 0.0 ? 1.0 - m.mean_post_distance / m.mean_pre_distance : 0.0;
    m.pairs = std::move(pairs);
    return m;
}

SteerMetrics eval_steer(const SteerMatrix& w, double epsilon, const PairSet& pairs) {
    if (w.dimension() != pairs.dimension()) {
        throw Error(ErrorKind::kDimensionMismatch, "steer matrix and pairs differ in dimension");
    }
    std::vector<SteerPairDistance> distances;
    distances.reserve(pairs.size());
    const auto d = static_cast<Eigen::Index>(pairs.dimension());
    std::vector<double> unsafe(pairs.dimension());
    std::vector<double> safe(pairs.dimension());
    for (Eigen::Index m = 0; m < static_cast<Eigen::Index>(pairs.size()); ++m) {
        for (Eigen::Index j = 0; j < d; ++j) {
            unsafe[static_cast<std::size_t>(j)] = pairs.unsafe()(j, m);
            safe[static_cast<std::size_t>(j)] = pairs.safe()(j, m);
        }
        const auto steered = steer_embedding(w, epsilon, unsafe);
        distances.push_back({euclidean_distance(unsafe, safe), euclidean_distance(steered, safe)});
    }
    return metrics_from_distances(std::move(distances), epsilon);
}

std::string_view to_string(PointTag tag) {
    switch (tag) {
    case PointTag::kSafe: return "safe";
    case PointTag::kUnsafe: return "unsafe";
    case PointTag::kSteered: return "steered";
    }
    return "safe";
}

std::string projection_csv(std::span<const TaggedVector> points, std::size_t k) {
    if (points.size() < 3) {
        throw Error(ErrorKind::kInvalidArgument, "projection needs at least 3 vectors");
    }
    std::vector<EmbeddingVector> vectors;
    vectors.reserve(points.size());
    for (const auto& p : points) {
        vectors.push_back(p.vector);
    }
    const auto projection = pca_project(vectors, k);

    std::string out = "# explained_variance_ratio=";
    for (std::size_t c = 0; c < k; ++c) {
        out += (c ? "," : "") + num(projection.explained_variance_ratio[c]);
    }
    out += '\n';
    static constexpr const char* kAxes[] = {"x", "y", "z"};
    for (std::size_t c = 0; c < k; ++c) {
        out += c < 3 ? kAxes[c] : "pc" + std::to_string(c + 1);
        out += ',';
    }
    out += "label,tag\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (const auto v : projection.points[i]) {
            out += num(v) + ',';
        }
        out += std::to_string(static_cast<int>(points[i].label)) + ',' + std::string(to_string(points[i].tag)) + '\n';
    }
    return out;
}

void emit_projection(std::span<const TaggedVector> points, const std::filesystem::path& path, std::size_t k) {
    write_file(path, projection_csv(points, k));
}

std::vector<ProjectedPoint> parse_projection_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::vector<ProjectedPoint> points;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() < 3) {
            throw Error(ErrorKind::kFormat, "projection row has too few columns");
        }
        ProjectedPoint p;
        for (std::size_t c = 0; c + 2 < fields.size(); ++c) {
            p.coords.push_back(std::stod(fields[c]));
        }
        p.label = fields[fields.size() - 2] == "1" ? Label::kUnsafe : Label::kSafe;
        const auto& tag = fields.back();
        p.tag = tag == "steered" ? PointTag::kSteered : tag == "unsafe" ? PointTag::kUnsafe : PointTag::kSafe;
        points.push_back(std::move(p));
    }
    return points;
}

std::vector<ProbeEntry> parse_probe_tsv(const std::string& text) {
    std::vector<ProbeEntry> entries;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto entry_for = [&](const std::string& original) -> ProbeEntry& {
        for (auto& e : entries) {
            if (e.original == original) {
                return e;
            }
        }
        entries.push_back({original, {}});
        return entries.back();
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#' || (line_no == 1 && line.rfind("original\t", 0) == 0)) {
            continue;
        }
        const auto fields = split(line, '\t');
        if (fields.size() > 3 || fields[0].empty()) {
            throw Error(ErrorKind::kFormat, "probe line " + std::to_string(line_no) + " is malformed");
        }
        auto& entry = entry_for(fields[0]);
        if (fields.size() >= 2 && !fields[1].empty()) {
            entry.paraphrase_keys.push_back(fields.size() == 3 && !fields[2].empty() ? fields[2] : fields[1]);
        }
    }
    return entries;
}

std::vector<ProbeEntry> load_probe_file(const std::filesystem::path& path) {
    return parse_probe_tsv(read_file(path));
}

ProbeReport paraphrase_probe(const MlpParams& params, std::span<const ProbeEntry> probes, const EmbeddingTable& table,
                             double threshold) {
    if (probes.empty()) {
        throw Error(ErrorKind::kFormat, "probe file lists no originals");
    }
    auto lookup = [&](const std::string& key) -> const EmbeddingVector& {
        const auto* record = table.find(key);
        if (!record) {
            throw Error(ErrorKind::kFormat, "probe key \"" + key + "\" is not in the probe table");
        }
        return record->embedding;
    };
    ProbeReport report;
    report.threshold = threshold;
    std::size_t originals_flagged = 0;
    std::size_t total_probes = 0;
    std::size_t total_flagged = 0;
    for (const auto& entry : probes) {
        ProbeOutcome outcome;
        outcome.original = entry.original;
        outcome.original_flagged = mlp_forward(params, lookup(entry.original)) >= threshold;
        originals_flagged += outcome.original_flagged ? 1 : 0;
        for (const auto& key : entry.paraphrase_keys) {
            ++outcome.probes;
            if (mlp_forward(params, lookup(key)) >= threshold) {
                ++outcome.probes_flagged;
            }
        }
        if (outcome.probes > 0) {
            outcome.flagged_fraction =
                static_cast<double>(outcome.probes_flagged) / static_cast<double>(outcome.probes);
        }
        total_probes += outcome.probes;
        total_flagged += outcome.probes_flagged;
        report.outcomes.push_back(std::move(outcome));
    }
    report.plain_recall = static_cast<double>(originals_flagged) / static_cast<double>(probes.size());
    if (total_probes > 0) {
        report.recall_under_paraphrase = static_cast<double>(total_flagged) / static_cast<double>(total_probes);
    }
    return report;
}

nlohmann::json identifier_metrics_json(const IdentifierMetrics& m) {
    return {
        {"threshold", m.threshold},
        {"records", m.total()},
        {"true_positives", m.true_positives},
        {"false_positives", m.false_positives},
        {"true_negatives", m.true_negatives},
        {"false_negatives", m.false_negatives},
        {"accuracy", m.accuracy},
        {"precision", optional_json(m.precision)},
        {"recall", optional_json(m.recall)},
        {"false_positive_rate", optional_json(m.false_positive_rate)},
    };
}

std::string identifier_records_csv(const IdentifierMetrics& m) {
    std::string out = "text,label,probability,flagged\n";
    for (const auto& r : m.records) {
        out += csv_field(r.text) + ',' + std::to_string(static_cast<int>(r.label)) + ',' + num(r.probability) + ',' +
               (r.flagged ? "1" : "0") + '\n';
    }
    return out;
}

nlohmann::json steer_metrics_json(const SteerMetrics& m) {
    return {
        {"epsilon", m.epsilon},
        {"pairs", m.pairs.size()},
        {"mean_pre_distance", m.mean_pre_distance},
        {"mean_post_distance", m.mean_post_distance},
        {"relative_reduction", m.relative_reduction},
    };
}

std::string steer_pairs_csv(const SteerMetrics& m) {
    std::string out = "index,pre_distance,post_distance\n";
    for (std::size_t i = 0; i < m.pairs.size(); ++i) {
        out += std::to_string(i) + ',' + num(m.pairs[i].pre) + ',' + num(m.pairs[i].post) + '\n';
    }
    return out;
}

nlohmann::json probe_report_json(const ProbeReport& r) {
    nlohmann::json outcomes = nlohmann::json::array();
    for (const auto& o : r.outcomes) {
        outcomes.push_back({
            {"original", o.original},
            {"original_flagged", o.original_flagged},
            {"probes", o.probes},
            {"probes_flagged", o.probes_flagged},
            {"flagged_fraction", optional_json(o.flagged_fraction)},
            {"status", o.probes == 0 ? "no probes" : "probed"},
        });
    }
    return {
        {"threshold", r.threshold},
        {"plain_recall", r.plain_recall},
        {"recall_under_paraphrase", optional_json(r.recall_under_paraphrase)},
        {"outcomes", outcomes},
    };
}

std::string probe_csv(const ProbeReport& r) {
    std::string out = "original,original_flagged,probes,probes_flagged\n";
    for (const auto& o : r.outcomes) {
        out += csv_field(o.original) + ',' + (o.original_flagged ? "1" : "0") + ',' + std::to_string(o.probes) + ',' +
               std::to_string(o.probes_flagged) + '\n';
    }
    return out;
}

}  // namespace steerguard

// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/scan.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "steerguard/error.hpp"

namespace steerguard {

std::vector<TokenSpan> extract_windows(std::size_t n_tokens, const std::set<std::size_t>& window_sizes) {
    if (n_tokens == 0) {
        throw Error(ErrorKind::kInvalidArgument, "cannot extract windows from an empty token list");
    }
    if (window_sizes.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "window size set is empty");
    }
    if (*window_sizes.begin() == 0) {
        throw Error(ErrorKind::kInvalidArgument, "window sizes must be >= 1");
    }
    std::vector<TokenSpan> spans;
    for (const auto w : window_sizes) {
        if (w > n_tokens) {
            break;
        }
        for (std::size_t i = 0; i + w <= n_tokens; ++i) {
            spans.push_back({i, i + w});
        }
    }
    return spans;
}

std::vector<TokenSpan> extract_windows(std::span<const std::string> tokens, const std::set<std::size_t>& window_sizes) {
    return extract_windows(tokens.size(), window_sizes);
}

std::string_view to_string(Pooling pooling) {
    return pooling == Pooling::kMean ? "mean" : "max";
}

Pooling parse_pooling(std::string_view name) {
    if (name == "mean") {
        return Pooling::kMean;
    }
    if (name == "max") {
        return Pooling::kMax;
    }
    throw Error(ErrorKind::kInvalidArgument, "unknown pooling \"" + std::string(name) + "\" (expected mean or max)");
}

std::vector<double> pool_span(const EmbeddingSequence& seq, TokenSpan span, Pooling pooling) {
    if (span.start >= span.end || span.end > seq.size()) {
        throw Error(ErrorKind::kInvalidArgument, "span outside the sequence");
    }
    const auto dim = seq.dimension();
    std::vector<double> pooled(seq.vectors()[span.start].values().begin(), seq.vectors()[span.start].values().end());
    for (auto t = span.start + 1; t < span.end; ++t) {
        const auto values = seq.vectors()[t].values();
        for (std::size_t j = 0; j < dim; ++j) {
            pooled[j] = pooling == Pooling::kMean ? pooled[j] + values[j] : std::max(pooled[j], values[j]);
        }
    }
    if (pooling == Pooling::kMean) {
        const auto n = static_cast<double>(span.length());
        for (auto& v : pooled) {
            v /= n;
        }
    }
    return pooled;
}

std::optional<std::string> ConceptCentroids::nearest(std::span<const double> v) const {
    std::optional<std::string> best;
    double best_score = -2.0;
    double norm_v = 0.0;
    for (const auto x : v) {
        norm_v += x * x;
    }
    if (norm_v == 0.0) {
        return std::nullopt;
    }
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const auto values = centroids[c].values();
        if (values.size() != v.size()) {
            throw Error(ErrorKind::kDimensionMismatch, "concept centroid dimension does not match the sequence");
        }
        double dot = 0.0;
        double norm_c = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            dot += values[j] * v[j];
            norm_c += values[j] * values[j];
        }
        if (norm_c == 0.0) {
            continue;
        }
        const double score = dot / std::sqrt(norm_c * norm_v);
        if (score > best_score) {
            best_score = score;
            best = names[c];
        }
    }
    return best;
}

ConceptCentroids concept_centroids(const EmbeddingTable& table) {
    std::map<std::string, std::pair<std::vector<double>, std::size_t>> sums;
    for (const auto& record : table.records()) {
        if (record.label != Label::kUnsafe || !record.concept_name) {
            continue;
        }
        auto& [sum, count] = sums[*record.concept_name];
        if (sum.empty()) {
            sum.assign(table.dimension(), 0.0);
        }
        for (std::size_t j = 0; j < table.dimension(); ++j) {
            sum[j] += record.embedding[j];
        }
        ++count;
    }
    ConceptCentroids out;
    for (auto& [name, entry] : sums) {
        auto& [sum, count] = entry;
        for (auto& v : sum) {
            v = static_cast<float>(v / static_cast<double>(count));
        }
        out.names.push_back(name);
        out.centroids.emplace_back(std::move(sum));
    }
    return out;
}

void ScanOptions::validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorKind::kInvalidArgument, "threshold must be in (0, 1)");
    }
    if (window_sizes.empty() || *window_sizes.begin() == 0) {
        throw Error(ErrorKind::kInvalidArgument, "window sizes must be a non-empty set of positive integers");
    }
}

std::size_t ScanReport::flagged_window_count() const {
    return static_cast<std::size_t>(std::count_if(windows.begin(), windows.end(), [](const auto& w) { return w.flagged; }));
}

ScanReport scan_prompt(const MlpParams& params, const EmbeddingSequence& seq, const ScanOptions& options,
                       const ConceptCentroids* centroids) {
    options.validate();
    if (seq.dimension() != params.input_dim()) {
        throw Error(ErrorKind::kDimensionMismatch, "sequence dimension " + std::to_string(seq.dimension()) +
                                                       " does not match identifier dimension " +
                                                       std::to_string(params.input_dim()));
    }
    ScanReport report;
    report.threshold = options.threshold;
    report.n_tokens = seq.size();

    std::vector<WindowScore> flagged;
    for (const auto& span : extract_windows(seq.size(), options.window_sizes)) {
        bool has_special = false;
        for (auto t = span.start; t < span.end; ++t) {
            has_special = has_special || seq.is_special(t);
        }
        if (has_special) {
            continue;
        }
        const auto pooled = pool_span(seq, span, options.pooling);
        const double p = logistic(mlp_logit(params, pooled));
        WindowScore score{span, p, p >= options.threshold};
        report.windows.push_back(score);
        if (score.flagged) {
            flagged.push_back(score);
        }
    }

    std::sort(flagged.begin(), flagged.end(), [](const WindowScore& a, const WindowScore& b) {
        return a.span.start != b.span.start ? a.span.start < b.span.start : a.span.end < b.span.end;
    });
    for (const auto& window : flagged) {
        if (!report.flagged.empty() && window.span.start < report.flagged.back().span.end) {
            auto& current = report.flagged.back();
            current.span.end = std::max(current.span.end, window.span.end);
            if (window.probability > current.probability) {
                current.probability = window.probability;
                current.window_size = window.span.length();
            }
        } else {
            report.flagged.push_back({window.span, window.span.length(), window.probability, std::nullopt});
        }
    }
    if (centroids && !centroids->empty()) {
        for (auto& span : report.flagged) {
            span.concept_name = centroids->nearest(pool_span(seq, span.span, options.pooling));
        }
    }
    return report;
}

}  // namespace steerguard

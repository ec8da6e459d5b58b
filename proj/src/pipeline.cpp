// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/pipeline.hpp"

#include <algorithm>

#include "steerguard/digest.hpp"

namespace steerguard {

std::string_view to_string(SteerScope scope) {
    return scope == SteerScope::kFlaggedSpans ? "flagged-spans" : "whole-sequence";
}

SteerScope parse_steer_scope(std::string_view name) {
    if (name == "flagged-spans") {
        return SteerScope::kFlaggedSpans;
    }
    if (name == "whole-sequence") {
        return SteerScope::kWholeSequence;
    }
    throw Error(ErrorKind::kInvalidArgument,
                "unknown steering scope \"" + std::string(name) + "\" (expected flagged-spans or whole-sequence)");
}

std::string_view to_string(Verdict verdict) {
    return verdict == Verdict::kClean ? "clean" : "steered";
}

void GuardPolicy::validate() const {
    scan_options().validate();
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw Error(ErrorKind::kInvalidArgument, "epsilon must be in [0, 1]");
    }
}

ScanOptions GuardPolicy::scan_options() const {
    return {window_sizes, pooling, threshold};
}

nlohmann::json GuardPolicy::to_json() const {
    return {
        {"window_sizes", window_sizes},
        {"threshold", threshold},
        {"epsilon", epsilon},
        {"scope", to_string(scope)},
        {"pooling", to_string(pooling)},
        {"verify", verify},
    };
}

void GuardPolicy::apply_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw Error(ErrorKind::kInvalidArgument, "policy must be a JSON object");
    }
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "window_sizes") {
                window_sizes.clear();
                for (const auto& w : value) {
                    window_sizes.insert(w.get<std::size_t>());
                }
            } else if (key == "threshold") {
                threshold = value.get<double>();
            } else if (key == "epsilon") {
                epsilon = value.get<double>();
            } else if (key == "scope") {
                scope = parse_steer_scope(value.get<std::string>());
            } else if (key == "pooling") {
                pooling = parse_pooling(value.get<std::string>());
            } else if (key == "verify") {
                verify = value.get<bool>();
            } else {
                throw Error(ErrorKind::kInvalidArgument, "unknown policy field \"" + key + "\"");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::kInvalidArgument, std::string("malformed policy: ") + e.what());
    }
    validate();
}

std::string GuardPolicy::hash() const {
    return sha256_hex(to_json().dump());
}

GuardResult guard_prompt(const MlpParams& identifier, const SteerMatrix& steer, const EmbeddingSequence& seq,
                         const GuardPolicy& policy, const ConceptCentroids* centroids) {
    const auto started = std::chrono::steady_clock::now();
    policy.validate();
    if (steer.dimension() != identifier.input_dim()) {
        throw Error(ErrorKind::kDimensionMismatch, "identifier dimension " + std::to_string(identifier.input_dim()) +
                                                       " does not match steer dimension " +
                                                       std::to_string(steer.dimension()));
    }
    if (seq.dimension() != steer.dimension()) {
        throw Error(ErrorKind::kDimensionMismatch, "expected embeddings of dimension " +
                                                       std::to_string(steer.dimension()) + ", got " +
                                                       std::to_string(seq.dimension()));
    }

    GuardReport report;
    report.config_hash = policy.hash();
    report.scan = scan_prompt(identifier, seq, policy.scan_options(), centroids);
    report.steered.assign(seq.size(), false);

    if (report.scan.flagged.empty()) {
        report.verdict = Verdict::kClean;
        report.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - started);
        return {seq, std::move(report)};
    }

    report.verdict = Verdict::kSteered;
    if (policy.scope == SteerScope::kWholeSequence) {
        std::fill(report.steered.begin(), report.steered.end(), true);
    } else {
        for (const auto& flag : report.scan.flagged) {
            std::fill(report.steered.begin() + static_cast<std::ptrdiff_t>(flag.span.start),
                      report.steered.begin() + static_cast<std::ptrdiff_t>(flag.span.end), true);
        }
    }
    for (std::size_t t = 0; t < seq.size(); ++t) {
        if (seq.is_special(t)) {
            report.steered[t] = false;
        }
    }

    std::vector<EmbeddingVector> vectors;
    vectors.reserve(seq.size());
    for (std::size_t t = 0; t < seq.size(); ++t) {
        vectors.push_back(report.steered[t] ? steer_embedding(steer, policy.epsilon, seq.vectors()[t])
                                            : seq.vectors()[t]);
    }
    EmbeddingSequence output(seq.tokens(), std::move(vectors), seq.special());
    if (policy.verify) {
        report.verify_scan = scan_prompt(identifier, output, policy.scan_options(), centroids);
    }
    report.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - started);
    return {std::move(output), std::move(report)};
}

BatchError::BatchError(std::size_t index, const Error& cause)
    : Error(cause.kind(), "batch element " + std::to_string(index) + ": " + cause.detail()), m_index(index) {}

std::vector<GuardResult> guard_batch(const MlpParams& identifier, const SteerMatrix& steer,
                                     std::span<const EmbeddingSequence> sequences, const GuardPolicy& policy,
                                     const ConceptCentroids* centroids) {
    std::vector<GuardResult> results;
    results.reserve(sequences.size());
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        try {
            results.push_back(guard_prompt(identifier, steer, sequences[i], policy, centroids));
        } catch (const Error& e) {
            throw BatchError(i, e);
        }
    }
    return results;
}

nlohmann::json scan_report_json(const ScanReport& report, bool include_windows) {
    nlohmann::json flagged = nlohmann::json::array();
    for (const auto& span : report.flagged) {
        nlohmann::json item = {
            {"start", span.span.start},
            {"end", span.span.end},
            {"window_size", span.window_size},
            {"probability", span.probability},
        };
        item["concept"] = span.concept_name ? nlohmann::json(*span.concept_name) : nlohmann::json(nullptr);
        flagged.push_back(std::move(item));
    }
    nlohmann::json out = {
        {"threshold", report.threshold},
        {"n_tokens", report.n_tokens},
        {"flagged", flagged},
        {"flagged_windows", report.flagged_window_count()},
    };
    if (include_windows) {
        nlohmann::json windows = nlohmann::json::array();
        for (const auto& w : report.windows) {
            windows.push_back({{"start", w.span.start}, {"end", w.span.end}, {"probability", w.probability},
                               {"flagged", w.flagged}});
        }
        out["windows"] = std::move(windows);
    }
    return out;
}

nlohmann::json guard_report_json(const GuardReport& report, bool include_windows) {
    nlohmann::json out = {
        {"verdict", to_string(report.verdict)},
        {"scan", scan_report_json(report.scan, include_windows)},
        {"steered_mask", report.steered},
        {"config_hash", report.config_hash},
    };
    if (report.verify_scan) {
        out["verify_scan"] = scan_report_json(*report.verify_scan, include_windows);
    }
    return out;
}

}  // namespace steerguard

// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <json.hpp>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "steerguard/embedding.hpp"
#include "steerguard/error.hpp"
#include "steerguard/mlp.hpp"
#include "steerguard/scan.hpp"
#include "steerguard/steering.hpp"

namespace steerguard {

enum class SteerScope { kFlaggedSpans, kWholeSequence };

std::string_view to_string(SteerScope scope);
SteerScope parse_steer_scope(std::string_view name);

struct GuardPolicy {
    std::set<std::size_t> window_sizes{1, 2, 3};
    double threshold = 0.5;
    double epsilon = 0.9;
    SteerScope scope = SteerScope::kFlaggedSpans;
    Pooling pooling = Pooling::kMean;
    /// Re-scan the steered output and report residual flags.
    bool verify = false;

    void validate() const;
    ScanOptions scan_options() const;

    nlohmann::json to_json() const;
    /// Fields absent from `j` keep their current value. Throws Error(kInvalidArgument).
    void apply_json(const nlohmann::json& j);
    /// SHA-256 of the canonical JSON form.
    std::string hash() const;
};

enum class Verdict { kClean, kSteered };

std::string_view to_string(Verdict verdict);

struct GuardReport {
    Verdict verdict = Verdict::kClean;
    ScanReport scan;
    /// steered[i] is true when token i was transformed.
    std::vector<bool> steered;
    std::string config_hash;
    std::chrono::microseconds elapsed{0};
    std::optional<ScanReport> verify_scan;
};

struct GuardResult {
    EmbeddingSequence output;
    GuardReport report;
};

/// Scans `seq`; when nothing is flagged the output is the input, untouched. Otherwise
/// every token covered by a flagged span (or every token, for whole-sequence scope) is
/// steered. Special tokens are never steered.
GuardResult guard_prompt(const MlpParams& identifier, const SteerMatrix& steer, const EmbeddingSequence& seq,
                         const GuardPolicy& policy, const ConceptCentroids* centroids = nullptr);

/// Raised by guard_batch; index() is the position of the failing sequence.
class BatchError : public Error {
public:
    BatchError(std::size_t index, const Error& cause);
    std::size_t index() const noexcept { return m_index; }

private:
    std::size_t m_index;
};

std::vector<GuardResult> guard_batch(const MlpParams& identifier, const SteerMatrix& steer,
                                     std::span<const EmbeddingSequence> sequences, const GuardPolicy& policy,
                                     const ConceptCentroids* centroids = nullptr);

nlohmann::json scan_report_json(const ScanReport& report, bool include_windows = true);
/// Timing is left out so that the JSON is a pure function of the inputs.
nlohmann::json guard_report_json(const GuardReport& report, bool include_windows = true);

}  // namespace steerguard

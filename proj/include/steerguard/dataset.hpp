// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "steerguard/embedding.hpp"
#include "steerguard/llm_client.hpp"

namespace steerguard {

/// System prompt used to elicit unsafe phrases for one concept. The concept itself is
/// sent as the user message.
extern const std::string_view kUnsafeTermsPrompt;
/// System prompt used to obtain the benign counterpart of one phrase. The phrase is
/// sent as the user message.
extern const std::string_view kSafeCounterpartPrompt;

/// Ordered, non-empty set of lowercase trimmed concept names.
class ConceptBlacklist {
public:
    const std::vector<std::string>& concepts() const { return m_concepts; }
    std::size_t size() const { return m_concepts.size(); }
    bool contains(std::string_view concept_name) const;

    bool operator==(const ConceptBlacklist&) const = default;

private:
    friend ConceptBlacklist build_blacklist(std::span<const std::string> concepts);
    std::vector<std::string> m_concepts;
};

/// Normalises (trim, lowercase) and deduplicates in first-seen order.
ConceptBlacklist build_blacklist(std::span<const std::string> concepts);

/// hate, harassment, violence, self-harm, sexual content, shocking images, illegal activity.
ConceptBlacklist default_blacklist();

struct TermPair {
    std::string unsafe_text;
    std::string safe_text;
    std::string concept_name;

    bool operator==(const TermPair&) const = default;
};

struct UnsafeTerm {
    std::string text;
    std::string concept_name;

    bool operator==(const UnsafeTerm&) const = default;
};

struct PromptCorpus {
    std::vector<std::string> prompts;
    std::string source;
};

/// One prompt per line; blank lines skipped, duplicates dropped keeping the first.
PromptCorpus load_prompt_corpus(const std::filesystem::path& path, std::string source = "file");
/// Seeded subsample of `count` prompts (the whole corpus if it is smaller), original order kept.
PromptCorpus sample_corpus(const PromptCorpus& corpus, std::size_t count, std::uint64_t seed);

/// TSV with columns unsafe_text, safe_text, concept. A header line starting with
/// "unsafe_text" is skipped on load and always written on save.
std::vector<TermPair> load_term_pairs(const std::filesystem::path& path);
void save_term_pairs(std::span<const TermPair> pairs, const std::filesystem::path& path);

/// Word-level tokenisation for corpus prompts: whitespace split, lowercase, strip
/// leading/trailing ASCII punctuation, drop empty tokens.
std::vector<std::string> split_words(std::string_view prompt);

/// Splits an LLM answer into phrases: one per line, list markers and quotes
/// stripped, empties and repeats dropped.
std::vector<std::string> parse_phrase_list(std::string_view response);

struct UnsafeTermsResult {
    std::vector<std::string> terms;
    std::size_t requests = 0;
    std::size_t duplicates_dropped = 0;
};

/// Asks the client for up to `count` unsafe phrases for `concept`.
///
/// A deterministic (fixture) client is asked once; a live client is asked repeatedly
/// until `count` distinct phrases are collected or `max_requests` is reached. Throws
/// Error(kInvalidArgument) if the concept is not blacklisted and Error(kEmptyResult)
/// when the responses contain no usable phrase.
UnsafeTermsResult generate_unsafe_terms(LlmClient& client, const ConceptBlacklist& blacklist,
                                        const std::string& concept_name, std::size_t count, ResponseLog* log = nullptr,
                                        std::size_t max_requests = 8);

struct SafePairsResult {
    std::vector<TermPair> pairs;
    /// Terms whose counterpart echoed the input (or was empty) and were dropped.
    std::size_t dropped = 0;
    std::vector<std::string> dropped_terms;
};

/// One request per unsafe term, issued with up to `parallelism` requests in flight.
/// Echoed answers are dropped; a live client gets one retry with the same prompt first.
SafePairsResult generate_safe_counterparts(LlmClient& client, std::span<const std::string> unsafe_terms,
                                           const std::string& concept_name, ResponseLog* log = nullptr,
                                           std::size_t parallelism = 1);

/// Maps phrase text to an embedding of fixed dimension.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dimension() const = 0;
    virtual EmbeddingVector embed(std::string_view text) const = 0;
};

/// Looks phrases up in a pre-computed table (typically produced by the exporter).
class TableEmbedder final : public Embedder {
public:
    explicit TableEmbedder(const EmbeddingTable& table) : m_table(table) {}
    std::size_t dimension() const override { return m_table.dimension(); }
    /// Throws Error(kNotFound) for phrases absent from the table.
    EmbeddingVector embed(std::string_view text) const override;

private:
    const EmbeddingTable& m_table;
};

/// Offline stand-in for a text encoder: each word maps to a seeded Gaussian vector
/// and a phrase is the mean of its words. Useful for plumbing tests, carries no semantics.
class HashingEmbedder final : public Embedder {
public:
    HashingEmbedder(std::size_t dimension, std::uint64_t seed);
    std::size_t dimension() const override { return m_dimension; }
    EmbeddingVector embed(std::string_view text) const override;

private:
    std::size_t m_dimension;
    std::uint64_t m_seed;
};

struct IdentifierDatasetOptions {
    std::set<std::size_t> window_sizes{1, 2, 3};
    /// If set, the majority class is subsampled (seeded) to at most ratio x minority.
    std::optional<double> balance_ratio;
    std::uint64_t seed = 0;
};

struct IdentifierDatasetCounts {
    std::size_t unsafe_terms = 0;
    std::size_t safe_counterparts = 0;
    std::size_t corpus_windows = 0;
    /// Phrases dropped because their text already occurred (first occurrence wins,
    /// unsafe terms are inserted first).
    std::size_t duplicates_dropped = 0;
    std::size_t subsampled_away = 0;
    std::size_t unsafe_records = 0;
    std::size_t safe_records = 0;
};

struct IdentifierDataset {
    EmbeddingTable table;
    IdentifierDatasetCounts counts;
};

/// Unsafe terms get label 1; safe counterparts and every sliding-window phrase of
/// every corpus prompt get label 0.
IdentifierDataset assemble_identifier_dataset(std::span<const UnsafeTerm> unsafe_terms,
                                              std::span<const TermPair> safe_pairs, const PromptCorpus& corpus,
                                              const Embedder& embedder,
                                              const IdentifierDatasetOptions& options = {});

struct EmbeddingPair {
    EmbeddingVector unsafe;
    EmbeddingVector safe;
};

/// One embedding pair per term pair, in input order; duplicates are kept.
std::vector<EmbeddingPair> assemble_steer_dataset(std::span<const TermPair> pairs, const Embedder& embedder);

}  // namespace steerguard

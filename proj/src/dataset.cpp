// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "steerguard/binary_io.hpp"
#include "steerguard/error.hpp"
#include "steerguard/random.hpp"
#include "steerguard/scan.hpp"

namespace steerguard {

const std::string_view kUnsafeTermsPrompt =
    "You are a text-to-image diffusion model safety assistant. Your task is to write me an image caption that "
    "includes and visually describes a scene and the caption should HAVE the EXACT concept word. With that image "
    "caption, identify and return the phrases or words that will generate NSFW, harassment, illegal activity, "
    "self-harm, shocking, or violence content.\nOnly return the phrase no other words, no other response.";

const std::string_view kSafeCounterpartPrompt =
    "You are a NSFW and SFW safety assistant. Return the safe and benign opposite meaning phrase of the given "
    "phrase. If the safe and benign opposite meaning phrase does not exist, then use the more general and benign "
    "word. Only return the phrase no other words, no other response.";

namespace {

std::string trim(std::string_view s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return std::string(s);
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) {
            return fields;
        }
        start = tab + 1;
    }
}

/// Runs fn(i) for i in [0, n) on up to `parallelism` threads.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t parallelism, Fn&& fn) {
    const auto workers = std::max<std::size_t>(1, std::min(parallelism, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (auto i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (const auto& error : errors) {
        if (error) {
            std::rethrow_exception(error);
        }
    }
}

bool is_echo(const std::string& unsafe, const std::string& answer) {
    return answer.empty() || lowercase(trim(unsafe)) == lowercase(trim(answer));
}

}  // namespace

bool ConceptBlacklist::contains(std::string_view concept_name) const {
    const auto key = lowercase(trim(concept_name));
    return std::find(m_concepts.begin(), m_concepts.end(), key) != m_concepts.end();
}

ConceptBlacklist build_blacklist(std::span<const std::string> concepts) {
    if (concepts.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "blacklist needs at least one concept");
    }
    ConceptBlacklist out;
    for (const auto& raw : concepts) {
        auto concept_name = lowercase(trim(raw));
        if (concept_name.empty()) {
            throw Error(ErrorKind::kInvalidArgument, "blacklist entry \"" + raw + "\" is empty after normalisation");
        }
        if (std::find(out.m_concepts.begin(), out.m_concepts.end(), concept_name) == out.m_concepts.end()) {
            out.m_concepts.push_back(std::move(concept_name));
        }
    }
    return out;
}

ConceptBlacklist default_blacklist() {
    const std::vector<std::string> concepts = {"hate",           "harassment",     "violence",        "self-harm",
                                               "sexual content", "shocking images", "illegal activity"};
    return build_blacklist(concepts);
}

PromptCorpus load_prompt_corpus(const std::filesystem::path& path, std::string source) {
    PromptCorpus corpus;
    corpus.source = std::move(source);
    std::unordered_set<std::string> seen;
    for (auto& line : split_lines(read_file(path))) {
        auto prompt = trim(line);
        if (!prompt.empty() && seen.insert(prompt).second) {
            corpus.prompts.push_back(std::move(prompt));
        }
    }
    if (corpus.prompts.empty()) {
        throw Error(ErrorKind::kEmptyResult, "prompt corpus " + path.string() + " has no prompts");
    }
    return corpus;
}

PromptCorpus sample_corpus(const PromptCorpus& corpus, std::size_t count, std::uint64_t seed) {
    if (count >= corpus.prompts.size()) {
        return corpus;
    }
    std::vector<std::size_t> order(corpus.prompts.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    Rng rng(seed);
    rng.shuffle(order);
    order.resize(count);
    std::sort(order.begin(), order.end());
    PromptCorpus out;
    out.source = corpus.source;
    for (const auto i : order) {
        out.prompts.push_back(corpus.prompts[i]);
    }
    return out;
}

std::vector<TermPair> load_term_pairs(const std::filesystem::path& path) {
    std::vector<TermPair> pairs;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(read_file(path))) {
        ++line_no;
        if (line.empty() || (line_no == 1 && line.rfind("unsafe_text", 0) == 0)) {
            continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() != 3) {
            throw Error(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) + ": expected 3 columns, got " +
                                                std::to_string(fields.size()));
        }
        TermPair pair{trim(fields[0]), trim(fields[1]), lowercase(trim(fields[2]))};
        if (pair.unsafe_text.empty() || pair.safe_text.empty() || pair.concept_name.empty()) {
            throw Error(ErrorKind::kFormat, path.string() + ":" + std::to_string(line_no) + ": empty field");
        }
        if (pair.unsafe_text == pair.safe_text) {
            throw Error(ErrorKind::kFormat,
                        path.string() + ":" + std::to_string(line_no) + ": unsafe and safe text are identical");
        }
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

void save_term_pairs(std::span<const TermPair> pairs, const std::filesystem::path& path) {
    std::string out = "unsafe_text\tsafe_text\tconcept\n";
    for (const auto& pair : pairs) {
        out += pair.unsafe_text + '\t' + pair.safe_text + '\t' + pair.concept_name + '\n';
    }
    write_file(path, out);
}

std::vector<std::string> split_words(std::string_view prompt) {
    std::vector<std::string> words;
    std::istringstream in{std::string(prompt)};
    std::string word;
    while (in >> word) {
        std::size_t begin = 0;
        std::size_t end = word.size();
        while (begin < end && std::ispunct(static_cast<unsigned char>(word[begin]))) {
            ++begin;
        }
        while (end > begin && std::ispunct(static_cast<unsigned char>(word[end - 1]))) {
            --end;
        }
        if (end > begin) {
            words.push_back(lowercase(word.substr(begin, end - begin)));
        }
    }
    return words;
}

std::vector<std::string> parse_phrase_list(std::string_view response) {
    std::vector<std::string> phrases;
    std::unordered_set<std::string> seen;
    for (const auto& line : split_lines(response)) {
        std::string_view s = line;
        // Leading list markers: "-", "*", "•" or "12." / "12)".
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '-' || s.front() == '*')) {
            s.remove_prefix(1);
        }
        if (s.rfind("\xE2\x80\xA2", 0) == 0) {
            s.remove_prefix(3);
        }
        std::size_t digits = 0;
        while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) {
            ++digits;
        }
        if (digits > 0 && digits < s.size() && (s[digits] == '.' || s[digits] == ')')) {
            s.remove_prefix(digits + 1);
        }
        auto phrase = trim(s);
        if (phrase.size() >= 2 && (phrase.front() == '"' || phrase.front() == '\'') && phrase.back() == phrase.front()) {
            phrase = trim(std::string_view(phrase).substr(1, phrase.size() - 2));
        }
        if (!phrase.empty() && seen.insert(phrase).second) {
            phrases.push_back(std::move(phrase));
        }
    }
    return phrases;
}

UnsafeTermsResult generate_unsafe_terms(LlmClient& client, const ConceptBlacklist& blacklist,
                                        const std::string& concept_name, std::size_t count, ResponseLog* log,
                                        std::size_t max_requests) {
    if (!blacklist.contains(concept_name)) {
        throw Error(ErrorKind::kInvalidArgument, "concept \"" + concept_name + "\" is not in the blacklist");
    }
    if (count < 1) {
        throw Error(ErrorKind::kInvalidArgument, "term count must be >= 1");
    }
    const ChatRequest request{std::string(kUnsafeTermsPrompt), lowercase(trim(concept_name))};
    const auto key = request_key(request);
    const auto attempts = client.deterministic() ? std::size_t{1} : std::max<std::size_t>(1, max_requests);

    UnsafeTermsResult result;
    std::unordered_set<std::string> seen;
    std::string combined;
    for (std::size_t attempt = 0; attempt < attempts && result.terms.size() < count; ++attempt) {
        const auto response = client.complete(request);
        ++result.requests;
        if (!combined.empty()) {
            combined += '\n';
        }
        combined += response;
        for (auto& phrase : parse_phrase_list(response)) {
            if (result.terms.size() == count) {
                break;
            }
            if (seen.insert(phrase).second) {
                result.terms.push_back(std::move(phrase));
            } else {
                ++result.duplicates_dropped;
            }
        }
    }
    if (log) {
        log->record(key, combined);
    }
    if (result.terms.empty()) {
        throw Error(ErrorKind::kEmptyResult,
                    "no usable unsafe phrases for concept \"" + concept_name + "\" after " +
                        std::to_string(result.requests) + " request(s)");
    }
    return result;
}

SafePairsResult generate_safe_counterparts(LlmClient& client, std::span<const std::string> unsafe_terms,
                                           const std::string& concept_name, ResponseLog* log, std::size_t parallelism) {
    if (unsafe_terms.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "no unsafe terms to pair");
    }
    std::vector<std::optional<std::string>> answers(unsafe_terms.size());
    parallel_for(unsafe_terms.size(), parallelism, [&](std::size_t i) {
        const ChatRequest request{std::string(kSafeCounterpartPrompt), unsafe_terms[i]};
        const auto tries = client.deterministic() ? 1 : 2;
        std::string answer;
        std::string raw;
        for (int t = 0; t < tries; ++t) {
            raw = client.complete(request);
            const auto lines = parse_phrase_list(raw);
            answer = lines.empty() ? std::string() : lines.front();
            if (!is_echo(unsafe_terms[i], answer)) {
                break;
            }
        }
        if (log) {
            log->record(request_key(request), raw);
        }
        if (!is_echo(unsafe_terms[i], answer)) {
            answers[i] = std::move(answer);
        }
    });

    SafePairsResult result;
    for (std::size_t i = 0; i < unsafe_terms.size(); ++i) {
        if (answers[i]) {
            result.pairs.push_back({unsafe_terms[i], *answers[i], lowercase(trim(concept_name))});
        } else {
            ++result.dropped;
            result.dropped_terms.push_back(unsafe_terms[i]);
        }
    }
    return result;
}

EmbeddingVector TableEmbedder::embed(std::string_view text) const {
    const auto* record = m_table.find(text);
    if (!record) {
        throw Error(ErrorKind::kNotFound, "phrase \"" + std::string(text) + "\" is not in the embedding table");
    }
    return record->embedding;
}

HashingEmbedder::HashingEmbedder(std::size_t dimension, std::uint64_t seed) : m_dimension(dimension), m_seed(seed) {
    if (dimension == 0) {
        throw Error(ErrorKind::kInvalidArgument, "embedder dimension must be >= 1");
    }
}

EmbeddingVector HashingEmbedder::embed(std::string_view text) const {
    auto words = split_words(text);
    if (words.empty()) {
        words.emplace_back(text);
    }
    std::vector<double> sum(m_dimension, 0.0);
    for (const auto& word : words) {
        // FNV-1a over the word, mixed with the embedder seed.
        std::uint64_t h = 1469598103934665603ull ^ m_seed;
        for (const unsigned char c : word) {
            h = (h ^ c) * 1099511628211ull;
        }
        Rng rng(h);
        for (auto& v : sum) {
            v += rng.normal();
        }
    }
    for (auto& v : sum) {
        v = static_cast<float>(v / static_cast<double>(words.size()));
    }
    return EmbeddingVector(std::move(sum));
}

IdentifierDataset assemble_identifier_dataset(std::span<const UnsafeTerm> unsafe_terms,
                                              std::span<const TermPair> safe_pairs, const PromptCorpus& corpus,
                                              const Embedder& embedder, const IdentifierDatasetOptions& options) {
    if (unsafe_terms.empty()) {
        throw Error(ErrorKind::kEmptyResult, "empty unsafe term set");
    }
    if (safe_pairs.empty()) {
        throw Error(ErrorKind::kEmptyResult, "empty safe counterpart set");
    }
    if (corpus.prompts.empty()) {
        throw Error(ErrorKind::kEmptyResult, "empty safe corpus");
    }
    const auto dim = embedder.dimension();
    IdentifierDatasetCounts counts;
    std::vector<PhraseRecord> unsafe_records;
    std::vector<PhraseRecord> safe_records;
    std::unordered_set<std::string> seen;

    auto embed_checked = [&](const std::string& text) {
        auto e = embedder.embed(text);
        if (e.dimension() != dim) {
            throw Error(ErrorKind::kDimensionMismatch, "embedder returned dimension " + std::to_string(e.dimension()) +
                                                           " for \"" + text + "\", expected " + std::to_string(dim));
        }
        return e;
    };
    auto add = [&](std::vector<PhraseRecord>& into, std::string text, Label label,
                   std::optional<std::string> concept_name) {
        if (!seen.insert(text).second) {
            ++counts.duplicates_dropped;
            return;
        }
        auto embedding = embed_checked(text);
        into.push_back({std::move(text), label, std::move(concept_name), std::move(embedding)});
    };

    for (const auto& term : unsafe_terms) {
        ++counts.unsafe_terms;
        add(unsafe_records, term.text, Label::kUnsafe, term.concept_name);
    }
    for (const auto& pair : safe_pairs) {
        ++counts.safe_counterparts;
        add(safe_records, pair.safe_text, Label::kSafe, std::nullopt);
    }
    for (const auto& prompt : corpus.prompts) {
        const auto words = split_words(prompt);
        if (words.empty()) {
            continue;
        }
        for (const auto& span : extract_windows(words.size(), options.window_sizes)) {
            ++counts.corpus_windows;
            std::string phrase = words[span.start];
            for (auto i = span.start + 1; i < span.end; ++i) {
                phrase += ' ';
                phrase += words[i];
            }
            add(safe_records, std::move(phrase), Label::kSafe, std::nullopt);
        }
    }

    if (options.balance_ratio) {
        const double ratio = *options.balance_ratio;
        if (!(ratio >= 1.0)) {
            throw Error(ErrorKind::kInvalidArgument, "balance ratio must be >= 1");
        }
        auto& majority = unsafe_records.size() > safe_records.size() ? unsafe_records : safe_records;
        const auto minority = std::min(unsafe_records.size(), safe_records.size());
        const auto keep = static_cast<std::size_t>(ratio * static_cast<double>(minority));
        if (majority.size() > keep) {
            std::vector<std::size_t> order(majority.size());
            for (std::size_t i = 0; i < order.size(); ++i) {
                order[i] = i;
            }
            Rng rng(options.seed);
            rng.shuffle(order);
            order.resize(keep);
            std::sort(order.begin(), order.end());
            std::vector<PhraseRecord> kept;
            kept.reserve(keep);
            for (const auto i : order) {
                kept.push_back(std::move(majority[i]));
            }
            counts.subsampled_away = majority.size() - keep;
            majority = std::move(kept);
        }
    }

    if (unsafe_records.empty() || safe_records.empty()) {
        throw Error(ErrorKind::kEmptyResult, "identifier dataset has an empty class");
    }
    counts.unsafe_records = unsafe_records.size();
    counts.safe_records = safe_records.size();
    auto records = std::move(unsafe_records);
    records.insert(records.end(), std::make_move_iterator(safe_records.begin()),
                   std::make_move_iterator(safe_records.end()));
    return {EmbeddingTable(dim, std::move(records)), counts};
}

std::vector<EmbeddingPair> assemble_steer_dataset(std::span<const TermPair> pairs, const Embedder& embedder) {
    if (pairs.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "no term pairs");
    }
    std::vector<EmbeddingPair> out;
    out.reserve(pairs.size());
    for (const auto& pair : pairs) {
        auto unsafe = embedder.embed(pair.unsafe_text);
        auto safe = embedder.embed(pair.safe_text);
        if (unsafe.dimension() != embedder.dimension() || safe.dimension() != embedder.dimension()) {
            throw Error(ErrorKind::kDimensionMismatch,
                        "embedding dimension mismatch for pair \"" + pair.unsafe_text + "\"");
        }
        out.push_back({std::move(unsafe), std::move(safe)});
    }
    return out;
}

}  // namespace steerguard

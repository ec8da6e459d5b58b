// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace steerguard {

/// One chat-style request: a fixed system prompt plus a user message.
struct ChatRequest {
    std::string system;
    std::string user;
};

/// Hex SHA-256 of the request prompt. This is the key of fixture files and of the
/// response log.
std::string request_key(const ChatRequest& request);

struct LlmClientConfig {
    /// Chat-completion URL, e.g. "http://localhost:8000/v1/chat/completions".
    std::optional<std::string> endpoint;
    /// Offline fixture file; mutually exclusive with `endpoint`.
    std::optional<std::filesystem::path> fixture_path;
    std::string model = "gpt-4o-mini";
    std::chrono::milliseconds timeout{30000};
    int retries = 2;
    double temperature = 0.7;
    /// Name of the environment variable holding a bearer token, if any.
    std::string api_key_env = "STEERGUARD_LLM_API_KEY";
    /// Upper bound on concurrent requests issued by the dataset builders.
    std::size_t parallelism = 4;

    /// Throws Error(kInvalidArgument) unless exactly one of endpoint/fixture is set.
    void validate() const;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
    /// True when identical requests always produce identical responses.
    virtual bool deterministic() const = 0;
};

/// Replays responses from a key-value file. Each non-empty, non-'#' line is
/// "<request sha256 hex>\t<escaped response>", where the response escapes
/// backslash, newline and tab as \\, \n and \t.
class FixtureLlmClient final : public LlmClient {
public:
    explicit FixtureLlmClient(std::map<std::string, std::string> responses);
    static FixtureLlmClient from_file(const std::filesystem::path& path);

    /// Throws Error(kNotFound) for requests absent from the fixture.
    std::string complete(const ChatRequest& request) override;
    bool deterministic() const override { return true; }

private:
    std::map<std::string, std::string> m_responses;
};

/// OpenAI-style chat-completion client over HTTP(S). See docs/llm_api.md.
class HttpLlmClient final : public LlmClient {
public:
    explicit HttpLlmClient(LlmClientConfig config);

    /// Retries transport failures `retries` times, then throws Error(kTransport).
    std::string complete(const ChatRequest& request) override;
    bool deterministic() const override { return false; }

    /// Request body sent for `request`; exposed for tests.
    std::string request_body(const ChatRequest& request) const;
    /// Extracts choices[0].message.content; throws Error(kFormat).
    static std::string parse_response(const std::string& body);

private:
    LlmClientConfig m_config;
};

std::unique_ptr<LlmClient> make_llm_client(const LlmClientConfig& config);

/// Thread-safe record of every (request key, response) pair seen during a run. The
/// written file is a valid fixture, so a live run can be replayed offline.
class ResponseLog {
public:
    void record(const std::string& key, const std::string& response);
    std::vector<std::pair<std::string, std::string>> entries() const;
    void write_fixture(const std::filesystem::path& path) const;

private:
    mutable std::mutex m_mutex;
    std::map<std::string, std::string> m_entries;
};

std::string escape_fixture_value(const std::string& value);
std::string unescape_fixture_value(const std::string& value);

}  // namespace steerguard

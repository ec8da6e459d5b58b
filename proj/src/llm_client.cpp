// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/llm_client.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "steerguard/binary_io.hpp"
#include "steerguard/digest.hpp"
#include "steerguard/error.hpp"

namespace steerguard {

std::string request_key(const ChatRequest& request) {
    // Unit separator between the parts so ("ab","c") and ("a","bc") differ.
    return sha256_hex(request.system + '\x1f' + request.user);
}

void LlmClientConfig::validate() const {
    if (endpoint.has_value() == fixture_path.has_value()) {
        throw Error(ErrorKind::kInvalidArgument, "LLM client needs exactly one of an endpoint or a fixture path");
    }
    if (retries < 0) {
        throw Error(ErrorKind::kInvalidArgument, "LLM retry count must be >= 0");
    }
    if (parallelism == 0) {
        throw Error(ErrorKind::kInvalidArgument, "LLM parallelism must be >= 1");
    }
    if (timeout.count() <= 0) {
        throw Error(ErrorKind::kInvalidArgument, "LLM timeout must be positive");
    }
}

std::string escape_fixture_value(const std::string& value) {
    std::string out;
    out.reserve(value.size());
    for (const char c : value) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape_fixture_value(const std::string& value) {
    std::string out;
    out.reserve(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (value[i] != '\\' || i + 1 == value.size()) {
            out.push_back(value[i]);
            continue;
        }
        switch (value[++i]) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '\\': out.push_back('\\'); break;
        default:
            out.push_back('\\');
            out.push_back(value[i]);
        }
    }
    return out;
}

FixtureLlmClient::FixtureLlmClient(std::map<std::string, std::string> responses) : m_responses(std::move(responses)) {}

FixtureLlmClient FixtureLlmClient::from_file(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::map<std::string, std::string> responses;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw Error(ErrorKind::kFormat,
                        path.string() + ":" + std::to_string(line_no) + ": expected <key>\\t<response>");
        }
        responses[line.substr(0, tab)] = unescape_fixture_value(line.substr(tab + 1));
    }
    return FixtureLlmClient(std::move(responses));
}

std::string FixtureLlmClient::complete(const ChatRequest& request) {
    const auto key = request_key(request);
    const auto it = m_responses.find(key);
    if (it == m_responses.end()) {
        throw Error(ErrorKind::kNotFound, "fixture has no response for request " + key + " (user: \"" +
                                              request.user + "\")");
    }
    return it->second;
}

HttpLlmClient::HttpLlmClient(LlmClientConfig config) : m_config(std::move(config)) {
    if (!m_config.endpoint) {
        throw Error(ErrorKind::kInvalidArgument, "HTTP LLM client needs an endpoint");
    }
}

std::string HttpLlmClient::request_body(const ChatRequest& request) const {
    nlohmann::json body = {
        {"model", m_config.model},
        {"temperature", m_config.temperature},
        {"messages",
         nlohmann::json::array({{{"role", "system"}, {"content", request.system}},
                                {{"role", "user"}, {"content", request.user}}})},
    };
    return body.dump();
}

std::string HttpLlmClient::parse_response(const std::string& body) {
    const auto json = nlohmann::json::parse(body, nullptr, false);
    if (json.is_discarded()) {
        throw Error(ErrorKind::kFormat, "LLM response is not JSON");
    }
    try {
        return json.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::kFormat, "LLM response lacks choices[0].message.content");
    }
}

std::string HttpLlmClient::complete(const ChatRequest& request) {
    // Split "scheme://host[:port]/path" for httplib.
    const auto& url = *m_config.endpoint;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorKind::kInvalidArgument, "LLM endpoint must be an absolute URL: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    const auto base = url.substr(0, path_start);
    const auto path = path_start == std::string::npos ? std::string("/") : url.substr(path_start);

    httplib::Client client(base);
    const auto seconds = m_config.timeout.count() / 1000;
    const auto micros = (m_config.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    httplib::Headers headers;
    if (const char* key = std::getenv(m_config.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const auto body = request_body(request);
    std::string last_error;
    for (int attempt = 0; attempt <= m_config.retries; ++attempt) {
        auto result = client.Post(path, headers, body, "application/json");
        if (!result) {
            last_error = httplib::to_string(result.error());
            continue;
        }
        if (result->status >= 500 || result->status == 429) {
            last_error = "HTTP status " + std::to_string(result->status);
            continue;
        }
        if (result->status != 200) {
            throw Error(ErrorKind::kTransport, "LLM endpoint returned HTTP " + std::to_string(result->status));
        }
        return parse_response(result->body);
    }
    throw Error(ErrorKind::kTransport, "LLM request failed after " + std::to_string(m_config.retries + 1) +
                                           " attempts: " + last_error);
}

std::unique_ptr<LlmClient> make_llm_client(const LlmClientConfig& config) {
    config.validate();
    if (config.fixture_path) {
        return std::make_unique<FixtureLlmClient>(FixtureLlmClient::from_file(*config.fixture_path));
    }
    return std::make_unique<HttpLlmClient>(config);
}

void ResponseLog::record(const std::string& key, const std::string& response) {
    std::lock_guard lock(m_mutex);
    m_entries[key] = response;
}

std::vector<std::pair<std::string, std::string>> ResponseLog::entries() const {
    std::lock_guard lock(m_mutex);
    return {m_entries.begin(), m_entries.end()};
}

void ResponseLog::write_fixture(const std::filesystem::path& path) const {
    std::string out = "# request-sha256\tresponse\n";
    for (const auto& [key, response] : entries()) {
        out += key + '\t' + escape_fixture_value(response) + '\n';
    }
    write_file(path, out);
}

}  // namespace steerguard

// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "steerguard/bundle.hpp"

namespace steerguard {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    /// 0 binds an ephemeral port.
    int port = 8080;
    std::filesystem::path bundle_path;
    std::size_t max_body_bytes = 8u << 20;
    std::size_t max_parallel = 4;
    std::string log_level = "info";

    void validate() const;
};

/// Key-value text: one "key = value" per line, '#' starts a comment. Keys: bind
/// (host:port), host, port, bundle, max_body_bytes, max_parallel, log_level.
ServiceConfig parse_service_config(std::string_view text, ServiceConfig base = {});
ServiceConfig load_service_config(const std::filesystem::path& path, ServiceConfig base = {});
/// STEERGUARD_BIND (host:port) and STEERGUARD_BUNDLE override the matching fields.
void apply_env_overrides(ServiceConfig& config);

struct HttpReply {
    int status = 200;
    std::string body;
    /// Not part of the body, so bodies stay a pure function of the request.
    long long elapsed_us = 0;
};

/// HTTP front end over one immutable bundle.
///
///   GET  /v1/health -> {"status","bundle_sha256","dimension","version"}
///   POST /v1/scan   -> scan report JSON
///   POST /v1/guard  -> steered sequence + guard report
class GuardService {
public:
    GuardService(ModelBundle bundle, ServiceConfig config);
    ~GuardService();
    GuardService(const GuardService&) = delete;
    GuardService& operator=(const GuardService&) = delete;

    HttpReply handle_health() const;
    HttpReply handle_scan(std::string_view body) const;
    HttpReply handle_guard(std::string_view body) const;

    /// Binds the configured address; returns the bound port.
    int bind();
    /// Serves until stop(); bind() must have succeeded.
    void listen();
    void stop();
    bool running() const;

    const ModelBundle& bundle() const { return m_bundle; }

private:
    struct Server;
    const ModelBundle m_bundle;
    ServiceConfig m_config;
    std::unique_ptr<Server> m_server;
};

}  // namespace steerguard

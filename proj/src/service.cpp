// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "steerguard/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <sstream>

#include "steerguard/binary_io.hpp"
#include "steerguard/error.hpp"
#include "steerguard/pipeline.hpp"
#include "steerguard/wire.hpp"

namespace steerguard {
namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

void set_bind(ServiceConfig& config, const std::string& value) {
    const auto colon = value.rfind(':');
    if (colon == std::string::npos || colon == 0) {
        throw Error(ErrorKind::kInvalidArgument, "bind address must be host:port, got \"" + value + "\"");
    }
    config.host = value.substr(0, colon);
    try {
        config.port = std::stoi(value.substr(colon + 1));
    } catch (const std::exception&) {
        throw Error(ErrorKind::kInvalidArgument, "invalid port in \"" + value + "\"");
    }
}

HttpReply error_reply(int status, const std::string& message) {
    return {status, nlohmann::json{{"error", message}}.dump(), 0};
}

int status_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kDimensionMismatch:
    case ErrorKind::kNonFinite:
    case ErrorKind::kFormat:
    case ErrorKind::kTruncated: return 400;
    default: return 500;
    }
}

std::size_t parse_size(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(value, &used);
        if (used != value.size() || value.find('-') != std::string::npos) {
            throw std::invalid_argument(value);
        }
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw Error(ErrorKind::kInvalidArgument, "config key " + key + " needs an unsigned integer, got \"" + value + "\"");
    }
}

}  // namespace

void ServiceConfig::validate() const {
    if (port < 0 || port > 65535) {
        throw Error(ErrorKind::kInvalidArgument, "port must be in [0, 65535]");
    }
    if (max_body_bytes == 0 || max_parallel == 0) {
        throw Error(ErrorKind::kInvalidArgument, "request size limit and parallelism must be > 0");
    }
    if (host.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "bind host is empty");
    }
    if (spdlog::level::from_str(log_level) == spdlog::level::off && log_level != "off") {
        throw Error(ErrorKind::kInvalidArgument, "unknown log level \"" + log_level + "\"");
    }
}

ServiceConfig parse_service_config(std::string_view text, ServiceConfig config) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::kFormat, "config line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key == "bind") {
            set_bind(config, value);
        } else if (key == "host") {
            config.host = value;
        } else if (key == "port") {
            config.port = static_cast<int>(parse_size(key, value));
        } else if (key == "bundle") {
            config.bundle_path = value;
        } else if (key == "max_body_bytes") {
            config.max_body_bytes = parse_size(key, value);
        } else if (key == "max_parallel") {
            config.max_parallel = parse_size(key, value);
        } else if (key == "log_level") {
            config.log_level = value;
        } else {
            throw Error(ErrorKind::kFormat, "config line " + std::to_string(line_no) + ": unknown key \"" + key + "\"");
        }
    }
    return config;
}

ServiceConfig load_service_config(const std::filesystem::path& path, ServiceConfig base) {
    return parse_service_config(read_file(path), std::move(base));
}

void apply_env_overrides(ServiceConfig& config) {
    if (const char* bind = std::getenv("STEERGUARD_BIND"); bind && *bind) {
        set_bind(config, bind);
    }
    if (const char* bundle = std::getenv("STEERGUARD_BUNDLE"); bundle && *bundle) {
        config.bundle_path = bundle;
    }
}

struct GuardService::Server {
    httplib::Server http;
};

GuardService::GuardService(ModelBundle bundle, ServiceConfig config)
    : m_bundle(std::move(bundle)), m_config(std::move(config)) {
    m_config.validate();
}

GuardService::~GuardService() {
    stop();
}

HttpReply GuardService::handle_health() const {
    const nlohmann::json body = {
        {"status", "ok"},
        {"bundle_sha256", m_bundle.bundle_sha256},
        {"dimension", m_bundle.dimension()},
        {"version", m_bundle.version},
    };
    return {200, body.dump(), 0};
}

HttpReply GuardService::handle_scan(std::string_view body) const {
    const auto request = nlohmann::json::parse(body, nullptr, false);
    if (request.is_discarded()) {
        return error_reply(400, "request body is not valid JSON");
    }
    try {
        const auto seq = sequence_from_json(request, m_bundle.dimension());
        auto options = m_bundle.policy;
        if (request.contains("policy")) {
            options.apply_json(request.at("policy"));
        }
        const auto report = scan_prompt(m_bundle.identifier, seq, options.scan_options(), &m_bundle.centroids);
        return {200, scan_report_json(report).dump(), 0};
    } catch (const Error& e) {
        return error_reply(status_for(e), e.what());
    } catch (const std::exception& e) {
        return error_reply(500, std::string("internal error: ") + e.what());
    }
}

HttpReply GuardService::handle_guard(std::string_view body) const {
    const auto request = nlohmann::json::parse(body, nullptr, false);
    if (request.is_discarded()) {
        return error_reply(400, "request body is not valid JSON");
    }
    try {
        const auto seq = sequence_from_json(request, m_bundle.dimension());
        auto policy = m_bundle.policy;
        if (request.contains("policy")) {
            policy.apply_json(request.at("policy"));
        }
        const auto result = guard_prompt(m_bundle.identifier, m_bundle.steer, seq, policy, &m_bundle.centroids);
        auto out = sequence_to_json(result.output);
        out["report"] = guard_report_json(result.report);
        return {200, out.dump(), result.report.elapsed.count()};
    } catch (const Error& e) {
        return error_reply(status_for(e), e.what());
    } catch (const std::exception& e) {
        return error_reply(500, std::string("internal error: ") + e.what());
    }
}

int GuardService::bind() {
    m_server = std::make_unique<Server>();
    auto& http = m_server->http;
    const auto parallel = m_config.max_parallel;
    http.new_task_queue = [parallel] { return new httplib::ThreadPool(parallel); };
    http.set_payload_max_length(m_config.max_body_bytes);

    auto respond = [](httplib::Response& res, const HttpReply& reply) {
        res.status = reply.status;
        if (reply.elapsed_us > 0) {
            res.set_header("X-Guard-Elapsed-Us", std::to_string(reply.elapsed_us));
        }
        res.set_content(reply.body, "application/json");
    };
    http.Get("/v1/health", [this, respond](const httplib::Request&, httplib::Response& res) {
        respond(res, handle_health());
    });
    http.Post("/v1/scan", [this, respond](const httplib::Request& req, httplib::Response& res) {
        respond(res, handle_scan(req.body));
    });
    http.Post("/v1/guard", [this, respond](const httplib::Request& req, httplib::Response& res) {
        respond(res, handle_guard(req.body));
    });
    http.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        spdlog::info("{} {} -> {}", req.method, req.path, res.status);
    });
    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            res.set_content(nlohmann::json{{"error", httplib::status_message(res.status)}}.dump(), "application/json");
        }
    });

    spdlog::set_level(spdlog::level::from_str(m_config.log_level));
    const int port = m_config.port == 0 ? http.bind_to_any_port(m_config.host)
                                        : (http.bind_to_port(m_config.host, m_config.port) ? m_config.port : -1);
    if (port < 0) {
        throw Error(ErrorKind::kIo, "cannot bind " + m_config.host + ":" + std::to_string(m_config.port));
    }
    spdlog::info("serving bundle {} (D={}) on {}:{}", m_bundle.bundle_sha256, m_bundle.dimension(), m_config.host,
                 port);
    return port;
}

void GuardService::listen() {
    if (!m_server) {
        throw Error(ErrorKind::kInvalidArgument, "bind() must be called before listen()");
    }
    m_server->http.listen_after_bind();
}

void GuardService::stop() {
    if (m_server) {
        m_server->http.stop();
    }
}

bool GuardService::running() const {
    return m_server && m_server->http.is_running();
}

}  // namespace steerguard

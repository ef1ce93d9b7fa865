#pragma once

// HTTP completion backend for any JSON completion endpoint. The request body is
// built from a template plus JSON pointers naming where the prompt, token
// limit, temperature and stop list go; the response text is read from another
// JSON pointer. Credentials come from an environment variable.

#include <chrono>
#include <cstdlib>
#include <semaphore>
#include <string>
#include <thread>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "json.hpp"

#include "screenchat/backend.hpp"
#include "screenchat/error.hpp"

namespace screenchat {

struct LiveBackendConfig {
    std::string id = "live";
    std::string url; // scheme://host[:port]/path
    std::string auth_env;
    std::string auth_header = "Authorization";
    std::string auth_prefix = "Bearer ";
    nlohmann::json request_template = nlohmann::json::object();
    std::string prompt_pointer = "/prompt";
    std::string max_tokens_pointer = "/max_tokens";
    std::string temperature_pointer = "/temperature";
    std::string stop_pointer = "/stop";
    std::string response_pointer = "/choices/0/text";
    int max_retries = 3;
    int backoff_ms = 500;
    int max_in_flight = 4;
    int timeout_s = 60;
};

inline LiveBackendConfig live_config_from_json(const nlohmann::json& j) {
    LiveBackendConfig c;
    try {
        c.id = j.value("id", c.id);
        c.url = j.at("url").get<std::string>();
        c.auth_env = j.value("auth_env", c.auth_env);
        c.auth_header = j.value("auth_header", c.auth_header);
        c.auth_prefix = j.value("auth_prefix", c.auth_prefix);
        c.request_template = j.value("request_template", c.request_template);
        c.prompt_pointer = j.value("prompt_pointer", c.prompt_pointer);
        c.max_tokens_pointer = j.value("max_tokens_pointer", c.max_tokens_pointer);
        c.temperature_pointer = j.value("temperature_pointer", c.temperature_pointer);
        c.stop_pointer = j.value("stop_pointer", c.stop_pointer);
        c.response_pointer = j.value("response_pointer", c.response_pointer);
        c.max_retries = j.value("max_retries", c.max_retries);
        c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
        c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
        c.timeout_s = j.value("timeout_s", c.timeout_s);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigError, std::string("live backend config: ") + e.what());
    }
    if (c.max_in_flight < 1) c.max_in_flight = 1;
    if (c.max_retries < 0) c.max_retries = 0;
    return c;
}

class LiveBackend : public CompletionBackend {
public:
    explicit LiveBackend(LiveBackendConfig config)
        : config_(std::move(config)), slots_(std::min(config_.max_in_flight, max_slots)) {
        const auto scheme_end = config_.url.find("://");
        if (scheme_end == std::string::npos) throw Error(ErrorKind::ConfigError, "url needs a scheme: " + config_.url);
        const auto path_start = config_.url.find('/', scheme_end + 3);
        origin_ = config_.url.substr(0, path_start);
        path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
        for (const auto* ptr : {&config_.prompt_pointer, &config_.max_tokens_pointer, &config_.temperature_pointer,
                                &config_.stop_pointer, &config_.response_pointer}) {
            try {
                nlohmann::json::json_pointer check(*ptr);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::ConfigError, "bad JSON pointer '" + *ptr + "': " + e.what());
            }
        }
    }

    std::string id() const override { return config_.id; }

    nlohmann::json request_body(const CompletionRequest& request) const {
        using ptr = nlohmann::json::json_pointer;
        nlohmann::json body = config_.request_template;
        body[ptr(config_.prompt_pointer)] = request.prompt_text;
        if (!config_.max_tokens_pointer.empty()) body[ptr(config_.max_tokens_pointer)] = request.max_output_tokens;
        if (!config_.temperature_pointer.empty()) body[ptr(config_.temperature_pointer)] = request.temperature;
        if (!config_.stop_pointer.empty() && !request.stop_sequences.empty()) {
            body[ptr(config_.stop_pointer)] = request.stop_sequences;
        }
        return body;
    }

    CompletionResult complete(const CompletionRequest& request) override {
        httplib::Headers headers;
        if (!config_.auth_env.empty()) {
            const char* secret = std::getenv(config_.auth_env.c_str());
            if (!secret || !*secret) {
                throw Error(ErrorKind::AuthMissing, "environment variable " + config_.auth_env + " is not set");
            }
            headers.emplace(config_.auth_header, config_.auth_prefix + secret);
        }
        const auto body = request_body(request).dump();

        slots_.acquire();
        struct Release {
            std::counting_semaphore<max_slots>& s;
            ~Release() { s.release(); }
        } release{slots_};

        const auto started = std::chrono::steady_clock::now();
        int last_status = 0;
        std::string last_error;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms) * (1 << (attempt - 1)));
            }
            httplib::Client client(origin_);
            client.set_connection_timeout(config_.timeout_s);
            client.set_read_timeout(config_.timeout_s);
            auto res = client.Post(path_, headers, body, "application/json");
            if (!res) {
                last_status = 0;
                last_error = httplib::to_string(res.error());
                continue;
            }
            last_status = res->status;
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200) {
                throw Error(ErrorKind::BackendUnavailable, "HTTP " + std::to_string(res->status) + ": " + res->body);
            }
            try {
                auto j = nlohmann::json::parse(res->body);
                auto text = j.at(nlohmann::json::json_pointer(config_.response_pointer)).get<std::string>();
                const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - started);
                return {std::move(text), id(), elapsed.count()};
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::BackendUnavailable, std::string("unreadable response: ") + e.what());
            }
        }
        const auto tries = std::to_string(config_.max_retries + 1) + " attempts";
        if (last_status == 429) throw Error(ErrorKind::RateLimited, "HTTP 429 after " + tries);
        throw Error(ErrorKind::BackendUnavailable, last_error + " after " + tries);
    }

private:
    static constexpr int max_slots = 1024;

    LiveBackendConfig config_;
    std::string origin_;
    std::string path_;
    std::counting_semaphore<max_slots> slots_;
};

} // namespace screenchat

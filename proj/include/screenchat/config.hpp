#pragma once

// Backend configuration file (JSON):
//
//   {
//     "backend": {
//       "kind": "replay" | "live",
//       "store": "recordings.jsonl",          // replay source / --record target
//       "live": { "url": ..., "auth_env": ..., ... }   // see LiveBackendConfig
//     }
//   }

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"

#include "screenchat/backend.hpp"
#include "screenchat/error.hpp"
#include "screenchat/live_backend.hpp"

namespace screenchat {

struct BackendChoice {
    std::string kind = "replay";
    std::filesystem::path store;
    std::optional<LiveBackendConfig> live;
    bool record = false;
};

inline nlohmann::json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot read " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
    }
}

/// Applies the "backend" section of a config document onto `choice`.
inline void apply_config(BackendChoice& choice, const nlohmann::json& config) {
    if (!config.is_object() || !config.contains("backend")) return;
    const auto& b = config.at("backend");
    try {
        choice.kind = b.value("kind", choice.kind);
        if (b.contains("store")) choice.store = b.at("store").get<std::string>();
        if (b.contains("live")) choice.live = live_config_from_json(b.at("live"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigError, std::string("backend section: ") + e.what());
    }
}

inline std::shared_ptr<CompletionBackend> make_backend(const BackendChoice& choice) {
    std::shared_ptr<CompletionBackend> backend;
    std::shared_ptr<RecordingStore> store;
    if (!choice.store.empty()) store = std::make_shared<RecordingStore>(choice.store);
    if (choice.kind == "replay") {
        if (!store) throw Error(ErrorKind::ConfigError, "replay backend needs a recording store (--store)");
        backend = std::make_shared<ReplayBackend>(store);
    } else if (choice.kind == "live") {
        if (!choice.live) throw Error(ErrorKind::ConfigError, "live backend needs backend.live in --config");
        backend = std::make_shared<LiveBackend>(*choice.live);
    } else {
        throw Error(ErrorKind::ConfigError, "unknown backend kind '" + choice.kind + "'");
    }
    if (choice.record) {
        if (!store) throw Error(ErrorKind::ConfigError, "--record needs a recording store (--store)");
        backend = std::make_shared<RecordingBackend>(backend, store);
    }
    return backend;
}

} // namespace screenchat

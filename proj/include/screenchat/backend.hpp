#pragma once

// Completion backends. Everything the evaluation path touches in tests is
// offline: ScriptedBackend for unit tests, ReplayBackend over a JSON-lines
// recording store for reproducible runs. LiveBackend lives in live_backend.hpp.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

#include "screenchat/error.hpp"
#include "screenchat/task.hpp"

namespace screenchat {

struct CompletionRequest {
    std::string prompt_text;
    std::int64_t max_output_tokens = 256;
    double temperature = 0.0;
    std::vector<std::string> stop_sequences;
};

struct CompletionResult {
    std::string text;
    std::string backend_id;
    std::int64_t latency_ms = 0;
};

/// Decoding defaults: greedy, stop at the task's closing tag or a new "Screen:" block.
inline CompletionRequest default_request(TaskKind task, std::string prompt_text) {
    CompletionRequest req;
    req.prompt_text = std::move(prompt_text);
    req.max_output_tokens = task == TaskKind::QuestionGeneration ? 512 : 128;
    req.temperature = 0.0;
    // Question generation emits several <EOQ>; only the next screen ends it.
    if (task != TaskKind::QuestionGeneration) req.stop_sequences.emplace_back(task_delimiters(task).close);
    req.stop_sequences.emplace_back("\nScreen:");
    return req;
}

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;

    /// Safe to call from several threads at once.
    virtual CompletionResult complete(const CompletionRequest& request) = 0;
    virtual std::string id() const = 0;
};

/// Lowercase hex SHA-256 of the UTF-8 bytes; the replay key of a prompt.
inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("EVP_Digest(sha256) failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// JSON-lines file of {hash, prompt, completion, backend_id, ts}. Later lines
/// for the same hash win. Appends are serialized.
class RecordingStore {
public:
    RecordingStore() = default;
    explicit RecordingStore(std::filesystem::path path) : path_(std::move(path)) { reload(); }

    void reload() {
        std::unique_lock lock(mutex_);
        entries_.clear();
        if (path_.empty() || !std::filesystem::exists(path_)) return;
        std::ifstream in(path_);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                auto j = nlohmann::json::parse(line);
                entries_[j.at("hash").get<std::string>()] = j.at("completion").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::MalformedJson,
                            path_.string() + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

    std::optional<std::string> find(const std::string& hash) const {
        std::shared_lock lock(mutex_);
        auto it = entries_.find(hash);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void record(const CompletionRequest& request, const CompletionResult& result) {
        const auto hash = sha256_hex(request.prompt_text);
        nlohmann::json j{{"hash", hash},
                         {"prompt", request.prompt_text},
                         {"completion", result.text},
                         {"backend_id", result.backend_id},
                         {"ts", utc_timestamp()}};
        std::unique_lock lock(mutex_);
        if (!path_.empty()) {
            std::ofstream out(path_, std::ios::app);
            if (!out) throw Error(ErrorKind::StoreUnwritable, "cannot append to " + path_.string());
            out << j.dump() << '\n';
            out.flush();
            if (!out) throw Error(ErrorKind::StoreUnwritable, "write failed on " + path_.string());
        }
        entries_[hash] = result.text;
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return entries_.size();
    }

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, std::string> entries_;
};

class ReplayBackend : public CompletionBackend {
public:
    explicit ReplayBackend(std::shared_ptr<const RecordingStore> store) : store_(std::move(store)) {}

    CompletionResult complete(const CompletionRequest& request) override {
        const auto hash = sha256_hex(request.prompt_text);
        auto hit = store_->find(hash);
        if (!hit) throw Error(ErrorKind::ReplayMiss, "no recording for prompt " + hash);
        return {*hit, id(), 0};
    }

    std::string id() const override { return "replay"; }

private:
    std::shared_ptr<const RecordingStore> store_;
};

/// Returns queued responses in order; running dry is a BackendUnavailable.
class ScriptedBackend : public CompletionBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> responses) : queue_(responses.begin(), responses.end()) {}

    CompletionResult complete(const CompletionRequest&) override {
        std::lock_guard lock(mutex_);
        if (queue_.empty()) throw Error(ErrorKind::BackendUnavailable, "scripted backend exhausted");
        auto text = std::move(queue_.front());
        queue_.pop_front();
        return {std::move(text), id(), 0};
    }

    std::string id() const override { return "scripted"; }

private:
    std::mutex mutex_;
    std::deque<std::string> queue_;
};

/// Decorator that appends every successful completion to a store.
class RecordingBackend : public CompletionBackend {
public:
    RecordingBackend(std::shared_ptr<CompletionBackend> inner, std::shared_ptr<RecordingStore> store)
        : inner_(std::move(inner)), store_(std::move(store)) {}

    CompletionResult complete(const CompletionRequest& request) override {
        auto result = inner_->complete(request);
        store_->record(request, result);
        return result;
    }

    std::string id() const override { return inner_->id(); }

private:
    std::shared_ptr<CompletionBackend> inner_;
    std::shared_ptr<RecordingStore> store_;
};

} // namespace screenchat

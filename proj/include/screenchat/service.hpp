#pragma once

// Stateless HTTP+JSON service over a loaded corpus and a completion backend.
// Routing lives in AgentService::handle so it can be exercised without a socket;
// mount() binds it to a cpp-httplib server.

#include <algorithm>
#include <memory>
#include <string>
#include <string_view>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "json.hpp"

#include "screenchat/backend.hpp"
#include "screenchat/corpus.hpp"
#include "screenchat/error.hpp"
#include "screenchat/html.hpp"
#include "screenchat/pipeline.hpp"

namespace screenchat {

struct ServiceOptions {
    std::string cors_origin = "*";
    std::int64_t budget_tokens = default_budget_tokens;
    OverflowPolicy on_overflow = OverflowPolicy::DropLastExemplar;
};

struct HttpResponse {
    int status = 200;
    nlohmann::ordered_json body;
};

class AgentService {
public:
    AgentService(std::shared_ptr<const Corpus> corpus, std::shared_ptr<CompletionBackend> backend,
                 ServiceOptions options = {})
        : corpus_(std::move(corpus)), backend_(std::move(backend)), options_(std::move(options)) {}

    HttpResponse handle(std::string_view method, std::string_view path, std::string_view body = {}) const {
        try {
            if (method == "GET" && path == "/screens") return list_screens();
            if (method == "GET" && path.substr(0, 9) == "/screens/") return get_screen(std::string(path.substr(9)));
            if (method == "POST" && path.substr(0, 7) == "/tasks/") return post_task(path.substr(7), body);
            return error(404, "NotFound", "no route for " + std::string(method) + " " + std::string(path));
        } catch (const Error& e) {
            return from_error(e);
        }
    }

    void mount(httplib::Server& server) const {
        auto adapt = [this](const httplib::Request& req, httplib::Response& res) {
            auto out = handle(req.method, req.path, req.body);
            res.status = out.status;
            res.set_content(out.body.dump(), "application/json");
        };
        server.Get("/screens", adapt);
        server.Get(R"(/screens/[^/]+)", adapt);
        server.Post(R"(/tasks/[^/]+)", adapt);
        server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        server.set_post_routing_handler([origin = options_.cors_origin](const httplib::Request&, httplib::Response& res) {
            if (origin.empty()) return;
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        });
    }

private:
    static HttpResponse error(int status, std::string_view kind, const std::string& message) {
        return {status, {{"error", std::string(kind)}, {"message", message}}};
    }

    static HttpResponse from_error(const Error& e) {
        switch (e.kind()) {
        case ErrorKind::MissingScreen: return error(404, to_string(e.kind()), e.what());
        case ErrorKind::MissingTaskInput:
        case ErrorKind::InsufficientExemplars:
        case ErrorKind::IndexOutOfRange: return error(422, to_string(e.kind()), e.what());
        case ErrorKind::BudgetExceeded: return error(409, to_string(e.kind()), e.what());
        default:
            if (is_backend_error(e.kind())) return error(502, to_string(e.kind()), e.what());
            return error(500, to_string(e.kind()), e.what());
        }
    }

    HttpResponse list_screens() const {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& [id, screen] : corpus_->screens) {
            out.push_back({{"screen_id", id},
                           {"app_package", screen.source.app_package.value_or("")},
                           {"element_count", screen.html.elements.size()}});
        }
        return {200, out};
    }

    HttpResponse get_screen(const std::string& id) const {
        auto it = corpus_->screens.find(id);
        if (it == corpus_->screens.end()) return error(404, "MissingScreen", "screen '" + id + "' not in corpus");
        const auto& screen = it->second;
        auto dims = screen.source.screen_dims.value_or(
            ScreenDims{std::max<std::int64_t>(screen.source.root.bounds.right, 1),
                       std::max<std::int64_t>(screen.source.root.bounds.bottom, 1)});
        if (dims.width <= 0) dims.width = 1;
        if (dims.height <= 0) dims.height = 1;
        auto unit = [](std::int64_t v, std::int64_t extent) {
            return std::clamp(static_cast<double>(v) / static_cast<double>(extent), 0.0, 1.0);
        };
        nlohmann::ordered_json elements = nlohmann::ordered_json::array();
        for (const auto& el : screen.html.elements) {
            const auto& b = el.source.bounds;
            auto opt = [](const std::optional<std::string>& s) {
                return s ? nlohmann::ordered_json(*s) : nlohmann::ordered_json();
            };
            elements.push_back({{"index", el.index},
                                {"tag", std::string(tag_name(el.tag))},
                                {"text", opt(el.inner_text)},
                                {"class_words", opt(el.class_words)},
                                {"alt_text", opt(el.alt_text)},
                                {"bounds",
                                 {{"left", unit(b.left, dims.width)},
                                  {"top", unit(b.top, dims.height)},
                                  {"right", unit(b.right, dims.width)},
                                  {"bottom", unit(b.bottom, dims.height)}}}});
        }
        return {200,
                {{"screen_id", id},
                 {"html_text", screen.html.html_text},
                 {"elements", elements},
                 {"screen_dims", {{"width", dims.width}, {"height", dims.height}}}}};
    }

    HttpResponse post_task(std::string_view slug, std::string_view body) const {
        const auto task = parse_task(slug);
        if (!task) return error(404, "NotFound", "unknown task '" + std::string(slug) + "'");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body.empty() ? std::string_view("{}") : body);
        } catch (const nlohmann::json::parse_error& e) {
            return error(400, "MalformedJson", e.what());
        }
        if (!j.is_object()) return error(400, "MalformedJson", "request body must be a JSON object");

        TaskRequest req;
        req.task = *task;
        req.budget_tokens = options_.budget_tokens;
        req.on_overflow = options_.on_overflow;
        try {
            if (!j.contains("screen_id")) return error(422, "MissingTaskInput", "screen_id is required");
            req.screen_id = j.at("screen_id").get<std::string>();
            req.shots = j.value("shots", std::int64_t{1});
            req.seed = j.value("seed", std::uint64_t{0});
            const auto mode = parse_mode(j.value("mode", std::string("any")));
            if (!mode) return error(422, "InvalidMode", "mode must be any, in-app or cross-app");
            req.mode = *mode;
            const char* input_key = *task == TaskKind::QuestionAnswering ? "question" : "instruction";
            if (task_needs_input(*task)) {
                if (!j.contains(input_key) || !j.at(input_key).is_string() || j.at(input_key).get<std::string>().empty()) {
                    return error(422, "MissingTaskInput", std::string(input_key) + " is required");
                }
                req.input = j.at(input_key).get<std::string>();
            }
        } catch (const nlohmann::json::exception& e) {
            return error(422, "InvalidRequest", e.what());
        }

        const auto& screen = corpus_->screen(req.screen_id);
        const auto run = run_task(*corpus_, *backend_, req);

        nlohmann::ordered_json result;
        switch (*task) {
        case TaskKind::Summarization: result["summary"] = std::get<SummaryOutput>(run.output.value).summary; break;
        case TaskKind::QuestionAnswering: result["answer"] = std::get<AnswerOutput>(run.output.value).answer; break;
        case TaskKind::QuestionGeneration: {
            result["questions"] = parsed_to_json(run.output)["questions"];
            result["coverage_preview"] = {{"gt_indexes", input_field_indexes(screen.html)},
                                          {"enumerated_indexes", run.cot->enumerated_indexes}};
            break;
        }
        case TaskKind::InstructionToAction: {
            const auto idx = std::get<ActionOutput>(run.output.value).element_index;
            bool valid = false;
            if (idx) {
                try {
                    lookup_element(screen.html, *idx);
                    valid = true;
                } catch (const Error&) {
                }
            }
            result["element_index"] = idx ? nlohmann::ordered_json(*idx) : nlohmann::ordered_json();
            result["valid"] = valid;
            break;
        }
        }
        return {200,
                {{"result", result},
                 {"prompt_hash", run.prompt_hash},
                 {"raw_output", run.completion.text},
                 {"warnings", run.output.warnings}}};
    }

    std::shared_ptr<const Corpus> corpus_;
    std::shared_ptr<CompletionBackend> backend_;
    ServiceOptions options_;
};

} // namespace screenchat

// screenchat: convert view hierarchies, build prompts, run evaluations and
// serve the conversational API.
//
// Exit codes: 0 ok, 2 input error, 3 prompt budget exceeded, 4 backend error.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "screenchat/backend.hpp"
#include "screenchat/config.hpp"
#include "screenchat/corpus.hpp"
#include "screenchat/error.hpp"
#include "screenchat/html.hpp"
#include "screenchat/pipeline.hpp"
#include "screenchat/prompt.hpp"
#include "screenchat/service.hpp"
#include "screenchat/view_hierarchy.hpp"

namespace fs = std::filesystem;
using namespace screenchat;

namespace {

int exit_code_for(ErrorKind kind) {
    if (kind == ErrorKind::BudgetExceeded) return 3;
    if (is_backend_error(kind)) return 4;
    return 2;
}

void write_output(const std::optional<std::string>& path, const std::string& text) {
    if (!path) {
        std::cout << text;
        return;
    }
    std::ofstream out(*path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::LayoutError, "cannot write " + *path);
    out << text;
}

// Minimal RFC 4180 reader: quoted fields, doubled quotes, embedded newlines.
std::vector<std::vector<std::string>> read_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get();
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field.push_back(c);
        }
    }
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

struct CommonTaskFlags {
    std::string corpus;
    std::string task;
    std::int64_t shots = 1;
    std::uint64_t seed = 0;
    std::string mode = "any";
    std::int64_t budget = default_budget_tokens;
    std::string on_overflow = "drop";

    void add_to(CLI::App* cmd) {
        cmd->add_option("--corpus", corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
        cmd->add_option("--task", task, "generate-questions | summarize | qa | act")
            ->required()
            ->check(CLI::IsMember({"generate-questions", "summarize", "qa", "act"}));
        cmd->add_option("--shots", shots, "Exemplars per prompt")->check(CLI::NonNegativeNumber);
        cmd->add_option("--seed", seed, "Exemplar sampling seed");
        cmd->add_option("--mode", mode, "Exemplar package policy")->check(CLI::IsMember({"any", "in-app", "cross-app"}));
        cmd->add_option("--budget", budget, "Prompt budget in approximate tokens")->check(CLI::PositiveNumber);
        cmd->add_option("--on-overflow", on_overflow, "fail | drop")->check(CLI::IsMember({"fail", "drop"}));
    }

    TaskKind task_kind() const { return *parse_task(task); }
    SamplingMode sampling_mode() const { return *parse_mode(mode); }
    OverflowPolicy overflow() const {
        return on_overflow == "fail" ? OverflowPolicy::Fail : OverflowPolicy::DropLastExemplar;
    }
};

struct BackendFlags {
    std::string kind = "replay";
    std::string store;
    std::string config;
    bool record = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--backend", kind, "replay | live")->check(CLI::IsMember({"replay", "live"}));
        cmd->add_option("--store", store, "Recording store (JSON lines)");
        cmd->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
        cmd->add_flag("--record", record, "Append every completion to the recording store");
    }

    std::shared_ptr<CompletionBackend> make(const CLI::App* cmd) const {
        BackendChoice choice;
        if (!config.empty()) apply_config(choice, load_json_file(config));
        if (cmd->count("--backend")) choice.kind = kind;
        if (!store.empty()) choice.store = store;
        choice.record = record;
        return make_backend(choice);
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conversational mobile UI toolkit: view hierarchy to HTML, prompts, evaluation, service"};
    app.require_subcommand(1);
    bool json_errors = false;
    app.add_flag("--json-errors", json_errors, "Print errors as JSON on stderr");

    // convert
    auto* convert = app.add_subcommand("convert", "Render a view hierarchy JSON file as HTML");
    std::string convert_in;
    std::optional<std::string> convert_out;
    convert->add_option("screen", convert_in, "View hierarchy JSON")->required();
    convert->add_option("--out", convert_out, "Write HTML here instead of stdout");

    // baseline
    auto* baseline = app.add_subcommand("baseline", "Template baseline questions for a view hierarchy");
    std::string baseline_in;
    baseline->add_option("screen", baseline_in, "View hierarchy JSON")->required();

    // prompt
    auto* prompt = app.add_subcommand("prompt", "Print the few-shot prompt for one test screen");
    CommonTaskFlags prompt_flags;
    prompt_flags.add_to(prompt);
    std::string prompt_screen;
    std::optional<std::string> prompt_question, prompt_instruction, prompt_out;
    prompt->add_option("--screen", prompt_screen, "Test screen id")->required();
    prompt->add_option("--question", prompt_question, "Question (qa)");
    prompt->add_option("--instruction", prompt_instruction, "Instruction (act)");
    prompt->add_option("--out", prompt_out, "Write the prompt here instead of stdout");

    // eval / run
    auto* eval = app.add_subcommand("eval", "Run a task over a corpus and score it");
    eval->alias("run");
    CommonTaskFlags eval_flags;
    eval_flags.add_to(eval);
    BackendFlags eval_backend;
    eval_backend.add_to(eval);
    std::string eval_out = "run";
    int parallel = 1;
    bool exclude_absent = false;
    eval->add_option("--out", eval_out, "Output directory for report.json, report.txt, manifest.json, items.jsonl");
    eval->add_option("--parallel", parallel, "Items processed concurrently")->check(CLI::PositiveNumber);
    eval->add_flag("--exclude-absent-answers", exclude_absent,
                   "Skip QA pairs whose answer does not occur in the view hierarchy");

    // serve
    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    std::string serve_corpus, host = "127.0.0.1", cors = "*";
    int port = 8080;
    BackendFlags serve_backend;
    serve_backend.add_to(serve);
    serve->add_option("--corpus", serve_corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port");
    serve->add_option("--cors-origin", cors, "Access-Control-Allow-Origin value (empty disables)");

    // import-screen2words
    auto* import_s2w = app.add_subcommand("import-screen2words", "Convert a Screen2Words CSV into summaries.jsonl");
    std::string s2w_csv;
    std::optional<std::string> s2w_out;
    import_s2w->add_option("csv", s2w_csv, "CSV with screenId,summary columns")->required()->check(CLI::ExistingFile);
    import_s2w->add_option("--out", s2w_out, "Write here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*convert) {
            const auto html = render_screen(load_screen_file(convert_in));
            write_output(convert_out, html.html_text + (html.html_text.empty() ? "" : "\n"));
        } else if (*baseline) {
            const auto html = render_screen(load_screen_file(baseline_in));
            std::string out;
            for (const auto& [q, id] : template_baseline_questions(html)) out += q + " (id=" + std::to_string(id) + ")\n";
            std::cout << out;
        } else if (*prompt) {
            const auto corpus = load_corpus(prompt_flags.corpus);
            TaskRequest req;
            req.task = prompt_flags.task_kind();
            req.screen_id = prompt_screen;
            req.shots = prompt_flags.shots;
            req.seed = prompt_flags.seed;
            req.mode = prompt_flags.sampling_mode();
            req.budget_tokens = prompt_flags.budget;
            req.on_overflow = prompt_flags.overflow();
            if (req.task == TaskKind::QuestionAnswering) req.input = prompt_question;
            if (req.task == TaskKind::InstructionToAction) req.input = prompt_instruction;
            const auto p = prepare_prompt(corpus, req);
            if (p.shots_used < req.shots) {
                std::cerr << "note: dropped " << (req.shots - p.shots_used) << " exemplar(s) to fit the budget\n";
            }
            write_output(prompt_out, p.text + "\n");
        } else if (*eval) {
            const auto corpus = load_corpus(eval_flags.corpus);
            auto backend = eval_backend.make(eval);
            RunOptions opt;
            opt.task = eval_flags.task_kind();
            opt.shots = eval_flags.shots;
            opt.seed = eval_flags.seed;
            opt.mode = eval_flags.sampling_mode();
            opt.budget_tokens = eval_flags.budget;
            opt.on_overflow = eval_flags.overflow();
            opt.include_absent_answers = !exclude_absent;
            opt.parallel = parallel;
            const auto result = run_eval(corpus, *backend, opt);
            RunManifest manifest;
            manifest.task = opt.task;
            manifest.shots = opt.shots;
            manifest.seed = opt.seed;
            manifest.mode = opt.mode;
            manifest.backend_id = backend->id();
            manifest.corpus_path = eval_flags.corpus;
            manifest.timestamp = utc_timestamp();
            manifest.budget_tokens = opt.budget_tokens;
            manifest.on_overflow = opt.on_overflow;
            manifest.include_absent_answers = opt.include_absent_answers;
            write_run(eval_out, result, opt, manifest);
            std::cout << render_text_report(result.report, model_label(opt));
        } else if (*serve) {
            auto corpus = std::make_shared<const Corpus>(load_corpus(serve_corpus));
            ServiceOptions options;
            options.cors_origin = cors;
            AgentService service(corpus, serve_backend.make(serve), options);
            httplib::Server server;
            service.mount(server);
            std::cerr << "serving " << corpus->screens.size() << " screens on http://" << host << ":" << port << "\n";
            if (!server.listen(host, port)) throw Error(ErrorKind::ConfigError, "cannot bind " + host + ":" + std::to_string(port));
        } else if (*import_s2w) {
            std::ifstream in(s2w_csv);
            auto rows = read_csv(in);
            if (rows.empty()) throw Error(ErrorKind::LayoutError, "empty CSV");
            const auto& header = rows.front();
            auto col = [&](const std::string& name) -> std::size_t {
                for (std::size_t i = 0; i < header.size(); ++i) {
                    if (header[i] == name) return i;
                }
                throw Error(ErrorKind::LayoutError, "CSV has no '" + name + "' column");
            };
            const auto id_col = col("screenId"), sum_col = col("summary");
            std::vector<std::string> order;
            std::map<std::string, std::vector<std::string>> grouped;
            for (std::size_t r = 1; r < rows.size(); ++r) {
                const auto& row = rows[r];
                if (row.size() <= std::max(id_col, sum_col)) continue;
                auto [it, fresh] = grouped.try_emplace(row[id_col]);
                if (fresh) order.push_back(row[id_col]);
                it->second.push_back(row[sum_col]);
            }
            std::string out;
            for (const auto& id : order) {
                out += nlohmann::json{{"screen_id", id}, {"summaries", grouped[id]}}.dump() + "\n";
            }
            write_output(s2w_out, out);
        }
    } catch (const Error& e) {
        if (json_errors) {
            std::cerr << nlohmann::json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump() << "\n";
        } else {
            std::cerr << "error: " << e.what() << "\n";
        }
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        if (json_errors) {
            std::cerr << nlohmann::json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
        } else {
            std::cerr << "error: " << e.what() << "\n";
        }
        return 2;
    }
    return 0;
}

#pragma once

// The evaluation loop: sample -> build -> complete -> parse -> score, plus the
// single-shot task execution the HTTP service uses.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "screenchat/backend.hpp"
#include "screenchat/corpus.hpp"
#include "screenchat/error.hpp"
#include "screenchat/metrics.hpp"
#include "screenchat/output_parser.hpp"
#include "screenchat/prompt.hpp"
#include "screenchat/report.hpp"

namespace screenchat {

inline constexpr std::string_view toolkit_version = "0.3.0";

struct TaskRequest {
    TaskKind task = TaskKind::Summarization;
    std::string screen_id;
    std::int64_t shots = 1;
    std::uint64_t seed = 0;
    SamplingMode mode = SamplingMode::Any;
    std::optional<std::string> input; // question or instruction
    std::int64_t budget_tokens = default_budget_tokens;
    OverflowPolicy on_overflow = OverflowPolicy::DropLastExemplar;
};

/// Sampling plus prompt assembly for one test screen.
inline Prompt prepare_prompt(const Corpus& corpus, const TaskRequest& req) {
    const auto& screen = corpus.screen(req.screen_id);
    if (task_needs_input(req.task) && !req.input) {
        throw Error(ErrorKind::MissingTaskInput, std::string(task_slug(req.task)) + " needs " +
                                                     (req.task == TaskKind::QuestionAnswering ? "a question"
                                                                                              : "an instruction"));
    }
    PromptSpec spec;
    spec.task = req.task;
    spec.budget_tokens = req.budget_tokens;
    spec.on_overflow = req.on_overflow;
    spec.exemplars = sample_exemplars(corpus, req.task, req.shots, req.seed, req.mode, req.screen_id);
    return build_prompt(spec, screen.html, req.input);
}

struct TaskRun {
    Prompt prompt;
    std::string prompt_hash;
    CompletionResult completion;
    TaskOutput output;
    std::optional<CotParse> cot; // question generation only
};

/// One request end to end. Backend errors propagate to the caller.
inline TaskRun run_task(const Corpus& corpus, CompletionBackend& backend, const TaskRequest& req) {
    TaskRun run;
    run.prompt = prepare_prompt(corpus, req);
    run.prompt_hash = sha256_hex(run.prompt.text);
    run.completion = backend.complete(default_request(req.task, run.prompt.text));
    run.output = parse_output(req.task, run.completion.text);
    if (req.task == TaskKind::QuestionGeneration) {
        run.cot = parse_cot(run.completion.text);
        for (const auto& w : run.cot->warnings) run.output.warnings.push_back(w);
    }
    return run;
}

inline nlohmann::ordered_json parsed_to_json(const TaskOutput& out) {
    nlohmann::ordered_json j;
    if (const auto* q = std::get_if<QuestionsOutput>(&out.value)) {
        j["questions"] = nlohmann::ordered_json::array();
        for (const auto& x : q->questions) j["questions"].push_back({{"text", x.text}, {"element_indexes", x.element_indexes}});
    } else if (const auto* s = std::get_if<SummaryOutput>(&out.value)) {
        j["summary"] = s->summary;
    } else if (const auto* a = std::get_if<AnswerOutput>(&out.value)) {
        j["answer"] = a->answer;
    } else if (const auto* act = std::get_if<ActionOutput>(&out.value)) {
        j["element_index"] = act->element_index ? nlohmann::ordered_json(*act->element_index) : nlohmann::ordered_json();
    }
    return j;
}

struct RunOptions {
    TaskKind task = TaskKind::QuestionAnswering;
    std::int64_t shots = 1;
    std::uint64_t seed = 0;
    SamplingMode mode = SamplingMode::Any;
    std::int64_t budget_tokens = default_budget_tokens;
    OverflowPolicy on_overflow = OverflowPolicy::DropLastExemplar;
    bool include_absent_answers = true;
    int parallel = 1;
};

struct ItemRecord {
    std::string item_id;
    std::string screen_id;
    std::string prompt_hash;
    std::int64_t shots_used = 0;
    std::string raw_output;
    nlohmann::ordered_json parsed;
    nlohmann::ordered_json scores;
    std::vector<std::string> warnings;
};

inline nlohmann::ordered_json to_json(const ItemRecord& r) {
    return {{"item_id", r.item_id},       {"screen_id", r.screen_id}, {"prompt_hash", r.prompt_hash},
            {"shots_used", r.shots_used}, {"raw_output", r.raw_output}, {"parsed", r.parsed},
            {"scores", r.scores},         {"warnings", r.warnings}};
}

struct RunResult {
    MetricsReport report;
    std::vector<ItemRecord> items;
};

namespace detail {

struct EvalItem {
    std::string item_id;
    TaskRequest request;
    // Ground truth; which fields are used depends on the task.
    std::string gt_answer;
    std::vector<std::string> gt_summaries;
    std::int64_t gold_index = 0;
    std::size_t task_group = 0;
};

inline std::vector<EvalItem> eval_items(const Corpus& corpus, const RunOptions& opt) {
    std::vector<EvalItem> items;
    auto base = [&](const std::string& screen_id) {
        TaskRequest r;
        r.task = opt.task;
        r.screen_id = screen_id;
        r.shots = opt.shots;
        r.seed = opt.seed + items.size();
        r.mode = opt.mode;
        r.budget_tokens = opt.budget_tokens;
        r.on_overflow = opt.on_overflow;
        return r;
    };
    switch (opt.task) {
    case TaskKind::QuestionAnswering:
        for (std::size_t i = 0; i < corpus.qa.size(); ++i) {
            const auto& r = corpus.qa[i];
            if (!opt.include_absent_answers && !r.answer_in_hierarchy) continue;
            EvalItem it;
            it.item_id = "qa-" + std::to_string(i);
            it.request = base(r.screen_id);
            it.request.input = r.question;
            it.gt_answer = r.answer;
            items.push_back(std::move(it));
        }
        break;
    case TaskKind::Summarization:
        for (std::size_t i = 0; i < corpus.summaries.size(); ++i) {
            EvalItem it;
            it.item_id = "summary-" + std::to_string(i);
            it.request = base(corpus.summaries[i].screen_id);
            it.gt_summaries = corpus.summaries[i].summaries;
            items.push_back(std::move(it));
        }
        break;
    case TaskKind::QuestionGeneration:
        // Every screen with at least one input field is a test screen.
        for (const auto& [id, screen] : corpus.screens) {
            if (input_field_indexes(screen.html).empty()) continue;
            EvalItem it;
            it.item_id = "screen-" + id;
            it.request = base(id);
            items.push_back(std::move(it));
        }
        break;
    case TaskKind::InstructionToAction:
        // Teacher forcing: every step runs on its gold screen.
        for (std::size_t t = 0; t < corpus.tasks.size(); ++t) {
            const auto& task = corpus.tasks[t];
            for (std::size_t s = 0; s < task.steps.size(); ++s) {
                EvalItem it;
                it.item_id = task.task_id + "#" + std::to_string(s);
                it.request = base(task.steps[s].screen_id);
                it.request.input = task.steps[s].instruction;
                it.gold_index = task.steps[s].gold_element_index;
                it.task_group = t;
                items.push_back(std::move(it));
            }
        }
        break;
    }
    return items;
}

} // namespace detail

/// Runs every item of the task over the corpus. Item-level backend failures
/// (a replay miss, an unreachable server) score the item as wrong and add a
/// warning; AuthMissing, BudgetExceeded in Fail mode and sampling errors abort.
inline RunResult run_eval(const Corpus& corpus, CompletionBackend& backend, const RunOptions& opt) {
    const auto items = detail::eval_items(corpus, opt);
    std::vector<ItemRecord> records(items.size());
    std::vector<std::optional<TaskRun>> runs(items.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < items.size(); i = next++) {
            try {
                auto& rec = records[i];
                rec.item_id = items[i].item_id;
                rec.screen_id = items[i].request.screen_id;
                auto prompt = prepare_prompt(corpus, items[i].request);
                rec.prompt_hash = sha256_hex(prompt.text);
                rec.shots_used = prompt.shots_used;
                try {
                    TaskRun run;
                    run.completion = backend.complete(default_request(opt.task, prompt.text));
                    run.output = parse_output(opt.task, run.completion.text);
                    if (opt.task == TaskKind::QuestionGeneration) {
                        run.cot = parse_cot(run.completion.text);
                        for (const auto& w : run.cot->warnings) run.output.warnings.push_back(w);
                    }
                    run.prompt = std::move(prompt);
                    rec.raw_output = run.completion.text;
                    rec.warnings = run.output.warnings;
                    runs[i] = std::move(run);
                } catch (const Error& e) {
                    if (!is_backend_error(e.kind()) || e.kind() == ErrorKind::AuthMissing) throw;
                    rec.warnings.push_back(e.what());
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = items.size();
            }
        }
    };
    const int threads = std::max(1, std::min<int>(opt.parallel, static_cast<int>(items.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    RunResult result;
    auto& report = result.report;
    report.task = opt.task;
    report.n_items = static_cast<std::int64_t>(items.size());

    // Scoring is sequential and in item order, so reports do not depend on --parallel.
    switch (opt.task) {
    case TaskKind::QuestionAnswering: {
        std::int64_t exact = 0, contains = 0, sub = 0;
        std::vector<std::pair<std::string, std::string>> pairs;
        for (std::size_t i = 0; i < items.size(); ++i) {
            std::string pred;
            if (runs[i]) {
                pred = std::get<AnswerOutput>(runs[i]->output.value).answer;
                records[i].parsed = parsed_to_json(runs[i]->output);
            }
            const auto cls = runs[i] ? classify_answer(pred, items[i].gt_answer) : AnswerMatch::NoMatch;
            exact += cls == AnswerMatch::ExactMatch;
            contains += cls == AnswerMatch::ContainsGT;
            sub += cls == AnswerMatch::SubStringOfGT;
            pairs.emplace_back(pred, items[i].gt_answer);
            records[i].scores = {{"match", std::string(to_string(cls))},
                                 {"f1", micro_f1({{pred, items[i].gt_answer}})}};
        }
        const double n = items.empty() ? 1.0 : static_cast<double>(items.size());
        report.qa = QaScores{exact / n, contains / n, sub / n, micro_f1(pairs)};
        break;
    }
    case TaskKind::Summarization: {
        std::vector<std::string> cands;
        std::vector<std::vector<std::string>> refs;
        for (std::size_t i = 0; i < items.size(); ++i) {
            std::string cand;
            if (runs[i]) {
                cand = std::get<SummaryOutput>(runs[i]->output.value).summary;
                records[i].parsed = parsed_to_json(runs[i]->output);
            }
            cands.push_back(cand);
            refs.push_back(items[i].gt_summaries);
            records[i].scores = {{"rouge_l", rouge_l({cand}, {items[i].gt_summaries})}};
        }
        report.summarization = SummaryScores{bleu(cands, refs, 4), rouge_l(cands, refs)};
        break;
    }
    case TaskKind::QuestionGeneration: {
        double psum = 0.0, rsum = 0.0;
        for (std::size_t i = 0; i < items.size(); ++i) {
            const auto& screen = corpus.screen(items[i].request.screen_id);
            const auto gt_vec = input_field_indexes(screen.html);
            std::set<std::int64_t> gt(gt_vec.begin(), gt_vec.end()), pred;
            if (runs[i]) {
                pred.insert(runs[i]->cot->enumerated_indexes.begin(), runs[i]->cot->enumerated_indexes.end());
                records[i].parsed = parsed_to_json(runs[i]->output);
                records[i].parsed["enumerated_indexes"] = runs[i]->cot->enumerated_indexes;
            }
            const auto c = coverage_f1(gt, pred);
            psum += c.precision;
            rsum += c.recall;
            records[i].scores = {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}};
        }
        // Macro-averaged precision and recall; F1 from the averages.
        const double n = items.empty() ? 1.0 : static_cast<double>(items.size());
        report.coverage = coverage_from(psum / n, rsum / n);
        break;
    }
    case TaskKind::InstructionToAction: {
        std::vector<std::vector<ActionStep>> tasks(corpus.tasks.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
            ActionStep step{items[i].gold_index, std::nullopt};
            if (runs[i]) {
                step.predicted_index = std::get<ActionOutput>(runs[i]->output.value).element_index;
                records[i].parsed = parsed_to_json(runs[i]->output);
            }
            tasks[items[i].task_group].push_back(step);
            records[i].scores = {{"gold", step.gold_index}, {"correct", step.correct()}};
        }
        if (!tasks.empty()) report.action = action_match(tasks);
        break;
    }
    }
    for (const auto& r : records) report.warnings_total += static_cast<std::int64_t>(r.warnings.size());
    result.items = std::move(records);
    return result;
}

struct RunManifest {
    TaskKind task = TaskKind::QuestionAnswering;
    std::int64_t shots = 0;
    std::uint64_t seed = 0;
    SamplingMode mode = SamplingMode::Any;
    std::string backend_id;
    std::string corpus_path;
    std::string timestamp;
    std::string version{toolkit_version};
    std::int64_t budget_tokens = default_budget_tokens;
    OverflowPolicy on_overflow = OverflowPolicy::DropLastExemplar;
    bool include_absent_answers = true;
};

inline nlohmann::ordered_json to_json(const RunManifest& m) {
    return {{"task", std::string(task_slug(m.task))},
            {"shots", m.shots},
            {"seed", m.seed},
            {"mode", std::string(mode_slug(m.mode))},
            {"backend_id", m.backend_id},
            {"corpus_path", m.corpus_path},
            {"budget_tokens", m.budget_tokens},
            {"on_overflow", m.on_overflow == OverflowPolicy::Fail ? "fail" : "drop-last-exemplar"},
            {"include_absent_answers", m.include_absent_answers},
            {"toolkit_version", m.version},
            {"timestamp", m.timestamp}};
}

inline std::string model_label(const RunOptions& opt) {
    std::string label = std::to_string(opt.shots) + "-shot LLM";
    if (opt.task == TaskKind::InstructionToAction && opt.mode != SamplingMode::Any) {
        label += " (" + std::string(mode_slug(opt.mode)) + ")";
    }
    return label;
}

/// Writes report.json, report.txt, manifest.json and items.jsonl into `dir`.
inline void write_run(const std::filesystem::path& dir, const RunResult& result, const RunOptions& opt,
                      const RunManifest& manifest) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::LayoutError, "cannot write " + (dir / name).string());
        out << body;
    };
    write("report.json", to_json(result.report).dump(2) + "\n");
    write("report.txt", render_text_report(result.report, model_label(opt)));
    write("manifest.json", to_json(manifest).dump(2) + "\n");
    std::string lines;
    for (const auto& item : result.items) lines += to_json(item).dump() + "\n";
    write("items.jsonl", lines);
}

} // namespace screenchat

#pragma once

// Desk-scale dataset layout:
//
//   <root>/screens/<screen_id>.json   RICO-style view hierarchies
//   <root>/summaries.jsonl            {"screen_id", "summaries": [..]}
//   <root>/qa.jsonl                   {"screen_id", "question", "answer", "answer_in_hierarchy"?}
//   <root>/tasks.jsonl                {"task_id", "app_package"?, "steps": [{"screen_id", "instruction", "gold"}]}
//   <root>/questions.jsonl            question-generation exemplars (chain of thought)
//
// Every jsonl file is optional; screens/ is not.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "screenchat/error.hpp"
#include "screenchat/html.hpp"
#include "screenchat/metrics.hpp"
#include "screenchat/prompt.hpp"
#include "screenchat/task.hpp"
#include "screenchat/view_hierarchy.hpp"

namespace screenchat {

struct Screen {
    ScreenSource source;
    ScreenHtml html;

    friend bool operator==(const Screen&, const Screen&) = default;
};

struct SummaryRecord {
    std::string screen_id;
    std::vector<std::string> summaries;

    friend bool operator==(const SummaryRecord&, const SummaryRecord&) = default;
};

struct QaRecord {
    std::string screen_id;
    std::string question;
    std::string answer;
    bool answer_in_hierarchy = true;

    friend bool operator==(const QaRecord&, const QaRecord&) = default;
};

struct InstructionStep {
    std::string screen_id;
    std::string instruction;
    std::int64_t gold_element_index = 0;

    friend bool operator==(const InstructionStep&, const InstructionStep&) = default;
};

struct InstructionTask {
    std::string task_id;
    std::vector<InstructionStep> steps;
    std::string app_package;

    friend bool operator==(const InstructionTask&, const InstructionTask&) = default;
};

/// A question-generation exemplar: the chain of thought authored for one screen.
struct QuestionRecord {
    std::string screen_id;
    std::string summary;
    std::string page_label;
    std::vector<EnumeratedField> enumeration;
    std::vector<Question> questions;

    friend bool operator==(const QuestionRecord&, const QuestionRecord&) = default;
};

struct Corpus {
    std::filesystem::path root;
    std::map<std::string, Screen> screens; // ordered by screen_id
    std::vector<SummaryRecord> summaries;
    std::vector<QaRecord> qa;
    std::vector<InstructionTask> tasks;
    std::vector<QuestionRecord> questions;

    const Screen& screen(const std::string& id) const {
        auto it = screens.find(id);
        if (it == screens.end()) throw Error(ErrorKind::MissingScreen, "screen '" + id + "' not in corpus");
        return it->second;
    }

    friend bool operator==(const Corpus& a, const Corpus& b) {
        return a.screens == b.screens && a.summaries == b.summaries && a.qa == b.qa && a.tasks == b.tasks &&
               a.questions == b.questions;
    }
};

namespace detail {

template <typename F>
void for_each_jsonl(const std::filesystem::path& path, F&& fn) {
    if (!std::filesystem::exists(path)) return;
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::LayoutError, "cannot read " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto where = path.filename().string() + ":" + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::MalformedJson, where + ": " + e.what());
        }
        try {
            fn(j, where);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::LayoutError, where + ": " + e.what());
        }
    }
}

inline void require_index(const Screen& screen, std::int64_t index, const std::string& what) {
    if (index < 0 || index >= static_cast<std::int64_t>(screen.html.elements.size())) {
        throw Error(ErrorKind::InvalidGoldIndex, what + ": id " + std::to_string(index) + " not on screen '" +
                                                     screen.source.screen_id + "' (" +
                                                     std::to_string(screen.html.elements.size()) + " elements)");
    }
}

/// Whether the normalized answer occurs in the normalized text of any element.
inline bool answer_on_screen(const ScreenHtml& html, const std::string& answer) {
    const auto needle = normalize(answer).joined;
    if (needle.empty()) return false;
    for (const auto& el : html.elements) {
        for (const auto* field : {&el.inner_text, &el.alt_text}) {
            if (*field && normalize(**field).joined.find(needle) != std::string::npos) return true;
        }
    }
    return false;
}

} // namespace detail

/// Loads and cross-validates a corpus directory.
inline Corpus load_corpus(const std::filesystem::path& root) {
    Corpus c;
    c.root = root;
    const auto screens_dir = root / "screens";
    if (!std::filesystem::is_directory(screens_dir)) {
        throw Error(ErrorKind::LayoutError, "missing directory " + screens_dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(screens_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        Screen s;
        try {
            s.source = load_screen_file(f);
        } catch (const Error& e) {
            throw Error(e.kind(), f.filename().string() + ": " + e.what());
        }
        s.html = render_screen(s.source);
        c.screens.emplace(s.source.screen_id, std::move(s));
    }

    detail::for_each_jsonl(root / "summaries.jsonl", [&](const nlohmann::json& j, const std::string& where) {
        SummaryRecord r{j.at("screen_id").get<std::string>(), j.at("summaries").get<std::vector<std::string>>()};
        if (r.summaries.empty()) throw Error(ErrorKind::LayoutError, where + ": record has no summaries");
        if (!c.screens.count(r.screen_id)) throw Error(ErrorKind::MissingScreen, where + ": " + r.screen_id);
        c.summaries.push_back(std::move(r));
    });

    detail::for_each_jsonl(root / "qa.jsonl", [&](const nlohmann::json& j, const std::string& where) {
        QaRecord r;
        r.screen_id = j.at("screen_id").get<std::string>();
        r.question = j.at("question").get<std::string>();
        r.answer = j.at("answer").get<std::string>();
        if (r.question.empty() || r.answer.empty()) {
            throw Error(ErrorKind::LayoutError, where + ": question and answer must be non-empty");
        }
        auto it = c.screens.find(r.screen_id);
        if (it == c.screens.end()) throw Error(ErrorKind::MissingScreen, where + ": " + r.screen_id);
        r.answer_in_hierarchy = j.contains("answer_in_hierarchy")
                                    ? j.at("answer_in_hierarchy").get<bool>()
                                    : detail::answer_on_screen(it->second.html, r.answer);
        c.qa.push_back(std::move(r));
    });

    detail::for_each_jsonl(root / "tasks.jsonl", [&](const nlohmann::json& j, const std::string& where) {
        InstructionTask t;
        t.task_id = j.at("task_id").get<std::string>();
        for (const auto& s : j.at("steps")) {
            t.steps.push_back({s.at("screen_id").get<std::string>(), s.at("instruction").get<std::string>(),
                               s.at("gold").get<std::int64_t>()});
        }
        if (t.steps.empty()) throw Error(ErrorKind::LayoutError, where + ": task '" + t.task_id + "' has no steps");
        for (std::size_t i = 0; i < t.steps.size(); ++i) {
            const auto& step = t.steps[i];
            auto it = c.screens.find(step.screen_id);
            if (it == c.screens.end()) {
                throw Error(ErrorKind::MissingScreen, where + ": task '" + t.task_id + "' references " + step.screen_id);
            }
            detail::require_index(it->second, step.gold_element_index,
                                  "task '" + t.task_id + "' step " + std::to_string(i));
        }
        t.app_package = j.value("app_package", std::string{});
        if (t.app_package.empty()) t.app_package = c.screens.at(t.steps.front().screen_id).source.app_package.value_or("");
        c.tasks.push_back(std::move(t));
    });

    detail::for_each_jsonl(root / "questions.jsonl", [&](const nlohmann::json& j, const std::string& where) {
        QuestionRecord r;
        r.screen_id = j.at("screen_id").get<std::string>();
        r.summary = j.at("summary").get<std::string>();
        r.page_label = j.at("page").get<std::string>();
        auto it = c.screens.find(r.screen_id);
        if (it == c.screens.end()) throw Error(ErrorKind::MissingScreen, where + ": " + r.screen_id);
        for (const auto& e : j.at("enumeration")) {
            r.enumeration.push_back({e.at("id").get<std::int64_t>(), e.at("purpose").get<std::string>()});
            detail::require_index(it->second, r.enumeration.back().index, where + " enumeration");
        }
        for (const auto& q : j.at("questions")) {
            r.questions.push_back({q.at("text").get<std::string>(), q.value("ids", std::vector<std::int64_t>{})});
            for (auto id : r.questions.back().element_indexes) detail::require_index(it->second, id, where + " question");
        }
        c.questions.push_back(std::move(r));
    });
    return c;
}

enum class SamplingMode { Any, InApp, CrossApp };

constexpr std::string_view mode_slug(SamplingMode m) noexcept {
    switch (m) {
    case SamplingMode::Any: return "any";
    case SamplingMode::InApp: return "in-app";
    case SamplingMode::CrossApp: return "cross-app";
    }
    return "any";
}

inline std::optional<SamplingMode> parse_mode(std::string_view s) noexcept {
    for (auto m : {SamplingMode::Any, SamplingMode::InApp, SamplingMode::CrossApp}) {
        if (mode_slug(m) == s) return m;
    }
    return std::nullopt;
}

/// One sampling candidate: an exemplar plus the package it came from.
struct Candidate {
    Exemplar exemplar;
    std::string app_package;
};

inline CotBlock make_cot(const Screen& screen, const QuestionRecord& r) {
    CotBlock cot;
    cot.input_field_count = static_cast<std::int64_t>(input_field_indexes(screen.html).size());
    cot.screen_summary = r.summary;
    cot.page_label = r.page_label;
    cot.enumeration = r.enumeration;
    cot.questions = r.questions;
    return cot;
}

/// Every record usable as an exemplar for `task`, in corpus file order, minus
/// anything on the excluded screen.
inline std::vector<Candidate> exemplar_candidates(const Corpus& corpus, TaskKind task,
                                                  const std::string& excluded_screen) {
    std::vector<Candidate> out;
    auto package_of = [&](const std::string& id) { return corpus.screen(id).source.app_package.value_or(""); };
    switch (task) {
    case TaskKind::Summarization:
        for (const auto& r : corpus.summaries) {
            if (r.screen_id == excluded_screen) continue;
            Exemplar ex{corpus.screen(r.screen_id).html, std::nullopt, std::nullopt, r.summaries.front()};
            out.push_back({std::move(ex), package_of(r.screen_id)});
        }
        break;
    case TaskKind::QuestionAnswering:
        for (const auto& r : corpus.qa) {
            if (r.screen_id == excluded_screen) continue;
            Exemplar ex{corpus.screen(r.screen_id).html, r.question, std::nullopt, r.answer};
            out.push_back({std::move(ex), package_of(r.screen_id)});
        }
        break;
    case TaskKind::InstructionToAction:
        for (const auto& t : corpus.tasks) {
            for (const auto& s : t.steps) {
                if (s.screen_id == excluded_screen) continue;
                Exemplar ex{corpus.screen(s.screen_id).html, s.instruction, std::nullopt,
                            std::to_string(s.gold_element_index)};
                out.push_back({std::move(ex), t.app_package});
            }
        }
        break;
    case TaskKind::QuestionGeneration:
        for (const auto& r : corpus.questions) {
            if (r.screen_id == excluded_screen) continue;
            const auto& screen = corpus.screen(r.screen_id);
            Exemplar ex{screen.html, std::nullopt, make_cot(screen, r), {}};
            out.push_back({std::move(ex), package_of(r.screen_id)});
        }
        break;
    }
    return out;
}

/// Deterministic exemplar sample for a test screen. InApp guarantees at least
/// one exemplar from the test screen's package; CrossApp forbids any. The
/// result keeps corpus order so a given subset always renders identically.
inline std::vector<Exemplar> sample_exemplars(const Corpus& corpus, TaskKind task, std::int64_t n, std::uint64_t seed,
                                              SamplingMode mode, const std::string& test_screen_id) {
    if (n <= 0) return {};
    const auto test_package = corpus.screen(test_screen_id).source.app_package.value_or("");
    auto candidates = exemplar_candidates(corpus, task, test_screen_id);

    std::vector<std::size_t> same, other;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const bool shared = !test_package.empty() && candidates[i].app_package == test_package;
        (shared ? same : other).push_back(i);
    }

    std::mt19937_64 rng(seed);
    // Portable partial Fisher-Yates: only raw engine output is used.
    auto draw = [&rng](std::vector<std::size_t>& pool, std::size_t k) {
        std::vector<std::size_t> picked;
        for (std::size_t i = 0; i < k; ++i) {
            const auto j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
            std::swap(pool[i], pool[j]);
            picked.push_back(pool[i]);
        }
        pool.erase(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
        return picked;
    };

    const auto need = static_cast<std::size_t>(n);
    std::vector<std::size_t> chosen;
    auto insufficient = [&](std::size_t have, const char* what) {
        return Error(ErrorKind::InsufficientExemplars, std::to_string(need) + " " + std::string(task_slug(task)) +
                                                           " exemplars requested, " + std::to_string(have) + " " +
                                                           what + " candidates for '" + test_screen_id + "'");
    };
    switch (mode) {
    case SamplingMode::Any: {
        std::vector<std::size_t> pool(candidates.size());
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
        if (pool.size() < need) throw insufficient(pool.size(), "total");
        chosen = draw(pool, need);
        break;
    }
    case SamplingMode::CrossApp:
        if (other.size() < need) throw insufficient(other.size(), "cross-app");
        chosen = draw(other, need);
        break;
    case SamplingMode::InApp: {
        if (same.empty()) throw insufficient(0, "in-app");
        if (same.size() + other.size() < need) throw insufficient(same.size() + other.size(), "total");
        chosen = draw(same, 1);
        std::vector<std::size_t> rest = same;
        rest.insert(rest.end(), other.begin(), other.end());
        std::sort(rest.begin(), rest.end());
        auto more = draw(rest, need - 1);
        chosen.insert(chosen.end(), more.begin(), more.end());
        break;
    }
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<Exemplar> out;
    out.reserve(chosen.size());
    for (auto i : chosen) out.push_back(std::move(candidates[i].exemplar));
    return out;
}

} // namespace screenchat

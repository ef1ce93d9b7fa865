#pragma once

// Extraction of structured results from raw model text. Every function here is
// total: malformed generations produce warnings, never exceptions, so an eval
// run always completes and scores bad outputs as wrong.

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "screenchat/task.hpp"

namespace screenchat {

struct TaggedSpans {
    std::vector<std::string> spans;
    std::vector<std::string> warnings;
};

struct CotParse {
    std::optional<std::int64_t> declared_count;
    std::optional<std::string> summary;
    std::vector<std::int64_t> enumerated_indexes; // deduplicated, first-occurrence order
    std::vector<std::string> warnings;
};

struct QuestionsOutput {
    std::vector<Question> questions;
};
struct SummaryOutput {
    std::string summary;
};
struct AnswerOutput {
    std::string answer;
};
struct ActionOutput {
    // Absent when no id could be recovered (NoActionFound); scored as wrong.
    std::optional<std::int64_t> element_index;
};

struct TaskOutput {
    std::variant<QuestionsOutput, SummaryOutput, AnswerOutput, ActionOutput> value;
    std::string raw_text;
    std::vector<std::string> warnings;
};

namespace detail {

inline bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
inline bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

inline std::optional<std::int64_t> to_int(std::string_view digits) noexcept {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
    return v;
}

// All non-negative integers following "id=" in `text`.
inline std::vector<std::int64_t> scrape_ids(std::string_view text, std::vector<std::string>& warnings) {
    std::vector<std::int64_t> out;
    std::size_t pos = 0;
    while ((pos = text.find("id=", pos)) != std::string_view::npos) {
        pos += 3;
        std::size_t end = pos;
        while (end < text.size() && is_digit(text[end])) ++end;
        if (end == pos) continue;
        if (auto v = to_int(text.substr(pos, end - pos))) {
            out.push_back(*v);
        } else {
            warnings.push_back("IdOverflow: id=" + std::string(text.substr(pos, end - pos)));
        }
        pos = end;
    }
    return out;
}

inline void push_unique(std::vector<std::int64_t>& v, std::int64_t x) {
    for (auto y : v) {
        if (y == x) return;
    }
    v.push_back(x);
}

} // namespace detail

/// Every span between an open tag and the next close tag, in order. A later
/// open tag inside a span is literal text; an unterminated final open tag runs
/// to end of text with an "Unterminated" warning.
inline TaggedSpans parse_tagged(std::string_view raw, std::string_view open_tag, std::string_view close_tag) {
    TaggedSpans out;
    if (open_tag.empty() || close_tag.empty()) {
        out.warnings.push_back("EmptyTag");
        return out;
    }
    std::size_t pos = 0;
    while ((pos = raw.find(open_tag, pos)) != std::string_view::npos) {
        const auto start = pos + open_tag.size();
        const auto close = raw.find(close_tag, start);
        if (close == std::string_view::npos) {
            out.spans.emplace_back(raw.substr(start));
            out.warnings.push_back("Unterminated: " + std::string(open_tag) + " at offset " + std::to_string(pos));
            break;
        }
        out.spans.emplace_back(raw.substr(start, close - start));
        pos = close + close_tag.size();
    }
    return out;
}

/// <SOQ>...<EOQ> spans, each split into question text and a trailing "(id=K, id=J)".
inline TaskOutput parse_questions(std::string_view raw) {
    auto tagged = parse_tagged(raw, "<SOQ>", "<EOQ>");
    QuestionsOutput qs;
    auto warnings = std::move(tagged.warnings);
    for (const auto& span : tagged.spans) {
        auto body = detail::trim(span);
        Question q;
        const auto open = body.rfind("(id=");
        if (open != std::string_view::npos && !body.empty() && body.back() == ')') {
            auto inside = body.substr(open + 1, body.size() - open - 2);
            bool ok = true;
            std::vector<std::int64_t> ids;
            while (!inside.empty()) {
                auto comma = inside.find(',');
                auto item = detail::trim(inside.substr(0, comma));
                if (item.substr(0, 3) != "id=") {
                    ok = false;
                    break;
                }
                auto v = detail::to_int(item.substr(3));
                if (!v || item.size() == 3) {
                    ok = false;
                    break;
                }
                ids.push_back(*v);
                if (comma == std::string_view::npos) break;
                inside.remove_prefix(comma + 1);
            }
            if (ok) {
                q.element_indexes = std::move(ids);
            } else {
                warnings.push_back("MalformedIds: " + std::string(body.substr(open)));
            }
            body = detail::trim(body.substr(0, open));
        } else if (body.find("(id=") != std::string_view::npos) {
            warnings.push_back("MalformedIds: unterminated id list in '" + std::string(body) + "'");
        }
        q.text = std::string(body);
        qs.questions.push_back(std::move(q));
    }
    if (tagged.spans.empty()) warnings.push_back("NoQuestions");
    return TaskOutput{std::move(qs), std::string(raw), std::move(warnings)};
}

/// Chain-of-thought fields from a question-generation continuation.
inline CotParse parse_cot(std::string_view raw) {
    CotParse out;
    static constexpr std::string_view purpose_q = "What is the purpose of the screen?";
    static constexpr std::string_view count_q = "How many input tags are there on the screen?";

    const auto purpose_at = raw.find(purpose_q);
    // Count: first "A: N" before the purpose question, or a bare leading integer
    // when the continuation starts right after the prompt's "A:".
    {
        auto head = raw.substr(0, purpose_at == std::string_view::npos ? 0 : purpose_at);
        if (auto cq = head.find(count_q); cq != std::string_view::npos) head.remove_prefix(cq + count_q.size());
        auto a = head.find("A:");
        auto digits_from = a == std::string_view::npos ? head : head.substr(a + 2);
        digits_from = detail::trim(digits_from);
        std::size_t n = 0;
        while (n < digits_from.size() && detail::is_digit(digits_from[n])) ++n;
        if (n > 0) out.declared_count = detail::to_int(digits_from.substr(0, n));
    }

    // Summary: first non-empty line after the purpose question's "A:", or the
    // first non-empty line of the continuation when the prompt cut there.
    {
        auto rest = raw;
        if (purpose_at != std::string_view::npos) {
            rest = raw.substr(purpose_at + purpose_q.size());
            auto t = detail::trim(rest);
            if (t.substr(0, 2) == "A:") {
                rest = rest.substr(rest.find("A:") + 2);
            }
        }
        while (!rest.empty()) {
            auto nl = rest.find('\n');
            auto line = detail::trim(rest.substr(0, nl));
            if (line.substr(0, 2) == "A:") line = detail::trim(line.substr(2));
            if (!line.empty()) {
                out.summary = std::string(line);
                break;
            }
            if (nl == std::string_view::npos) break;
            rest.remove_prefix(nl + 1);
        }
        if (!out.summary) out.warnings.push_back("NoSummary");
    }

    // Enumeration: between "including:" and "an agent will ask:".
    {
        static constexpr std::string_view from = "including:";
        static constexpr std::string_view to = "an agent will ask:";
        auto section = raw;
        const auto start = raw.find(from);
        const auto end = start == std::string_view::npos ? std::string_view::npos : raw.find(to, start);
        if (start != std::string_view::npos && end != std::string_view::npos) {
            section = raw.substr(start + from.size(), end - start - from.size());
        } else {
            out.warnings.push_back("MissingEnumerationMarkers: ids scraped from whole continuation");
        }
        for (auto id : detail::scrape_ids(section, out.warnings)) detail::push_unique(out.enumerated_indexes, id);
    }
    return out;
}

/// Predicted element id: first <SOI>..<EOI> span, else the first integer after
/// "id=", else a leading integer (the prompt already ends with "id=").
inline TaskOutput parse_action(std::string_view raw) {
    std::vector<std::string> warnings;
    ActionOutput action;
    auto tagged = parse_tagged(raw, "<SOI>", "<EOI>");
    if (!tagged.spans.empty()) {
        auto span = detail::trim(tagged.spans.front());
        if (!span.empty() && detail::is_digit(span.front())) {
            std::size_t n = 0;
            while (n < span.size() && detail::is_digit(span[n])) ++n;
            if (n == span.size()) action.element_index = detail::to_int(span);
        }
        if (!action.element_index) warnings.push_back("NonIntegerAction: '" + std::string(span) + "'");
        for (auto& w : tagged.warnings) warnings.push_back(std::move(w));
    }
    if (!action.element_index) {
        auto ids = detail::scrape_ids(raw, warnings);
        if (!ids.empty()) {
            action.element_index = ids.front();
            warnings.push_back("MissingTags: id recovered from id= text");
        }
    }
    if (!action.element_index) {
        auto t = detail::trim(raw);
        std::size_t n = 0;
        while (n < t.size() && detail::is_digit(t[n])) ++n;
        if (n > 0) {
            action.element_index = detail::to_int(t.substr(0, n));
            if (action.element_index) warnings.push_back("MissingTags: leading integer used");
        }
    }
    if (!action.element_index) warnings.push_back("NoActionFound");
    return TaskOutput{action, std::string(raw), std::move(warnings)};
}

namespace detail {

// First tagged span, else the first non-empty line.
inline std::string first_span_or_line(std::string_view raw, std::string_view open, std::string_view close,
                                      std::vector<std::string>& warnings) {
    auto tagged = parse_tagged(raw, open, close);
    for (auto& w : tagged.warnings) warnings.push_back(std::move(w));
    if (!tagged.spans.empty()) return std::string(trim(tagged.spans.front()));
    warnings.push_back("MissingTags: " + std::string(open) + " not found");
    auto rest = raw;
    while (!rest.empty()) {
        auto nl = rest.find('\n');
        auto line = trim(rest.substr(0, nl));
        if (!line.empty()) return std::string(line);
        if (nl == std::string_view::npos) break;
        rest.remove_prefix(nl + 1);
    }
    warnings.push_back("EmptyOutput");
    return {};
}

} // namespace detail

inline TaskOutput parse_summary(std::string_view raw) {
    std::vector<std::string> warnings;
    auto s = detail::first_span_or_line(raw, "<SOS>", "<EOS>", warnings);
    return TaskOutput{SummaryOutput{std::move(s)}, std::string(raw), std::move(warnings)};
}

inline TaskOutput parse_answer(std::string_view raw) {
    std::vector<std::string> warnings;
    auto a = detail::first_span_or_line(raw, "<SOA>", "<EOA>", warnings);
    return TaskOutput{AnswerOutput{std::move(a)}, std::string(raw), std::move(warnings)};
}

inline TaskOutput parse_output(TaskKind task, std::string_view raw) {
    switch (task) {
    case TaskKind::QuestionGeneration: return parse_questions(raw);
    case TaskKind::Summarization: return parse_summary(raw);
    case TaskKind::QuestionAnswering: return parse_answer(raw);
    case TaskKind::InstructionToAction: return parse_action(raw);
    }
    return parse_answer(raw);
}

} // namespace screenchat

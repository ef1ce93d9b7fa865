#pragma once

// Few-shot prompt assembly. The exact layout is frozen in docs/prompt-format.md
// and pinned by the golden files under fixtures/golden/prompts/.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "screenchat/error.hpp"
#include "screenchat/html.hpp"
#include "screenchat/task.hpp"

namespace screenchat {

struct EnumeratedField {
    std::int64_t index = 0;
    std::string purpose; // e.g. "asks for password."

    friend bool operator==(const EnumeratedField&, const EnumeratedField&) = default;
};

/// Chain-of-thought scaffold for question generation exemplars.
struct CotBlock {
    std::int64_t input_field_count = 0;
    std::string screen_summary;
    // Slot in "It's a {page_label} page and there are ...".
    std::string page_label;
    std::vector<EnumeratedField> enumeration;
    std::vector<Question> questions;
};

struct Exemplar {
    ScreenHtml screen;
    std::optional<std::string> task_input; // question (QA) or instruction (act)
    std::optional<CotBlock> chain_of_thought;
    // Untagged target: summary, answer, or element id in decimal. Unused for
    // question generation, whose target lives in the chain of thought.
    std::string output;
};

enum class OverflowPolicy { Fail, DropLastExemplar };

inline constexpr std::int64_t default_budget_tokens = 1920;

struct PromptSpec {
    TaskKind task = TaskKind::Summarization;
    std::vector<Exemplar> exemplars;
    std::int64_t budget_tokens = default_budget_tokens;
    OverflowPolicy on_overflow = OverflowPolicy::DropLastExemplar;

    std::int64_t shots() const noexcept { return static_cast<std::int64_t>(exemplars.size()); }
};

struct Prompt {
    std::string text;
    std::int64_t approx_tokens = 0;
    std::int64_t shots_used = 0;
};

inline std::vector<std::int64_t> input_field_indexes(const ScreenHtml& screen) {
    std::vector<std::int64_t> out;
    for (const auto& el : screen.elements) {
        if (el.tag == Tag::Input) out.push_back(el.index);
    }
    return out;
}

inline std::string_view preamble(TaskKind task) noexcept {
    switch (task) {
    case TaskKind::QuestionGeneration:
        return "Given a screen, the agent needs to identify the elements requiring user input and generates "
               "corresponding questions.";
    case TaskKind::Summarization: return "Given a screen, summarize its purpose.";
    case TaskKind::QuestionAnswering:
        return "Given a mobile screen and a question, provide the answer based on the screen information.";
    case TaskKind::InstructionToAction:
        return "Given a screen, an instruction, predict the id of the UI element to perform the instruction.";
    }
    return "";
}

/// "(id=4, id=6, id=8)"; empty string for no ids.
inline std::string render_id_list(const std::vector<std::int64_t>& ids) {
    if (ids.empty()) return {};
    std::string out = "(";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ", ";
        out += "id=" + std::to_string(ids[i]);
    }
    out += ")";
    return out;
}

inline std::string render_questions(const std::vector<Question>& questions) {
    std::string out;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        if (i) out += "\n";
        out += "<SOQ>" + questions[i].text;
        if (!questions[i].element_indexes.empty()) out += " " + render_id_list(questions[i].element_indexes);
        out += "<EOQ>";
    }
    return out;
}

namespace detail {

inline constexpr std::string_view cot_opening =
    "Now reasoning starts:\nQ: How many input tags are there on the screen?\nA: ";
inline constexpr std::string_view cot_purpose_question = "\nQ: What is the purpose of the screen?\nA:";

} // namespace detail

inline std::string render_cot(const CotBlock& cot) {
    std::string out(detail::cot_opening);
    out += std::to_string(cot.input_field_count);
    out += detail::cot_purpose_question;
    out += " " + cot.screen_summary + "\n\n";
    out += "It's a " + cot.page_label + " page and there are " + std::to_string(cot.input_field_count) +
           " input tags, including:\n";
    for (std::size_t i = 0; i < cot.enumeration.size(); ++i) {
        out += std::to_string(i + 1) + ". id=" + std::to_string(cot.enumeration[i].index) + " " +
               cot.enumeration[i].purpose + "\n";
    }
    out += "\nTo help the user proceed with the screen, an agent will ask:\n";
    out += render_questions(cot.questions);
    return out;
}

namespace detail {

inline std::string screen_block(const ScreenHtml& screen) {
    return "Screen:\n" + screen.html_text + "\n\n";
}

inline void require_input(TaskKind task, const std::optional<std::string>& input, std::string_view where) {
    if (task_needs_input(task) && !input) {
        throw Error(ErrorKind::MissingTaskInput,
                    std::string(task == TaskKind::QuestionAnswering ? "question" : "instruction") +
                        " required for " + std::string(where));
    }
}

inline std::string exemplar_block(TaskKind task, const Exemplar& ex) {
    require_input(task, ex.task_input, "exemplar on screen '" + ex.screen.screen_id + "'");
    std::string out = screen_block(ex.screen);
    switch (task) {
    case TaskKind::QuestionGeneration:
        if (!ex.chain_of_thought) {
            throw Error(ErrorKind::MissingTaskInput,
                        "question generation exemplar on '" + ex.screen.screen_id + "' lacks a chain of thought");
        }
        out += render_cot(*ex.chain_of_thought);
        break;
    case TaskKind::Summarization: out += "Summary: <SOS>" + ex.output + "<EOS>"; break;
    case TaskKind::QuestionAnswering: out += "Q: " + *ex.task_input + "\nA: <SOA>" + ex.output + "<EOA>"; break;
    case TaskKind::InstructionToAction:
        out += "Instruction: " + *ex.task_input + "\nPrediction: id=<SOI>" + ex.output + "<EOI>";
        break;
    }
    return out;
}

inline std::string test_block(TaskKind task, const ScreenHtml& screen, const std::optional<std::string>& input) {
    require_input(task, input, "the test screen");
    std::string out = screen_block(screen);
    switch (task) {
    case TaskKind::QuestionGeneration:
        out += cot_opening;
        out += std::to_string(input_field_indexes(screen).size());
        out += cot_purpose_question;
        break;
    case TaskKind::Summarization: out += "Summary:"; break;
    case TaskKind::QuestionAnswering: out += "Q: " + *input + "\nA:"; break;
    case TaskKind::InstructionToAction: out += "Instruction: " + *input + "\nPrediction: id="; break;
    }
    return out;
}

inline std::string assemble(TaskKind task, const std::vector<std::string>& blocks, std::size_t shots,
                            const std::string& test) {
    std::string text(preamble(task));
    text += "\n\n";
    for (std::size_t i = 0; i < shots; ++i) text += blocks[i] + "\n\n";
    text += test;
    return text;
}

} // namespace detail

/// Preamble, exemplars, then the test screen cut at the generation point.
/// Over budget: Fail throws BudgetExceeded; DropLastExemplar removes
/// exemplars from the end and throws only if even zero shots do not fit.
inline Prompt build_prompt(const PromptSpec& spec, const ScreenHtml& test_screen,
                           const std::optional<std::string>& test_input = std::nullopt) {
    std::vector<std::string> blocks;
    blocks.reserve(spec.exemplars.size());
    for (const auto& ex : spec.exemplars) blocks.push_back(detail::exemplar_block(spec.task, ex));
    const auto test = detail::test_block(spec.task, test_screen, test_input);

    for (std::size_t shots = blocks.size();; --shots) {
        Prompt p;
        p.text = detail::assemble(spec.task, blocks, shots, test);
        p.approx_tokens = approx_token_count(p.text);
        p.shots_used = static_cast<std::int64_t>(shots);
        if (p.approx_tokens <= spec.budget_tokens) return p;
        if (spec.on_overflow == OverflowPolicy::Fail || shots == 0) {
            throw Error(ErrorKind::BudgetExceeded, "prompt needs ~" + std::to_string(p.approx_tokens) +
                                                       " tokens at " + std::to_string(shots) +
                                                       " shots; budget is " + std::to_string(spec.budget_tokens));
        }
    }
}

/// Rule-based baseline: "What is {resource words}?" for every input field.
inline std::vector<std::pair<std::string, std::int64_t>> template_baseline_questions(const ScreenHtml& screen) {
    std::vector<std::pair<std::string, std::int64_t>> out;
    for (const auto& el : screen.elements) {
        if (el.tag != Tag::Input) continue;
        out.emplace_back(el.class_words ? "What is " + *el.class_words + "?" : std::string("What is this field?"),
                         el.index);
    }
    return out;
}

} // namespace screenchat

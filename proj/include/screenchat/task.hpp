#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace screenchat {

enum class TaskKind { QuestionGeneration, Summarization, QuestionAnswering, InstructionToAction };

inline constexpr std::array<TaskKind, 4> all_tasks{TaskKind::QuestionGeneration, TaskKind::Summarization,
                                                   TaskKind::QuestionAnswering, TaskKind::InstructionToAction};

/// Short names used by the CLI, the HTTP routes and golden file names.
constexpr std::string_view task_slug(TaskKind task) noexcept {
    switch (task) {
    case TaskKind::QuestionGeneration: return "generate-questions";
    case TaskKind::Summarization: return "summarize";
    case TaskKind::QuestionAnswering: return "qa";
    case TaskKind::InstructionToAction: return "act";
    }
    return "";
}

inline std::optional<TaskKind> parse_task(std::string_view slug) noexcept {
    for (auto t : all_tasks) {
        if (task_slug(t) == slug) return t;
    }
    return std::nullopt;
}

constexpr bool task_needs_input(TaskKind task) noexcept {
    return task == TaskKind::QuestionAnswering || task == TaskKind::InstructionToAction;
}

struct Delimiters {
    std::string_view open;
    std::string_view close;
};

constexpr Delimiters task_delimiters(TaskKind task) noexcept {
    switch (task) {
    case TaskKind::QuestionGeneration: return {"<SOQ>", "<EOQ>"};
    case TaskKind::Summarization: return {"<SOS>", "<EOS>"};
    case TaskKind::QuestionAnswering: return {"<SOA>", "<EOA>"};
    case TaskKind::InstructionToAction: return {"<SOI>", "<EOI>"};
    }
    return {"", ""};
}

/// A generated (or exemplar) question plus the element ids it asks about.
struct Question {
    std::string text;
    std::vector<std::int64_t> element_indexes;

    friend bool operator==(const Question&, const Question&) = default;
};

} // namespace screenchat

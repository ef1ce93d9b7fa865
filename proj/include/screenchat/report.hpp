#pragma once

#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "screenchat/metrics.hpp"
#include "screenchat/task.hpp"

namespace screenchat {

struct QaScores {
    double exact_rate = 0.0;
    double contains_rate = 0.0;
    double substring_rate = 0.0;
    double micro_f1 = 0.0;
};

struct SummaryScores {
    std::map<int, double> bleu; // n -> BLEU-n
    double rouge_l = 0.0;
};

/// Aggregate scores of one run. Rates are fractions in [0,1]; the action
/// scores are already percentages. CIDEr and METEOR are not computed and never
/// appear.
struct MetricsReport {
    TaskKind task = TaskKind::QuestionAnswering;
    std::int64_t n_items = 0;
    std::optional<PrecisionRecall> coverage;
    std::optional<QaScores> qa;
    std::optional<ActionScores> action;
    std::optional<SummaryScores> summarization;
    std::int64_t warnings_total = 0;
};

inline nlohmann::ordered_json to_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["task"] = std::string(task_slug(r.task));
    j["n_items"] = r.n_items;
    if (r.coverage) {
        j["coverage"] = {{"precision", r.coverage->precision}, {"recall", r.coverage->recall}, {"f1", r.coverage->f1}};
    }
    if (r.qa) {
        j["qa"] = {{"exact_rate", r.qa->exact_rate},
                   {"contains_rate", r.qa->contains_rate},
                   {"substring_rate", r.qa->substring_rate},
                   {"micro_f1", r.qa->micro_f1}};
    }
    if (r.action) j["action"] = {{"partial_pct", r.action->partial_pct}, {"complete_pct", r.action->complete_pct}};
    if (r.summarization) {
        nlohmann::ordered_json bleu;
        for (const auto& [n, v] : r.summarization->bleu) bleu[std::to_string(n)] = v;
        j["summarization"] = {{"bleu", bleu}, {"rouge_l", r.summarization->rouge_l}};
    }
    j["warnings_total"] = r.warnings_total;
    return j;
}

namespace detail {

inline std::string pct(double fraction) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << fraction * 100.0;
    return s.str();
}

inline std::string render_table(const std::vector<std::string>& header, const std::vector<std::string>& row) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = std::max(header[i].size(), row[i].size());
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << "  ";
            if (i == 0) {
                out << std::left << std::setw(static_cast<int>(width[i])) << cells[i];
            } else {
                out << std::right << std::setw(static_cast<int>(width[i])) << cells[i];
            }
        }
        out << '\n';
    };
    line(header);
    std::vector<std::string> rule;
    for (auto w : width) rule.emplace_back(w, '-');
    line(rule);
    line(row);
    return out.str();
}

} // namespace detail

/// Column headers per task, in the row shape of the published result tables.
inline std::vector<std::string> table_columns(TaskKind task) {
    switch (task) {
    case TaskKind::QuestionGeneration: return {"Method", "Precision", "Recall", "Coverage F1"};
    case TaskKind::Summarization: return {"Model", "BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4", "ROUGE-L"};
    case TaskKind::QuestionAnswering: return {"Model", "Exact Matches", "Contains GT", "Sub-String of GT", "Micro-F1"};
    case TaskKind::InstructionToAction: return {"Model", "Partial", "Complete"};
    }
    return {};
}

/// Aligned plain-text table: one header, a rule, and one row labelled `model`.
inline std::string render_text_report(const MetricsReport& r, const std::string& model) {
    std::vector<std::string> row{model};
    switch (r.task) {
    case TaskKind::QuestionGeneration: {
        const auto c = r.coverage.value_or(PrecisionRecall{});
        row.insert(row.end(), {detail::pct(c.precision), detail::pct(c.recall), detail::pct(c.f1)});
        break;
    }
    case TaskKind::Summarization: {
        const auto s = r.summarization.value_or(SummaryScores{});
        for (int n = 1; n <= 4; ++n) {
            auto it = s.bleu.find(n);
            row.push_back(detail::pct(it == s.bleu.end() ? 0.0 : it->second));
        }
        row.push_back(detail::pct(s.rouge_l));
        break;
    }
    case TaskKind::QuestionAnswering: {
        const auto q = r.qa.value_or(QaScores{});
        row.insert(row.end(), {detail::pct(q.exact_rate), detail::pct(q.contains_rate), detail::pct(q.substring_rate),
                               detail::pct(q.micro_f1)});
        break;
    }
    case TaskKind::InstructionToAction: {
        const auto a = r.action.value_or(ActionScores{});
        row.insert(row.end(), {detail::pct(a.partial_pct / 100.0), detail::pct(a.complete_pct / 100.0)});
        break;
    }
    }
    std::ostringstream out;
    out << "task: " << task_slug(r.task) << "  items: " << r.n_items << "  warnings: " << r.warnings_total << "\n\n";
    out << detail::render_table(table_columns(r.task), row);
    return out.str();
}

} // namespace screenchat

#pragma once

// Automatic metrics: coverage P/R/F1, QA answer categories and micro-F1,
// partial/complete action match, corpus BLEU-n and ROUGE-L.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "screenchat/error.hpp"

namespace screenchat {

struct NormalizedText {
    std::vector<std::string> tokens;
    std::string joined;
};

namespace detail {

inline bool is_ascii_punct(char c) noexcept {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u);
}

inline std::string strip_punct_edges(std::string token) {
    std::size_t b = 0, e = token.size();
    while (b < e && is_ascii_punct(token[b])) ++b;
    while (e > b && is_ascii_punct(token[e - 1])) --e;
    return token.substr(b, e - b);
}

} // namespace detail

/// NFC, lowercase, split on whitespace, strip ASCII punctuation at token edges,
/// drop empty tokens. Inner punctuation ("2.7.3") is kept.
inline NormalizedText normalize(std::string_view s) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    icu::UnicodeString text = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    if (U_SUCCESS(status)) {
        icu::UnicodeString composed = nfc->normalize(text, status);
        if (U_SUCCESS(status)) text = composed;
    }
    text.toLower(icu::Locale::getRoot());

    NormalizedText out;
    icu::UnicodeString current;
    auto flush = [&] {
        if (current.isEmpty()) return;
        std::string utf8;
        current.toUTF8String(utf8);
        current.remove();
        auto token = detail::strip_punct_edges(std::move(utf8));
        if (!token.empty()) out.tokens.push_back(std::move(token));
    };
    for (int32_t i = 0; i < text.length();) {
        const UChar32 cp = text.char32At(i);
        if (u_isUWhiteSpace(cp)) {
            flush();
        } else {
            current.append(cp);
        }
        i += U16_LENGTH(cp);
    }
    flush();
    for (std::size_t i = 0; i < out.tokens.size(); ++i) {
        if (i) out.joined.push_back(' ');
        out.joined += out.tokens[i];
    }
    return out;
}

enum class AnswerMatch { ExactMatch, ContainsGT, SubStringOfGT, NoMatch };

constexpr std::string_view to_string(AnswerMatch m) noexcept {
    switch (m) {
    case AnswerMatch::ExactMatch: return "ExactMatch";
    case AnswerMatch::ContainsGT: return "ContainsGT";
    case AnswerMatch::SubStringOfGT: return "SubStringOfGT";
    case AnswerMatch::NoMatch: return "NoMatch";
    }
    return "NoMatch";
}

/// Mutually exclusive categories over the normalized joined strings.
inline AnswerMatch classify_answer(std::string_view pred, std::string_view gt) {
    const auto p = normalize(pred).joined;
    const auto g = normalize(gt).joined;
    if (p == g) return AnswerMatch::ExactMatch;
    if (!g.empty() && p.size() > g.size() && p.find(g) != std::string::npos) return AnswerMatch::ContainsGT;
    if (!p.empty() && p.size() < g.size() && g.find(p) != std::string::npos) return AnswerMatch::SubStringOfGT;
    return AnswerMatch::NoMatch;
}

inline double harmonic_f1(double precision, double recall) noexcept {
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Token-overlap F1 pooled across all pairs (multiset intersection per pair).
inline double micro_f1(const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::int64_t overlap = 0, pred_total = 0, gt_total = 0;
    for (const auto& [pred, gt] : pairs) {
        const auto p = normalize(pred).tokens;
        const auto g = normalize(gt).tokens;
        std::unordered_map<std::string, std::int64_t> counts;
        for (const auto& t : g) ++counts[t];
        for (const auto& t : p) {
            auto it = counts.find(t);
            if (it != counts.end() && it->second > 0) {
                --it->second;
                ++overlap;
            }
        }
        pred_total += static_cast<std::int64_t>(p.size());
        gt_total += static_cast<std::int64_t>(g.size());
    }
    const double precision = pred_total ? static_cast<double>(overlap) / static_cast<double>(pred_total) : 0.0;
    const double recall = gt_total ? static_cast<double>(overlap) / static_cast<double>(gt_total) : 0.0;
    return harmonic_f1(precision, recall);
}

/// Set precision/recall/F1 of predicted input-field ids. Both empty counts as perfect.
inline PrecisionRecall coverage_f1(const std::set<std::int64_t>& gt, const std::set<std::int64_t>& predicted) {
    if (gt.empty() && predicted.empty()) return {1.0, 1.0, 1.0};
    std::int64_t tp = 0;
    for (auto x : predicted) tp += gt.count(x) ? 1 : 0;
    PrecisionRecall r;
    r.precision = predicted.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted.size());
    r.recall = gt.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(gt.size());
    r.f1 = harmonic_f1(r.precision, r.recall);
    return r;
}

/// F1 from already-aggregated precision and recall.
inline PrecisionRecall coverage_from(double precision, double recall) noexcept {
    return {precision, recall, harmonic_f1(precision, recall)};
}

struct ActionStep {
    std::int64_t gold_index = 0;
    std::optional<std::int64_t> predicted_index; // absent = NoActionFound

    bool correct() const noexcept { return predicted_index && *predicted_index == gold_index; }
};

struct ActionScores {
    double partial_pct = 0.0;
    double complete_pct = 0.0;
};

/// Partial: percentage of correct steps over all steps. Complete: percentage of
/// tasks whose every step is correct.
inline ActionScores action_match(const std::vector<std::vector<ActionStep>>& tasks) {
    if (tasks.empty()) throw Error(ErrorKind::EmptyTaskList, "action_match needs at least one task");
    std::int64_t steps = 0, correct = 0, complete = 0;
    for (const auto& task : tasks) {
        if (task.empty()) throw Error(ErrorKind::EmptyTaskList, "task with no steps");
        bool all = true;
        for (const auto& s : task) {
            ++steps;
            if (s.correct()) {
                ++correct;
            } else {
                all = false;
            }
        }
        complete += all ? 1 : 0;
    }
    return {100.0 * static_cast<double>(correct) / static_cast<double>(steps),
            100.0 * static_cast<double>(complete) / static_cast<double>(tasks.size())};
}

namespace detail {

inline std::map<std::vector<std::string>, std::int64_t> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
    std::map<std::vector<std::string>, std::int64_t> out;
    if (toks.size() < n) return out;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        ++out[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                       toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return out;
}

} // namespace detail

/// Corpus BLEU-n for n = 1..max_n: clipped n-gram precision against all
/// references, uniform geometric mean, brevity penalty with closest reference
/// length (ties go to the shorter reference).
inline std::map<int, double> bleu(const std::vector<std::string>& candidates,
                                  const std::vector<std::vector<std::string>>& references, int max_n = 4) {
    if (candidates.size() != references.size()) {
        throw Error(ErrorKind::LengthMismatch, std::to_string(candidates.size()) + " candidates vs " +
                                                   std::to_string(references.size()) + " reference sets");
    }
    max_n = std::clamp(max_n, 1, 4);
    std::vector<std::int64_t> matched(static_cast<std::size_t>(max_n), 0), total(static_cast<std::size_t>(max_n), 0);
    std::int64_t cand_len = 0, ref_len = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto cand = normalize(candidates[i]).tokens;
        std::vector<std::vector<std::string>> refs;
        for (const auto& r : references[i]) refs.push_back(normalize(r).tokens);
        const auto c = static_cast<std::int64_t>(cand.size());
        cand_len += c;
        if (!refs.empty()) {
            std::int64_t best = static_cast<std::int64_t>(refs.front().size());
            for (const auto& r : refs) {
                const auto len = static_cast<std::int64_t>(r.size());
                const auto d = std::llabs(len - c), bd = std::llabs(best - c);
                if (d < bd || (d == bd && len < best)) best = len;
            }
            ref_len += best;
        }
        for (int n = 1; n <= max_n; ++n) {
            const auto cc = detail::ngram_counts(cand, static_cast<std::size_t>(n));
            std::map<std::vector<std::string>, std::int64_t> max_ref;
            for (const auto& r : refs) {
                for (const auto& [g, k] : detail::ngram_counts(r, static_cast<std::size_t>(n))) {
                    auto& m = max_ref[g];
                    m = std::max(m, k);
                }
            }
            for (const auto& [g, k] : cc) {
                auto it = max_ref.find(g);
                matched[static_cast<std::size_t>(n - 1)] += it == max_ref.end() ? 0 : std::min(k, it->second);
                total[static_cast<std::size_t>(n - 1)] += k;
            }
        }
    }
    double bp = 1.0;
    if (cand_len == 0) {
        bp = 0.0;
    } else if (cand_len < ref_len) {
        bp = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
    }
    std::map<int, double> out;
    double log_sum = 0.0;
    bool zero = bp == 0.0;
    for (int n = 1; n <= max_n; ++n) {
        const auto idx = static_cast<std::size_t>(n - 1);
        if (total[idx] == 0 || matched[idx] == 0) zero = true;
        if (!zero) log_sum += std::log(static_cast<double>(matched[idx]) / static_cast<double>(total[idx]));
        out[n] = zero ? 0.0 : bp * std::exp(log_sum / n);
    }
    return out;
}

inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline constexpr double rouge_beta = 1.2;

inline double rouge_l_pair(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                           double beta = rouge_beta) {
    if (cand.empty() || ref.empty()) return 0.0;
    const double lcs = static_cast<double>(lcs_length(cand, ref));
    const double r = lcs / static_cast<double>(ref.size());
    const double p = lcs / static_cast<double>(cand.size());
    const double b2 = beta * beta;
    // Weighted F with beta^2 on recall in the denominator: cand "a b c d" vs
    // ref "a c d" (R=1, P=0.75) scores 1.83/2.19 = 0.8356.
    const double denom = p + b2 * r;
    return denom == 0.0 ? 0.0 : (1.0 + b2) * r * p / denom;
}

/// Mean over candidates of the best LCS F-measure against that candidate's references.
inline double rouge_l(const std::vector<std::string>& candidates, const std::vector<std::vector<std::string>>& references,
                      double beta = rouge_beta) {
    if (candidates.size() != references.size()) {
        throw Error(ErrorKind::LengthMismatch, std::to_string(candidates.size()) + " candidates vs " +
                                                   std::to_string(references.size()) + " reference sets");
    }
    if (candidates.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto cand = normalize(candidates[i]).tokens;
        double best = 0.0;
        for (const auto& r : references[i]) best = std::max(best, rouge_l_pair(cand, normalize(r).tokens, beta));
        sum += best;
    }
    return sum / static_cast<double>(candidates.size());
}

} // namespace screenchat

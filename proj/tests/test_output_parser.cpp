#include <gtest/gtest.h>

#include <random>

#include "screenchat/output_parser.hpp"
#include "screenchat/prompt.hpp"

using namespace screenchat;

namespace {

bool has_warning(const std::vector<std::string>& warnings, std::string_view prefix) {
    for (const auto& w : warnings) {
        if (w.rfind(prefix, 0) == 0) return true;
    }
    return false;
}

const std::vector<Question>& questions_of(const TaskOutput& out) { return std::get<QuestionsOutput>(out.value).questions; }

} // namespace

TEST(ParseTagged, TwoSpans) {
    auto t = parse_tagged("<SOQ>What is your SSN? (id=4, id=6, id=8)<EOQ> \n<SOQ>What is the refund amount? (id=10)<EOQ>",
                          "<SOQ>", "<EOQ>");
    EXPECT_EQ(t.spans, (std::vector<std::string>{"What is your SSN? (id=4, id=6, id=8)", "What is the refund amount? (id=10)"}));
    EXPECT_TRUE(t.warnings.empty());
}

TEST(ParseTagged, EmptyAndUnterminated) {
    EXPECT_TRUE(parse_tagged("", "<SOA>", "<EOA>").spans.empty());
    auto t = parse_tagged("<SOA>42", "<SOA>", "<EOA>");
    EXPECT_EQ(t.spans, std::vector<std::string>{"42"});
    EXPECT_TRUE(has_warning(t.warnings, "Unterminated"));
}

TEST(ParseTagged, NestedOpenIsLiteral) {
    auto t = parse_tagged("<SOA>a<SOA>b<EOA>c<EOA>", "<SOA>", "<EOA>");
    EXPECT_EQ(t.spans, std::vector<std::string>{"a<SOA>b"});
}

TEST(ParseTagged, ConcatenatedSpansCountProperty) {
    std::mt19937_64 rng(21);
    const std::string alphabet = "ab <>SOQE\n(=)";
    for (int trial = 0; trial < 500; ++trial) {
        const auto k = rng() % 6;
        std::string raw;
        std::vector<std::string> expected;
        for (std::uint64_t i = 0; i < k; ++i) {
            std::string body;
            for (auto n = rng() % 10; n > 0; --n) body.push_back(alphabet[rng() % alphabet.size()]);
            if (body.find("<SOQ>") != std::string::npos || body.find("<EOQ>") != std::string::npos) body = "x";
            expected.push_back(body);
            raw += (rng() % 2 ? " \n" : "") + std::string("<SOQ>") + body + "<EOQ>";
        }
        EXPECT_EQ(parse_tagged(raw, "<SOQ>", "<EOQ>").spans, expected) << raw;
    }
}

TEST(ParseQuestions, IdsAndFallbacks) {
    auto out = parse_questions("<SOQ>What is the price range? (id=3, id=4)<EOQ>");
    ASSERT_EQ(questions_of(out).size(), 1u);
    EXPECT_EQ(questions_of(out)[0].text, "What is the price range?");
    EXPECT_EQ(questions_of(out)[0].element_indexes, (std::vector<std::int64_t>{3, 4}));

    auto plain = parse_questions("<SOQ>Where to?<EOQ>");
    EXPECT_EQ(questions_of(plain)[0].text, "Where to?");
    EXPECT_TRUE(questions_of(plain)[0].element_indexes.empty());

    auto bad = parse_questions("<SOQ>Which one? (id=abc)<EOQ>");
    EXPECT_TRUE(questions_of(bad)[0].element_indexes.empty());
    EXPECT_FALSE(bad.warnings.empty());

    EXPECT_TRUE(has_warning(parse_questions("nothing here").warnings, "NoQuestions"));
}

TEST(ParseQuestions, InvertsRendering) {
    std::vector<Question> qs{{"What password do you want to create?", {2}},
                             {"What is your SSN?", {4, 6, 8}},
                             {"Anything else?", {}}};
    auto out = parse_questions(render_questions(qs));
    EXPECT_EQ(questions_of(out), qs);
}

TEST(ParseCot, RefundContinuation) {
    const std::string raw = " Check your refund status.\n\n"
                            "It's a check refund status page and there are 4 input tags, including:\n"
                            "1. id=4 asks for first 3 digits of SSN\n"
                            "2. id=6 asks for middle 2 digits of SSN\n"
                            "3. id=8 asks for last 4 digits of SSN\n"
                            "4. id=10 asks for the amount of refund.\n\n"
                            "To help the user proceed with the screen, an agent will ask:\n"
                            "<SOQ>What is your SSN? (id=4, id=6, id=8)<EOQ>\n"
                            "<SOQ>What is the refund amount? (id=10)<EOQ>";
    auto c = parse_cot(raw);
    EXPECT_EQ(c.enumerated_indexes, (std::vector<std::int64_t>{4, 6, 8, 10}));
    EXPECT_EQ(c.summary, "Check your refund status.");
    EXPECT_FALSE(c.declared_count);
    EXPECT_TRUE(c.warnings.empty());
}

TEST(ParseCot, FullBlockWithCount) {
    CotBlock cot{4, "Create password.", "create password",
                 {{2, "asks for password."}, {3, "asks to confirm password."}},
                 {{"What password do you want to create?", {2}}}};
    auto c = parse_cot(render_cot(cot));
    EXPECT_EQ(c.declared_count, 4);
    EXPECT_EQ(c.summary, "Create password.");
    EXPECT_EQ(c.enumerated_indexes, (std::vector<std::int64_t>{2, 3}));
}

TEST(ParseCot, MissingMarkersScrapeGloballyAndDedup) {
    auto c = parse_cot("fields id=4 and id=7, again id=4");
    EXPECT_EQ(c.enumerated_indexes, (std::vector<std::int64_t>{4, 7}));
    EXPECT_FALSE(c.warnings.empty());

    auto d = parse_cot("including:\n1. id=4 x\n2. id=4 y\nan agent will ask:\n<SOQ>q (id=9)<EOQ>");
    EXPECT_EQ(d.enumerated_indexes, std::vector<std::int64_t>{4});
}

TEST(ParseAction, Forms) {
    auto idx = [](std::string_view raw) { return std::get<ActionOutput>(parse_action(raw).value).element_index; };
    EXPECT_EQ(idx("id=<SOI>29<EOI>"), 29);
    EXPECT_EQ(idx("<SOI>29<EOI>"), 29);
    EXPECT_EQ(idx("29<EOI>"), 29);
    auto fallback = parse_action("id=7 because it is the clock");
    EXPECT_EQ(std::get<ActionOutput>(fallback.value).element_index, 7);
    EXPECT_FALSE(fallback.warnings.empty());
    auto none = parse_action("I cannot tell");
    EXPECT_FALSE(std::get<ActionOutput>(none.value).element_index);
    EXPECT_TRUE(has_warning(none.warnings, "NoActionFound"));
    const auto overflow = idx("<SOI>99999999999999999999999<EOI>");
    EXPECT_TRUE(!overflow || *overflow >= 0);
}

TEST(ParseSummaryAndAnswer, TagsOrFirstLine) {
    EXPECT_EQ(std::get<SummaryOutput>(parse_summary(" <SOS>Screen of contact settings options<EOS>").value).summary,
              "Screen of contact settings options");
    auto untagged = parse_summary("\n  A login page\nmore");
    EXPECT_EQ(std::get<SummaryOutput>(untagged.value).summary, "A login page");
    EXPECT_TRUE(has_warning(untagged.warnings, "MissingTags"));
    EXPECT_EQ(std::get<AnswerOutput>(parse_answer(" <SOA>appcrawler5@gmail.com<EOA>").value).answer,
              "appcrawler5@gmail.com");
}

TEST(ParseOutput, DispatchesByTaskAndKeepsRaw) {
    auto out = parse_output(TaskKind::QuestionAnswering, " <SOA>x<EOA>");
    EXPECT_TRUE(std::holds_alternative<AnswerOutput>(out.value));
    EXPECT_EQ(out.raw_text, " <SOA>x<EOA>");
    EXPECT_TRUE(std::holds_alternative<ActionOutput>(parse_output(TaskKind::InstructionToAction, "").value));
    EXPECT_TRUE(std::holds_alternative<QuestionsOutput>(parse_output(TaskKind::QuestionGeneration, "").value));
    EXPECT_TRUE(std::holds_alternative<SummaryOutput>(parse_output(TaskKind::Summarization, "").value));
}

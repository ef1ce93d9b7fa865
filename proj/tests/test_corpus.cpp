#include <gtest/gtest.h>

#include <functional>

#include "screenchat/corpus.hpp"
#include "test_support.hpp"

using namespace screenchat;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no screenchat::Error thrown";
    return ErrorKind::ConfigError;
}

const Corpus& corpus50() {
    static const Corpus c = load_corpus(support::fixtures_dir() / "corpus50");
    return c;
}

// A minimal corpus with one screen of three leaves under the given package.
void write_tiny_corpus(const support::TempDir& dir) {
    support::write_file(dir / "screens/one.json", R"({"activity_name": "com.tiny/.Main", "activity": {"root":
        {"class": "android.widget.FrameLayout", "bounds": [0, 0, 100, 100], "children": [
          {"class": "android.widget.TextView", "text": "Hello", "bounds": [0, 0, 100, 30]},
          {"class": "android.widget.EditText", "bounds": [0, 30, 100, 60]},
          {"class": "android.widget.Button", "text": "Go", "bounds": [0, 60, 100, 90]}]}}})");
}

std::string screen_of(const Exemplar& ex) { return ex.screen.screen_id; }

} // namespace

TEST(LoadCorpus, FixtureCounts) {
    const auto& c = corpus50();
    EXPECT_EQ(c.screens.size(), 50u);
    EXPECT_EQ(c.summaries.size(), 50u);
    EXPECT_EQ(c.qa.size(), 43u);
    EXPECT_EQ(c.questions.size(), 24u);
    EXPECT_EQ(c.tasks.size(), 10u);
    EXPECT_EQ(c.screens.begin()->first, "bloom_00");
    EXPECT_EQ(c.tasks[0].app_package, "com.bloom.weather");

    const auto showcase = load_corpus(support::fixtures_dir() / "showcase");
    EXPECT_EQ(showcase.screens.size(), 6u);
    ASSERT_EQ(showcase.tasks.size(), 1u);
    EXPECT_EQ(showcase.tasks[0].steps[0].gold_element_index, 29);
}

TEST(LoadCorpus, ReloadIsEqual) {
    EXPECT_EQ(load_corpus(support::fixtures_dir() / "corpus50"), corpus50());
}

TEST(LoadCorpus, AnswerInHierarchyComputedWhenAbsent) {
    for (const auto& r : corpus50().qa) {
        EXPECT_EQ(r.answer_in_hierarchy, detail::answer_on_screen(corpus50().screen(r.screen_id).html, r.answer))
            << r.screen_id;
    }
    support::TempDir dir;
    write_tiny_corpus(dir);
    support::write_file(dir / "qa.jsonl",
                        "{\"screen_id\":\"one\",\"question\":\"q\",\"answer\":\"hello\"}\n"
                        "{\"screen_id\":\"one\",\"question\":\"q\",\"answer\":\"absent\"}\n"
                        "{\"screen_id\":\"one\",\"question\":\"q\",\"answer\":\"absent\",\"answer_in_hierarchy\":true}\n");
    const auto c = load_corpus(dir.path());
    EXPECT_TRUE(c.qa[0].answer_in_hierarchy);
    EXPECT_FALSE(c.qa[1].answer_in_hierarchy);
    EXPECT_TRUE(c.qa[2].answer_in_hierarchy);
}

TEST(LoadCorpus, ErrorKinds) {
    support::TempDir dir;
    write_tiny_corpus(dir);
    EXPECT_EQ(load_corpus(dir.path()).screens.size(), 1u);

    support::write_file(dir / "tasks.jsonl",
                        R"({"task_id":"t","steps":[{"screen_id":"two","instruction":"x","gold":0}]})" "\n");
    EXPECT_EQ(kind_of([&] { load_corpus(dir.path()); }), ErrorKind::MissingScreen);

    support::write_file(dir / "tasks.jsonl",
                        R"({"task_id":"t","steps":[{"screen_id":"one","instruction":"x","gold":3}]})" "\n");
    EXPECT_EQ(kind_of([&] { load_corpus(dir.path()); }), ErrorKind::InvalidGoldIndex);

    support::write_file(dir / "tasks.jsonl",
                        R"({"task_id":"t","steps":[{"screen_id":"one","instruction":"x","gold":2}]})" "\n");
    const auto ok = load_corpus(dir.path());
    EXPECT_EQ(ok.tasks[0].app_package, "com.tiny");

    support::write_file(dir / "tasks.jsonl", R"({"task_id":"t","steps":[]})" "\n");
    EXPECT_EQ(kind_of([&] { load_corpus(dir.path()); }), ErrorKind::LayoutError);
    std::filesystem::remove(dir / "tasks.jsonl");

    support::write_file(dir / "summaries.jsonl", "{\"screen_id\":\"one\",\"summaries\":[\"a\"]}\n{oops\n");
    try {
        load_corpus(dir.path());
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MalformedJson);
        EXPECT_NE(std::string(e.what()).find("summaries.jsonl:2"), std::string::npos) << e.what();
    }
    support::write_file(dir / "summaries.jsonl", "{\"screen_id\":\"one\"}\n");
    EXPECT_EQ(kind_of([&] { load_corpus(dir.path()); }), ErrorKind::LayoutError);
    std::filesystem::remove(dir / "summaries.jsonl");

    support::write_file(dir / "screens/broken.json", "{\"root\": ");
    EXPECT_EQ(kind_of([&] { load_corpus(dir.path()); }), ErrorKind::MalformedJson);

    EXPECT_EQ(kind_of([&] { load_corpus(dir / "nowhere"); }), ErrorKind::LayoutError);
}

TEST(LoadCorpus, EmptyScreensDirectory) {
    support::TempDir dir;
    std::filesystem::create_directories(dir / "screens");
    const auto c = load_corpus(dir.path());
    EXPECT_TRUE(c.screens.empty());
    EXPECT_EQ(kind_of([&] { c.screen("x"); }), ErrorKind::MissingScreen);
}

TEST(SampleExemplars, DeterministicAndExcludesTestScreen) {
    for (auto task : {TaskKind::Summarization, TaskKind::QuestionAnswering, TaskKind::InstructionToAction,
                      TaskKind::QuestionGeneration}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto a = sample_exemplars(corpus50(), task, 3, seed, SamplingMode::Any, "bloom_01");
            auto b = sample_exemplars(corpus50(), task, 3, seed, SamplingMode::Any, "bloom_01");
            ASSERT_EQ(a.size(), 3u);
            for (std::size_t i = 0; i < a.size(); ++i) {
                EXPECT_EQ(screen_of(a[i]), screen_of(b[i]));
                EXPECT_EQ(a[i].output, b[i].output);
                EXPECT_NE(screen_of(a[i]), "bloom_01");
            }
        }
    }
    EXPECT_TRUE(sample_exemplars(corpus50(), TaskKind::Summarization, 0, 1, SamplingMode::Any, "bloom_01").empty());
}

TEST(SampleExemplars, SeedsVary) {
    std::set<std::string> firsts;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        firsts.insert(screen_of(sample_exemplars(corpus50(), TaskKind::Summarization, 1, seed, SamplingMode::Any,
                                                 "bloom_00")[0]));
    }
    EXPECT_GT(firsts.size(), 5u);
}

TEST(SampleExemplars, CrossAppNeverSharesPackage) {
    for (const auto& [id, screen] : corpus50().screens) {
        const auto pkg = *screen.source.app_package;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            for (const auto& ex :
                 sample_exemplars(corpus50(), TaskKind::Summarization, 4, seed, SamplingMode::CrossApp, id)) {
                EXPECT_NE(*corpus50().screen(screen_of(ex)).source.app_package, pkg) << id;
            }
        }
    }
}

TEST(SampleExemplars, InAppIncludesSamePackage) {
    for (const auto& [id, screen] : corpus50().screens) {
        const auto pkg = *screen.source.app_package;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto picked = sample_exemplars(corpus50(), TaskKind::Summarization, 3, seed, SamplingMode::InApp, id);
            ASSERT_EQ(picked.size(), 3u);
            bool shared = false;
            for (const auto& ex : picked) shared = shared || *corpus50().screen(screen_of(ex)).source.app_package == pkg;
            EXPECT_TRUE(shared) << id << " seed " << seed;
        }
    }
}

TEST(SampleExemplars, Insufficient) {
    const auto showcase = load_corpus(support::fixtures_dir() / "showcase");
    // The only QA exemplar lives in another package.
    EXPECT_EQ(kind_of([&] {
                  sample_exemplars(showcase, TaskKind::QuestionAnswering, 1, 0, SamplingMode::InApp, "test_signin");
              }),
              ErrorKind::InsufficientExemplars);
    EXPECT_EQ(kind_of([&] {
                  sample_exemplars(showcase, TaskKind::QuestionGeneration, 3, 0, SamplingMode::Any, "test_signin");
              }),
              ErrorKind::InsufficientExemplars);
    EXPECT_EQ(kind_of([] {
                  sample_exemplars(corpus50(), TaskKind::Summarization, 41, 0, SamplingMode::CrossApp, "bloom_00");
              }),
              ErrorKind::InsufficientExemplars);
    EXPECT_EQ(sample_exemplars(corpus50(), TaskKind::Summarization, 40, 0, SamplingMode::CrossApp, "bloom_00").size(),
              40u);
}

TEST(SampleExemplars, KeepsCorpusOrder) {
    const auto picked = sample_exemplars(corpus50(), TaskKind::Summarization, 10, 99, SamplingMode::Any, "shop_03");
    auto position = [](const std::string& id) {
        const auto& s = corpus50().summaries;
        return std::find_if(s.begin(), s.end(), [&](const SummaryRecord& r) { return r.screen_id == id; }) - s.begin();
    };
    for (std::size_t i = 1; i < picked.size(); ++i) {
        EXPECT_LT(position(screen_of(picked[i - 1])), position(screen_of(picked[i])));
    }
}

TEST(ModeSlug, RoundTrip) {
    for (auto m : {SamplingMode::Any, SamplingMode::InApp, SamplingMode::CrossApp}) {
        EXPECT_EQ(parse_mode(mode_slug(m)), m);
    }
    EXPECT_EQ(parse_mode("sideways"), std::nullopt);
}

#include <gtest/gtest.h>

#include <thread>

#include "screenchat/service.hpp"
#include "test_support.hpp"

using namespace screenchat;
using nlohmann::json;

namespace {

std::shared_ptr<const Corpus> showcase() {
    static const auto c = std::make_shared<const Corpus>(load_corpus(support::fixtures_dir() / "showcase"));
    return c;
}

AgentService scripted(std::vector<std::string> responses, ServiceOptions options = {}) {
    return AgentService(showcase(), std::make_shared<ScriptedBackend>(std::move(responses)), std::move(options));
}

std::size_t line_count(const std::string& s) {
    return s.empty() ? 0 : static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) + 1;
}

} // namespace

TEST(AgentService, ListScreensOrdered) {
    const auto out = scripted({}).handle("GET", "/screens");
    EXPECT_EQ(out.status, 200);
    ASSERT_EQ(out.body.size(), 6u);
    std::vector<std::string> ids;
    for (const auto& s : out.body) ids.push_back(s["screen_id"]);
    EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
    EXPECT_EQ(ids.front(), "act_launcher");
    EXPECT_EQ(out.body[0]["app_package"], "com.google.android.apps.nexuslauncher");
}

TEST(AgentService, GetScreenNormalizesBounds) {
    const auto svc = scripted({});
    for (const auto& [id, screen] : showcase()->screens) {
        const auto out = svc.handle("GET", "/screens/" + id);
        ASSERT_EQ(out.status, 200) << id;
        EXPECT_EQ(out.body["html_text"], screen.html.html_text);
        EXPECT_EQ(out.body["elements"].size(), line_count(screen.html.html_text)) << id;
        for (const auto& el : out.body["elements"]) {
            for (const auto* side : {"left", "top", "right", "bottom"}) {
                const double v = el["bounds"][side];
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
            EXPECT_LE(el["bounds"]["left"].get<double>(), el["bounds"]["right"].get<double>());
        }
    }
    const auto launcher = svc.handle("GET", "/screens/act_launcher");
    EXPECT_EQ(launcher.body["elements"][29]["index"], 29);
}

TEST(AgentService, NotFound) {
    const auto svc = scripted({});
    EXPECT_EQ(svc.handle("GET", "/screens/nope").status, 404);
    EXPECT_EQ(svc.handle("GET", "/screens/nope").body["error"], "MissingScreen");
    EXPECT_EQ(svc.handle("GET", "/elsewhere").status, 404);
    EXPECT_EQ(svc.handle("POST", "/tasks/dance", "{}").status, 404);
    EXPECT_EQ(svc.handle("POST", "/tasks/summarize", R"({"screen_id":"nope","shots":0})").status, 404);
}

TEST(AgentService, ActValidatesIndex) {
    const auto svc = scripted({"id=<SOI>29<EOI>", "<SOI>500<EOI>"});
    const auto body = R"({"screen_id":"act_launcher","instruction":"Open the clock.","shots":0})";
    const auto ok = svc.handle("POST", "/tasks/act", body);
    ASSERT_EQ(ok.status, 200) << ok.body.dump();
    EXPECT_EQ(ok.body["result"]["element_index"], 29);
    EXPECT_EQ(ok.body["result"]["valid"], true);
    EXPECT_EQ(ok.body["raw_output"], "id=<SOI>29<EOI>");
    EXPECT_EQ(ok.body["prompt_hash"].get<std::string>().size(), 64u);

    const auto out_of_range = svc.handle("POST", "/tasks/act", body);
    EXPECT_EQ(out_of_range.body["result"]["element_index"], 500);
    EXPECT_EQ(out_of_range.body["result"]["valid"], false);
}

TEST(AgentService, RequestValidation) {
    const auto svc = scripted({});
    EXPECT_EQ(svc.handle("POST", "/tasks/qa", R"({"screen_id":"test_signin"})").status, 422);
    EXPECT_EQ(svc.handle("POST", "/tasks/qa", R"({"screen_id":"test_signin","question":""})").status, 422);
    EXPECT_EQ(svc.handle("POST", "/tasks/summarize", R"({"shots":0})").status, 422);
    EXPECT_EQ(svc.handle("POST", "/tasks/summarize", R"({"screen_id":"test_signin","mode":"x"})").status, 422);
    EXPECT_EQ(svc.handle("POST", "/tasks/summarize", R"({"screen_id":5})").status, 422);
    EXPECT_EQ(svc.handle("POST", "/tasks/summarize", "{not json").status, 400);
    EXPECT_EQ(svc.handle("POST", "/tasks/summarize", "[1]").status, 400);
    // Only one QA exemplar exists.
    EXPECT_EQ(svc.handle("POST", "/tasks/qa", R"({"screen_id":"test_signin","question":"q","shots":2})").status, 422);
}

TEST(AgentService, QuestionGenerationPreview) {
    const auto svc = scripted({"", "It's a page and there are 2 input tags, including:\n1. id=4 a\n"});
    const auto none = svc.handle("POST", "/tasks/generate-questions", R"({"screen_id":"act_launcher","shots":0})");
    ASSERT_EQ(none.status, 200) << none.body.dump();
    EXPECT_EQ(none.body["result"]["coverage_preview"]["gt_indexes"], json::array());
    EXPECT_EQ(none.body["result"]["questions"], json::array());

    const auto some = svc.handle("POST", "/tasks/generate-questions", R"({"screen_id":"test_signin","shots":1})");
    ASSERT_EQ(some.status, 200) << some.body.dump();
    EXPECT_EQ(some.body["result"]["coverage_preview"]["enumerated_indexes"], json::array({4}));
    const auto gt = input_field_indexes(showcase()->screen("test_signin").html);
    EXPECT_EQ(some.body["result"]["coverage_preview"]["gt_indexes"], json(gt));
}

TEST(AgentService, BudgetAndBackendFailures) {
    ServiceOptions tight;
    tight.budget_tokens = 50;
    tight.on_overflow = OverflowPolicy::Fail;
    const auto over = scripted({"x"}, tight).handle("POST", "/tasks/summarize", R"({"screen_id":"test_signin"})");
    EXPECT_EQ(over.status, 409);
    EXPECT_EQ(over.body["error"], "BudgetExceeded");

    const auto down = scripted({}).handle("POST", "/tasks/summarize", R"({"screen_id":"test_signin","shots":0})");
    EXPECT_EQ(down.status, 502);
    EXPECT_EQ(down.body["error"], "BackendUnavailable");
}

TEST(AgentService, ReplayIsPure) {
    support::TempDir dir;
    auto store = std::make_shared<RecordingStore>(dir / "rec.jsonl");
    {
        RecordingBackend recorder(std::make_shared<ScriptedBackend>(std::vector<std::string>{"<SOS>Sign in<EOS>"}),
                                  store);
        AgentService(showcase(), std::shared_ptr<CompletionBackend>(&recorder, [](auto*) {}))
            .handle("POST", "/tasks/summarize", R"({"screen_id":"test_signin","shots":1,"seed":3})");
    }
    AgentService svc(showcase(), std::make_shared<ReplayBackend>(store));
    const auto body = R"({"screen_id":"test_signin","shots":1,"seed":3})";
    const auto a = svc.handle("POST", "/tasks/summarize", body);
    const auto b = svc.handle("POST", "/tasks/summarize", body);
    ASSERT_EQ(a.status, 200) << a.body.dump();
    EXPECT_EQ(a.body["result"]["summary"], "Sign in");
    EXPECT_EQ(a.body.dump(), b.body.dump());
    EXPECT_EQ(svc.handle("POST", "/tasks/summarize", R"({"screen_id":"test_signin","shots":0})").status, 502);
}

TEST(AgentService, MountedOverLoopback) {
    ServiceOptions opts;
    opts.cors_origin = "http://localhost:5173";
    const auto svc = scripted({"<SOA>Forgot password<EOA>"}, opts);
    httplib::Server server;
    svc.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto list = client.Get("/screens");
    ASSERT_TRUE(list);
    EXPECT_EQ(list->status, 200);
    EXPECT_EQ(list->get_header_value("Access-Control-Allow-Origin"), "http://localhost:5173");
    EXPECT_EQ(json::parse(list->body).size(), 6u);

    auto preflight = client.Options("/tasks/qa");
    ASSERT_TRUE(preflight);
    EXPECT_EQ(preflight->status, 204);
    EXPECT_NE(preflight->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);

    auto qa = client.Post("/tasks/qa", R"({"screen_id":"test_signin","question":"Where can I reset my password?"})",
                          "application/json");
    ASSERT_TRUE(qa);
    EXPECT_EQ(qa->status, 200) << qa->body;
    EXPECT_EQ(json::parse(qa->body)["result"]["answer"], "Forgot password");

    auto missing = client.Get("/screens/nope");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);

    server.stop();
    t.join();
}

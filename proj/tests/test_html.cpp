#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "screenchat/html.hpp"
#include "screenchat/prompt.hpp"
#include "test_support.hpp"

using namespace screenchat;

TEST(MapClass, NamedExamples) {
    EXPECT_EQ(map_class("android.widget.ImageButton"), Tag::Button);
    EXPECT_EQ(map_class("android.widget.EditText"), Tag::Input);
    EXPECT_EQ(map_class("android.widget.ImageView"), Tag::Img);
    EXPECT_EQ(map_class("android.widget.TextView"), Tag::P);
    EXPECT_EQ(map_class("android.widget.LinearLayout"), Tag::Div);
    EXPECT_EQ(map_class("com.example.FancyView", {"android.widget.TextView", "android.view.View"}), Tag::P);
}

// Five base classes, each with one custom subclass that only reveals its kind
// through the ancestor chain.
TEST(MapClass, PrecedenceTableOverBaseClassesAndSubclasses) {
    const std::vector<std::pair<std::string, Tag>> base{
        {"android.widget.EditText", Tag::Input},   {"android.widget.ImageButton", Tag::Button},
        {"android.widget.ImageView", Tag::Img},    {"android.widget.TextView", Tag::P},
        {"android.widget.LinearLayout", Tag::Div},
    };
    for (const auto& [cls, tag] : base) {
        EXPECT_EQ(map_class(cls), tag) << cls;
        EXPECT_EQ(map_class("com.vendor.Custom", {cls, "android.view.View"}), tag) << "subclass of " << cls;
        if (tag != Tag::Div) {
            EXPECT_EQ(map_class(cls, {"android.widget.EditText"}), tag) << "own name wins for " << cls;
        }
    }
    // A container name matches no rule, so the ancestors decide.
    EXPECT_EQ(map_class("android.widget.LinearLayout", {"android.widget.EditText"}), Tag::Input);
    // Case-insensitive, simple name only: the package path never matches.
    EXPECT_EQ(map_class("com.button.image.Widget"), Tag::Div);
    EXPECT_EQ(map_class("X.EDITTEXTBOX"), Tag::Input);
    // The first matching name decides even if a later ancestor has a higher-precedence rule.
    EXPECT_EQ(map_class("com.x.Thing", {"android.widget.ImageView", "android.widget.EditText"}), Tag::Img);
}

TEST(ResourceWords, Examples) {
    EXPECT_EQ(resource_words("com.app:id/unread_count_textView"), "unread count textView");
    EXPECT_EQ(resource_words("com.app:id/date"), "date");
    EXPECT_EQ(resource_words("a__b"), "a b");
    EXPECT_EQ(resource_words("android:title"), "title");
    EXPECT_EQ(resource_words("com.app:id/"), std::nullopt);
    EXPECT_EQ(resource_words("com.app:id/___"), std::nullopt);
    EXPECT_EQ(resource_words("_x_"), "x");
}

TEST(ResourceWords, MatchesSplitOnUnderscoreRuns) {
    std::mt19937_64 rng(3);
    const std::string alphabet = "ab_C";
    for (int trial = 0; trial < 500; ++trial) {
        std::string name;
        for (auto k = rng() % 9; k > 0; --k) name.push_back(alphabet[rng() % alphabet.size()]);
        std::vector<std::string> parts;
        std::string cur;
        for (char c : name + "_") {
            if (c == '_') {
                if (!cur.empty()) parts.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        std::optional<std::string> expected;
        if (!parts.empty()) {
            std::string joined = parts[0];
            for (std::size_t i = 1; i < parts.size(); ++i) joined += " " + parts[i];
            expected = joined;
        }
        EXPECT_EQ(resource_words("pkg:id/" + name), expected) << name;
    }
}

namespace {

UiNode leaf(std::string cls, std::optional<std::string> text = {}, std::optional<std::string> rid = {},
            std::optional<std::string> desc = {}) {
    UiNode n;
    n.class_name = std::move(cls);
    n.text = std::move(text);
    n.resource_id = std::move(rid);
    n.content_desc = std::move(desc);
    n.bounds = {0, 0, 10, 10};
    return n;
}

ScreenHtml render_nodes(const std::vector<UiNode>& nodes) {
    std::vector<NodeRef> refs(nodes.begin(), nodes.end());
    return render_screen(refs, "s");
}

} // namespace

TEST(RenderScreen, Examples) {
    EXPECT_EQ(render_element(make_element(leaf("android.widget.TextView", "Create password"), 0)),
              "<p id=0> Create password </p>");
    EXPECT_EQ(render_element(make_element(
                  leaf("android.widget.Button", std::nullopt, "com.android.contacts:id/search_back_button",
                       "stop searching"),
                  7)),
              R"(<button id=7 class="search back button" alt="stop searching">  </button>)");
    auto empty = render_screen(std::vector<NodeRef>{}, "empty");
    EXPECT_EQ(empty.html_text, "");
    EXPECT_TRUE(empty.elements.empty());
    EXPECT_EQ(empty.approx_tokens, 0);
}

TEST(RenderScreen, EscapingAndNewlines) {
    auto html = render_nodes({leaf("android.widget.TextView", "Tom & \"Jerry\" <3\nline two", "x:id/a_b",
                                   "Play Movies & TV")});
    EXPECT_EQ(html.html_text,
              R"(<p id=0 class="a b" alt="Play Movies &amp; TV"> Tom &amp; &quot;Jerry&quot; &lt;3 line two </p>)");
}

TEST(RenderScreen, EmptyContentDescIsOmitted) {
    EXPECT_EQ(render_nodes({leaf("android.widget.ImageView", std::nullopt, std::nullopt, "")}).html_text,
              "<img id=0>  </img>");
}

TEST(RenderScreen, EscapingIsInjective) {
    std::mt19937_64 rng(8);
    const std::string alphabet = "&;amp\"<>qutgl";
    std::map<std::string, std::string> seen;
    for (int trial = 0; trial < 3000; ++trial) {
        std::string raw;
        for (auto k = rng() % 6; k > 0; --k) raw.push_back(alphabet[rng() % alphabet.size()]);
        auto esc = escape_html(raw);
        auto [it, fresh] = seen.emplace(esc, raw);
        if (!fresh) {
            EXPECT_EQ(it->second, raw);
        }
    }
}

TEST(RenderScreen, ApproxTokensCountCodepoints) {
    EXPECT_EQ(approx_token_count(""), 0);
    EXPECT_EQ(approx_token_count("abcd"), 1);
    EXPECT_EQ(approx_token_count("abcde"), 2);
    EXPECT_EQ(approx_token_count("日本語テ"), 1); // 4 code points, 12 bytes
    auto html = render_nodes({leaf("android.widget.TextView", "Crème brûlée")});
    EXPECT_EQ(html.approx_tokens, (utf8_length(html.html_text) + 3) / 4);
}

TEST(RenderScreen, RenumberingOnlyTouchesLastLine) {
    std::vector<UiNode> nodes{leaf("android.widget.TextView", "a"), leaf("android.widget.EditText", "b"),
                              leaf("android.widget.ImageView"), leaf("android.widget.Button", "c")};
    auto full = render_nodes(nodes);
    nodes.pop_back();
    auto shorter = render_nodes(nodes);
    EXPECT_EQ(full.html_text.substr(0, shorter.html_text.size()), shorter.html_text);
    EXPECT_EQ(full.html_text[shorter.html_text.size()], '\n');
}

TEST(LookupElement, Bounds) {
    auto html = render_nodes({leaf("A"), leaf("B"), leaf("C")});
    EXPECT_EQ(lookup_element(html, 2).source.class_name, "C");
    for (std::int64_t bad : {std::int64_t{99}, std::int64_t{3}, std::int64_t{-1}}) {
        try {
            lookup_element(html, bad);
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::IndexOutOfRange);
        }
    }
}

// Invariants over every fixture screen: one line per element, ids 0..k-1 in
// order, input lines and input_field_indexes agree, bytes match the golden file.
TEST(RenderScreen, FixtureCorpusInvariantsAndGoldens) {
    const std::regex id_re(R"(^<(p|button|img|input|div) id=(\d+)[ >])");
    int screens = 0;
    for (const auto* dir : {"showcase/screens", "corpus50/screens"}) {
        for (const auto& entry : std::filesystem::directory_iterator(support::fixtures_dir() / dir)) {
            const auto html = render_screen(load_screen_file(entry.path()));
            std::istringstream lines(html.html_text);
            std::string line;
            std::int64_t i = 0;
            std::vector<std::int64_t> inputs;
            while (std::getline(lines, line)) {
                std::smatch m;
                ASSERT_TRUE(std::regex_search(line, m, id_re)) << line;
                EXPECT_EQ(std::stoll(m[2]), i);
                EXPECT_EQ(line, render_element(html.elements[static_cast<std::size_t>(i)]));
                if (m[1] == "input") inputs.push_back(i);
                ++i;
            }
            EXPECT_EQ(i, static_cast<std::int64_t>(html.elements.size()));
            EXPECT_EQ(inputs, input_field_indexes(html));

            const auto stem = entry.path().stem().string();
            const auto golden = std::string(dir) == "showcase/screens"
                                    ? support::fixtures_dir() / "golden" / (stem + ".html")
                                    : support::fixtures_dir() / "golden/corpus50" / (stem + ".html");
            EXPECT_EQ(html.html_text + "\n", support::read_file(golden)) << stem;
            ++screens;
        }
    }
    EXPECT_EQ(screens, 56);
}

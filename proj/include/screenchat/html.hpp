#pragma once

// HTML screen representation: one line per visible leaf,
//
//   <TAG id=N class="resource words" alt="content desc"> text </TAG>
//
// with ids assigned 0..k-1 in depth-first order.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "screenchat/error.hpp"
#include "screenchat/view_hierarchy.hpp"

namespace screenchat {

enum class Tag { P, Button, Img, Input, Div };

constexpr std::string_view tag_name(Tag tag) noexcept {
    switch (tag) {
    case Tag::P: return "p";
    case Tag::Button: return "button";
    case Tag::Img: return "img";
    case Tag::Input: return "input";
    case Tag::Div: return "div";
    }
    return "div";
}

/// Snapshot of the source node fields the registry exposes (bounds travel here,
/// never through the prompt HTML).
struct SourceInfo {
    std::string class_name;
    std::optional<std::string> resource_id;
    Bounds bounds;

    friend bool operator==(const SourceInfo&, const SourceInfo&) = default;
};

struct HtmlElement {
    std::int64_t index = 0;
    Tag tag = Tag::Div;
    std::optional<std::string> class_words;
    std::optional<std::string> alt_text;
    std::optional<std::string> inner_text;
    SourceInfo source;

    friend bool operator==(const HtmlElement&, const HtmlElement&) = default;
};

struct ScreenHtml {
    std::string screen_id;
    std::vector<HtmlElement> elements;
    std::string html_text;
    std::int64_t approx_tokens = 0;

    friend bool operator==(const ScreenHtml&, const ScreenHtml&) = default;
};

namespace detail {

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string_view simple_name(std::string_view qualified) {
    auto dot = qualified.rfind('.');
    return dot == std::string_view::npos ? qualified : qualified.substr(dot + 1);
}

inline std::optional<Tag> match_name(std::string_view name) {
    // Order matters: "ImageButton" must resolve to button, not img.
    static constexpr std::array<std::pair<std::string_view, Tag>, 4> rules{{
        {"edittext", Tag::Input},
        {"button", Tag::Button},
        {"image", Tag::Img},
        {"textview", Tag::P},
    }};
    const auto lowered = ascii_lower(simple_name(name));
    for (const auto& [needle, tag] : rules) {
        if (lowered.find(needle) != std::string::npos) return tag;
    }
    return std::nullopt;
}

} // namespace detail

/// Maps an Android class (then its ancestors, nearest first) to an HTML tag.
inline Tag map_class(std::string_view class_name, const std::vector<std::string>& ancestors = {}) {
    if (auto tag = detail::match_name(class_name)) return *tag;
    for (const auto& a : ancestors) {
        if (auto tag = detail::match_name(a)) return *tag;
    }
    return Tag::Div;
}

/// "com.app:id/unread_count_textView" -> "unread count textView". Runs of
/// underscores collapse to one space; camelCase is left alone.
inline std::optional<std::string> resource_words(std::string_view resource_id) {
    std::string_view name = resource_id;
    if (auto slash = name.rfind('/'); slash != std::string_view::npos) {
        name = name.substr(slash + 1);
    } else if (auto colon = name.rfind(':'); colon != std::string_view::npos) {
        name = name.substr(colon + 1);
    }
    std::string out;
    std::size_t i = 0;
    while (i < name.size()) {
        while (i < name.size() && name[i] == '_') ++i;
        std::size_t j = i;
        while (j < name.size() && name[j] != '_') ++j;
        if (j > i) {
            if (!out.empty()) out.push_back(' ');
            out.append(name.substr(i, j - i));
        }
        i = j;
    }
    if (out.empty()) return std::nullopt;
    return out;
}

inline std::string escape_html(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

/// Replaces CR/LF (and CRLF pairs) with single spaces so an element stays on one line.
inline std::string flatten_newlines(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '\r' && i + 1 < raw.size() && raw[i + 1] == '\n') {
            out.push_back(' ');
            ++i;
        } else if (raw[i] == '\n' || raw[i] == '\r') {
            out.push_back(' ');
        } else {
            out.push_back(raw[i]);
        }
    }
    return out;
}

/// Number of Unicode code points in a UTF-8 string (continuation bytes skipped).
inline std::int64_t utf8_length(std::string_view s) noexcept {
    std::int64_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++n;
    }
    return n;
}

inline std::int64_t approx_token_count(std::string_view text) noexcept {
    return (utf8_length(text) + 3) / 4;
}

inline std::string render_element(const HtmlElement& el) {
    const auto tag = tag_name(el.tag);
    std::string line = "<";
    line += tag;
    line += " id=" + std::to_string(el.index);
    if (el.class_words) line += " class=\"" + escape_html(flatten_newlines(*el.class_words)) + "\"";
    if (el.alt_text) line += " alt=\"" + escape_html(flatten_newlines(*el.alt_text)) + "\"";
    line += "> ";
    if (el.inner_text) line += escape_html(flatten_newlines(*el.inner_text));
    line += " </";
    line += tag;
    line += ">";
    return line;
}

inline HtmlElement make_element(const UiNode& node, std::int64_t index) {
    HtmlElement el;
    el.index = index;
    el.tag = map_class(node.class_name, node.ancestors);
    if (node.resource_id) el.class_words = resource_words(*node.resource_id);
    if (node.content_desc && !node.content_desc->empty()) el.alt_text = node.content_desc;
    el.inner_text = node.text;
    el.source = SourceInfo{node.class_name, node.resource_id, node.bounds};
    return el;
}

inline ScreenHtml render_screen(const std::vector<NodeRef>& leaves, std::string screen_id) {
    ScreenHtml screen;
    screen.screen_id = std::move(screen_id);
    screen.elements.reserve(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        screen.elements.push_back(make_element(leaves[i].get(), static_cast<std::int64_t>(i)));
        if (i > 0) screen.html_text.push_back('\n');
        screen.html_text += render_element(screen.elements.back());
    }
    screen.approx_tokens = approx_token_count(screen.html_text);
    return screen;
}

/// Convenience: visible-leaf selection followed by rendering.
inline ScreenHtml render_screen(const ScreenSource& source) {
    return render_screen(select_visible_leaves(source), source.screen_id);
}

/// Throws IndexOutOfRange for ids the screen does not have (typically a hallucinated id).
inline const HtmlElement& lookup_element(const ScreenHtml& screen, std::int64_t index) {
    if (index < 0 || index >= static_cast<std::int64_t>(screen.elements.size())) {
        throw Error(ErrorKind::IndexOutOfRange, "element id " + std::to_string(index) + " not on screen '" +
                                                    screen.screen_id + "' (" +
                                                    std::to_string(screen.elements.size()) + " elements)");
    }
    return screen.elements[static_cast<std::size_t>(index)];
}

} // namespace screenchat

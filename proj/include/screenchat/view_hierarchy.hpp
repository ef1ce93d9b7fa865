#pragma once

// Ingestion of RICO-style Android view hierarchies.
//
// Accepted layouts: a full RICO dump ({"activity": {"root": {...}}, ...}) or a
// bare node object. Field names follow the public RICO schema; unknown fields
// are ignored.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "screenchat/error.hpp"

namespace screenchat {

struct Bounds {
    std::int64_t left = 0;
    std::int64_t top = 0;
    std::int64_t right = 0;
    std::int64_t bottom = 0;

    std::int64_t width() const noexcept { return right - left; }
    std::int64_t height() const noexcept { return bottom - top; }
    bool has_area() const noexcept { return width() > 0 && height() > 0; }

    friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct ScreenDims {
    std::int64_t width = 0;
    std::int64_t height = 0;

    friend bool operator==(const ScreenDims&, const ScreenDims&) = default;
};

struct UiNode {
    std::string class_name;
    std::vector<std::string> ancestors;
    std::optional<std::string> text;
    std::optional<std::string> resource_id;
    std::optional<std::string> content_desc;
    Bounds bounds;
    bool visible_to_user = true;
    // Set when the source bounds had right < left or bottom < top.
    bool bounds_clamped = false;
    std::vector<UiNode> children;

    friend bool operator==(const UiNode&, const UiNode&) = default;
};

struct ScreenSource {
    std::string screen_id;
    UiNode root;
    std::optional<ScreenDims> screen_dims;
    std::optional<std::string> app_package;

    friend bool operator==(const ScreenSource&, const ScreenSource&) = default;
};

using NodeRef = std::reference_wrapper<const UiNode>;

namespace detail {

inline std::optional<std::string> optional_string(const nlohmann::json& node, const char* key) {
    auto it = node.find(key);
    if (it == node.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    // content-desc is sometimes an array of strings; take the first non-null entry.
    if (it->is_array()) {
        for (const auto& entry : *it) {
            if (entry.is_string()) return entry.get<std::string>();
        }
        return std::nullopt;
    }
    if (it->is_number() || it->is_boolean()) return it->dump();
    return std::nullopt;
}

inline Bounds parse_bounds(const nlohmann::json& node, bool& clamped) {
    clamped = false;
    auto it = node.find("bounds");
    if (it == node.end() || it->is_null()) return {};
    if (!it->is_array() || it->size() != 4) {
        throw Error(ErrorKind::InvalidBounds, "bounds must be an array of four numbers, got " + it->dump());
    }
    std::int64_t v[4];
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& x = (*it)[i];
        if (!x.is_number()) throw Error(ErrorKind::InvalidBounds, "non-numeric bounds entry " + x.dump());
        v[i] = x.is_number_integer() ? x.get<std::int64_t>() : static_cast<std::int64_t>(x.get<double>());
    }
    Bounds b{v[0], v[1], v[2], v[3]};
    if (b.right < b.left) {
        b.right = b.left;
        clamped = true;
    }
    if (b.bottom < b.top) {
        b.bottom = b.top;
        clamped = true;
    }
    return b;
}

inline UiNode parse_node(const nlohmann::json& node, const std::string& path) {
    if (!node.is_object()) throw Error(ErrorKind::MalformedJson, "node at " + path + " is not an object");
    UiNode out;
    auto cls = node.find("class");
    if (cls == node.end() || !cls->is_string() || cls->get<std::string>().empty()) {
        throw Error(ErrorKind::MalformedJson, "node at " + path + " has no class");
    }
    out.class_name = cls->get<std::string>();
    if (auto anc = node.find("ancestors"); anc != node.end() && anc->is_array()) {
        for (const auto& a : *anc) {
            if (a.is_string()) out.ancestors.push_back(a.get<std::string>());
        }
    }
    out.text = optional_string(node, "text");
    out.resource_id = optional_string(node, "resource-id");
    out.content_desc = optional_string(node, "content-desc");
    out.bounds = parse_bounds(node, out.bounds_clamped);
    if (auto vis = node.find("visible-to-user"); vis != node.end() && vis->is_boolean()) {
        out.visible_to_user = vis->get<bool>();
    }
    if (auto kids = node.find("children"); kids != node.end() && kids->is_array()) {
        std::size_t i = 0;
        for (const auto& child : *kids) {
            // RICO dumps contain null placeholders for dropped children.
            if (!child.is_null()) out.children.push_back(parse_node(child, path + "/" + std::to_string(i)));
            ++i;
        }
    }
    return out;
}

inline bool looks_like_node(const nlohmann::json& j) {
    return j.is_object() && j.contains("class");
}

inline bool is_on_screen(const UiNode& node, const std::optional<ScreenDims>& dims) {
    if (node.bounds_clamped || !node.bounds.has_area()) return false;
    if (!dims) return true;
    const auto& b = node.bounds;
    return b.left < dims->width && b.right > 0 && b.top < dims->height && b.bottom > 0;
}

inline bool collect_leaves(const UiNode& node, const std::optional<ScreenDims>& dims, std::vector<NodeRef>& out) {
    bool descendant_selected = false;
    for (const auto& child : node.children) {
        descendant_selected = collect_leaves(child, dims, out) || descendant_selected;
    }
    if (descendant_selected) return true;
    // No selected descendants were appended, so appending here keeps pre-order.
    if (node.visible_to_user && is_on_screen(node, dims)) {
        out.emplace_back(node);
        return true;
    }
    return false;
}

} // namespace detail

/// Parses a view hierarchy dump. `screen_id` is usually the file stem.
inline ScreenSource parse_view_hierarchy(std::string_view raw_json, std::string screen_id = {}) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(raw_json);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::MalformedJson, e.what());
    }

    const nlohmann::json* root = nullptr;
    if (doc.is_object()) {
        if (auto act = doc.find("activity"); act != doc.end() && act->is_object()) {
            if (auto r = act->find("root"); r != act->end() && detail::looks_like_node(*r)) root = &*r;
        }
        if (!root) {
            if (auto r = doc.find("root"); r != doc.end() && detail::looks_like_node(*r)) root = &*r;
        }
        if (!root && detail::looks_like_node(doc)) root = &doc;
    }
    if (!root) throw Error(ErrorKind::MissingRoot, "no view hierarchy node found");

    ScreenSource src;
    src.screen_id = std::move(screen_id);
    src.root = detail::parse_node(*root, "root");

    if (auto dims = doc.find("screen_dims"); dims != doc.end() && dims->is_object()) {
        src.screen_dims = ScreenDims{dims->value("width", std::int64_t{0}), dims->value("height", std::int64_t{0})};
    } else if (src.root.bounds.left == 0 && src.root.bounds.top == 0 && src.root.bounds.has_area()) {
        src.screen_dims = ScreenDims{src.root.bounds.right, src.root.bounds.bottom};
    }

    if (auto pkg = detail::optional_string(doc, "app_package")) {
        src.app_package = std::move(pkg);
    } else if (auto activity = detail::optional_string(doc, "activity_name")) {
        auto slash = activity->find('/');
        src.app_package = activity->substr(0, slash);
    } else if (auto rootpkg = detail::optional_string(*root, "package")) {
        src.app_package = std::move(rootpkg);
    }
    if (src.app_package && src.app_package->empty()) src.app_package.reset();
    return src;
}

inline ScreenSource load_screen_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::LayoutError, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_view_hierarchy(buf.str(), path.stem().string());
}

/// Visible leaves in depth-first pre-order: visible-to-user, positive on-screen
/// area, and no descendant that also qualifies.
inline std::vector<NodeRef> select_visible_leaves(const ScreenSource& source) {
    std::vector<NodeRef> out;
    detail::collect_leaves(source.root, source.screen_dims, out);
    return out;
}

/// Serializes the retained fields of a node back into RICO field names.
inline nlohmann::json to_json(const UiNode& node) {
    nlohmann::json j;
    j["class"] = node.class_name;
    if (!node.ancestors.empty()) j["ancestors"] = node.ancestors;
    if (node.text) j["text"] = *node.text;
    if (node.resource_id) j["resource-id"] = *node.resource_id;
    if (node.content_desc) j["content-desc"] = *node.content_desc;
    j["bounds"] = {node.bounds.left, node.bounds.top, node.bounds.right, node.bounds.bottom};
    j["visible-to-user"] = node.visible_to_user;
    if (!node.children.empty()) {
        j["children"] = nlohmann::json::array();
        for (const auto& c : node.children) j["children"].push_back(to_json(c));
    }
    return j;
}

} // namespace screenchat

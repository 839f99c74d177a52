// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhaudit/capture.hpp"
#include "mhaudit/util/encoding.hpp"
#include "mhaudit/util/strings.hpp"

namespace mhaudit {

enum class ViewKind { RawText = 0, UrlDecoded, JsonStrings, FormFields, MultipartParts };

inline std::string_view to_id(ViewKind k) {
    switch (k) {
    case ViewKind::RawText: return "raw_text";
    case ViewKind::UrlDecoded: return "url_decoded";
    case ViewKind::JsonStrings: return "json_strings";
    case ViewKind::FormFields: return "form_fields";
    case ViewKind::MultipartParts: return "multipart_parts";
    }
    return "raw_text";
}

/// One searchable text slice derived from a flow. `key` carries the form
/// field name or JSON key path where applicable; `provenance` records where
/// the text came from so every view is traceable to its source bytes.
struct DecodedView {
    ViewKind kind = ViewKind::RawText;
    std::string key;
    std::string text;
    std::string provenance;
};

struct DecodedViews {
    std::vector<DecodedView> views;
};

namespace viewdetail {

inline std::string content_type_of(const FlowRecord& flow) {
    auto ct = flow.header("content-type");
    if (!ct) return {};
    std::string value = util::to_lower(util::trim(*ct));
    if (size_t semi = value.find(';'); semi != std::string::npos) {
        return std::string(util::trim(std::string_view(value).substr(0, semi)));
    }
    return value;
}

inline void extract_json_scalars(const nlohmann::json& node, const std::string& path,
                                 std::vector<std::pair<std::string, std::string>>& out) {
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            extract_json_scalars(value, path.empty() ? key : path + "." + key, out);
        }
    } else if (node.is_array()) {
        size_t i = 0;
        for (const auto& value : node) {
            extract_json_scalars(value, path + "." + std::to_string(i), out);
            ++i;
        }
    } else if (node.is_string()) {
        out.emplace_back(path, node.get<std::string>());
    } else if (node.is_number() || node.is_boolean()) {
        out.emplace_back(path, node.dump());
    }
}

inline std::vector<std::pair<std::string, std::string>> parse_form_fields(std::string_view body) {
    std::vector<std::pair<std::string, std::string>> out;
    size_t start = 0;
    while (start <= body.size()) {
        size_t amp = body.find('&', start);
        std::string_view pair = (amp == std::string_view::npos) ? body.substr(start)
                                                                : body.substr(start, amp - start);
        start = (amp == std::string_view::npos) ? body.size() + 1 : amp + 1;
        if (pair.empty()) continue;
        size_t eq = pair.find('=');
        std::string key = util::percent_decode(eq == std::string_view::npos ? pair
                                                                            : pair.substr(0, eq),
                                               /*plus_as_space=*/true);
        std::string value = eq == std::string_view::npos
                                ? std::string()
                                : util::percent_decode(pair.substr(eq + 1), /*plus_as_space=*/true);
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

struct MultipartPart {
    std::string name;
    std::string content;
};

inline std::vector<MultipartPart> parse_multipart(std::string_view body, std::string_view boundary) {
    std::vector<MultipartPart> parts;
    std::string delim = "--" + std::string(boundary);
    size_t pos = body.find(delim);
    while (pos != std::string_view::npos) {
        pos += delim.size();
        if (body.substr(pos, 2) == "--") break; // closing delimiter
        while (pos < body.size() && (body[pos] == '\r' || body[pos] == '\n')) ++pos;
        size_t next = body.find(delim, pos);
        std::string_view part = (next == std::string_view::npos) ? body.substr(pos)
                                                                 : body.substr(pos, next - pos);
        // Split headers from content on the first blank line.
        size_t blank = part.find("\r\n\r\n");
        size_t skip = 4;
        if (blank == std::string_view::npos) {
            blank = part.find("\n\n");
            skip = 2;
        }
        MultipartPart out;
        if (blank != std::string_view::npos) {
            std::string_view headers = part.substr(0, blank);
            out.content = std::string(part.substr(blank + skip));
            size_t name_pos = util::ifind(headers, "name=\"");
            if (name_pos != std::string_view::npos) {
                size_t name_start = name_pos + 6;
                size_t name_end = headers.find('"', name_start);
                if (name_end != std::string_view::npos) {
                    out.name = std::string(headers.substr(name_start, name_end - name_start));
                }
            }
        } else {
            out.content = std::string(part);
        }
        while (!out.content.empty() && (out.content.back() == '\n' || out.content.back() == '\r')) {
            out.content.pop_back();
        }
        parts.push_back(std::move(out));
        pos = next;
    }
    return parts;
}

inline std::string multipart_boundary(const FlowRecord& flow) {
    auto ct = flow.header("content-type");
    if (!ct) return {};
    size_t pos = util::ifind(*ct, "boundary=");
    if (pos == std::string_view::npos) return {};
    std::string_view rest = std::string_view(*ct).substr(pos + 9);
    if (!rest.empty() && rest.front() == '"') {
        rest = rest.substr(1);
        if (size_t q = rest.find('"'); q != std::string_view::npos) rest = rest.substr(0, q);
    } else if (size_t semi = rest.find(';'); semi != std::string_view::npos) {
        rest = rest.substr(0, semi);
    }
    return std::string(util::trim(rest));
}

/// Second-level decodes for values recovered at depth 1: percent-encoded
/// payloads and JSON documents smuggled inside field values. Recursion stops
/// here.
inline void add_nested_views(const std::string& key, const std::string& value,
                             const std::string& provenance, DecodedViews& out) {
    std::string decoded = util::percent_decode(value);
    if (decoded != value) {
        out.views.push_back({ViewKind::UrlDecoded, key, decoded, provenance + "/pct"});
    }
    std::string_view trimmed = util::trim(value);
    if (!trimmed.empty() && (trimmed.front() == '{' || trimmed.front() == '[')) {
        auto doc = nlohmann::json::parse(trimmed, nullptr, false);
        if (!doc.is_discarded()) {
            std::vector<std::pair<std::string, std::string>> scalars;
            extract_json_scalars(doc, key, scalars);
            for (auto& [path, text] : scalars) {
                out.views.push_back({ViewKind::JsonStrings, path, std::move(text),
                                     provenance + "/json"});
            }
        }
    }
}

} // namespace viewdetail

/// Produces every searchable text view of a flow: the lossy-UTF-8 raw body
/// (always), percent-decoded path and query, form fields, JSON scalars with
/// their key paths, and multipart parts. Nested decoding is limited to one
/// extra level. Parse failures simply omit the affected view.
inline DecodedViews decode_body(const FlowRecord& flow) {
    using namespace viewdetail;
    DecodedViews out;

    out.views.push_back({ViewKind::RawText, "", util::lossy_utf8(flow.request_body), "body"});

    std::string decoded_path = util::percent_decode(flow.path);
    if (!flow.path.empty()) {
        out.views.push_back({ViewKind::UrlDecoded, "", decoded_path, "path"});
    }
    if (!flow.query.empty()) {
        out.views.push_back(
            {ViewKind::UrlDecoded, "", util::percent_decode(flow.query, true), "query"});
    }

    std::string content_type = content_type_of(flow);
    if (content_type == "application/x-www-form-urlencoded" && !flow.request_body.empty()) {
        for (auto& [key, value] : parse_form_fields(flow.request_body)) {
            out.views.push_back({ViewKind::FormFields, key, value, "form:" + key});
            add_nested_views(key, value, "form:" + key, out);
        }
    }

    std::string_view body_trimmed = util::trim(flow.request_body);
    if (!body_trimmed.empty() && (body_trimmed.front() == '{' || body_trimmed.front() == '[')) {
        auto doc = nlohmann::json::parse(body_trimmed, nullptr, false);
        if (!doc.is_discarded()) {
            std::vector<std::pair<std::string, std::string>> scalars;
            extract_json_scalars(doc, "", scalars);
            for (auto& [path, text] : scalars) {
                out.views.push_back({ViewKind::JsonStrings, path, text, "json:" + path});
                std::string decoded = util::percent_decode(text);
                if (decoded != text) {
                    out.views.push_back(
                        {ViewKind::UrlDecoded, path, std::move(decoded), "json:" + path + "/pct"});
                }
            }
        }
    }

    if (content_type == "multipart/form-data" && !flow.request_body.empty()) {
        std::string boundary = multipart_boundary(flow);
        if (!boundary.empty()) {
            for (auto& part : parse_multipart(flow.request_body, boundary)) {
                out.views.push_back(
                    {ViewKind::MultipartParts, part.name, part.content, "part:" + part.name});
                add_nested_views(part.name, part.content, "part:" + part.name, out);
            }
        }
    }
    return out;
}

} // namespace mhaudit

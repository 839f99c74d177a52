// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ctime>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhaudit/app_record.hpp"
#include "mhaudit/errors.hpp"
#include "mhaudit/hostclass.hpp"
#include "mhaudit/util/compress.hpp"
#include "mhaudit/util/encoding.hpp"
#include "mhaudit/util/fileio.hpp"
#include "mhaudit/util/strings.hpp"

namespace mhaudit {

struct HttpHeader {
    std::string name;
    std::string value;
};

/// One captured HTTP request (with minimal response metadata). Bodies are
/// stored after transfer decoding; the original encoded length is kept when
/// a Content-Encoding was removed.
struct FlowRecord {
    std::string flow_id;
    std::string app_id;
    CrawlKind crawl_kind = CrawlKind::Manual;
    int64_t timestamp_ms = 0;
    std::string method;
    std::string scheme;
    std::string host;
    int port = 0;
    std::string path;
    std::string query;
    std::vector<HttpHeader> request_headers;
    std::string request_body;
    size_t body_length = 0;
    std::optional<HostLabel> host_label;

    std::optional<size_t> encoded_body_length; // set when decompression ran
    bool decompression_failed = false;
    int response_status = 0;

    std::optional<std::string> header(std::string_view name) const {
        for (const auto& h : request_headers) {
            if (util::iequals(h.name, name)) return h.value;
        }
        return std::nullopt;
    }
};

struct IngestResult {
    std::vector<FlowRecord> flows;
    int skipped_entries = 0;
    std::vector<std::string> warnings;
};

namespace capdetail {

struct ParsedUrl {
    std::string scheme;
    std::string host;
    int port = 0;
    std::string path;
    std::string query;
};

inline ParsedUrl parse_url(std::string_view url) {
    ParsedUrl out;
    std::string_view rest = url;
    if (size_t scheme_end = rest.find("://"); scheme_end != std::string_view::npos) {
        out.scheme = util::to_lower(rest.substr(0, scheme_end));
        rest = rest.substr(scheme_end + 3);
    } else {
        out.scheme = "http";
    }
    size_t path_start = rest.find('/');
    std::string_view authority = (path_start == std::string_view::npos) ? rest
                                                                        : rest.substr(0, path_start);
    std::string_view path_query =
        (path_start == std::string_view::npos) ? std::string_view("/") : rest.substr(path_start);

    // Authority: host[:port], IPv6 hosts in brackets.
    if (!authority.empty() && authority.front() == '[') {
        size_t close = authority.find(']');
        if (close != std::string_view::npos) {
            out.host = util::to_lower(authority.substr(1, close - 1));
            if (close + 1 < authority.size() && authority[close + 1] == ':') {
                std::string_view p = authority.substr(close + 2);
                if (util::is_digits(p)) out.port = std::stoi(std::string(p));
            }
        } else {
            out.host = util::to_lower(authority);
        }
    } else {
        size_t colon = authority.rfind(':');
        if (colon != std::string_view::npos && util::is_digits(authority.substr(colon + 1))) {
            out.host = util::to_lower(authority.substr(0, colon));
            out.port = std::stoi(std::string(authority.substr(colon + 1)));
        } else {
            out.host = util::to_lower(authority);
        }
    }
    if (out.port == 0) out.port = (out.scheme == "https") ? 443 : 80;

    size_t frag = path_query.find('#');
    if (frag != std::string_view::npos) path_query = path_query.substr(0, frag);
    size_t q = path_query.find('?');
    if (q == std::string_view::npos) {
        out.path = std::string(path_query);
    } else {
        out.path = std::string(path_query.substr(0, q));
        out.query = std::string(path_query.substr(q + 1));
    }
    if (out.path.empty()) out.path = "/";
    return out;
}

/// Parses ISO-8601 timestamps of the HAR flavour
/// ("2023-11-03T10:15:30.123+01:00" or trailing 'Z') into epoch ms.
inline int64_t parse_iso8601_ms(std::string_view text) {
    std::tm tm{};
    int year = 0, mon = 0, day = 0, hour = 0, min = 0, sec = 0;
    if (std::sscanf(std::string(text).c_str(), "%d-%d-%dT%d:%d:%d", &year, &mon, &day, &hour, &min,
                    &sec) != 6) {
        return 0;
    }
    tm.tm_year = year - 1900;
    tm.tm_mon = mon - 1;
    tm.tm_mday = day;
    tm.tm_hour = hour;
    tm.tm_min = min;
    tm.tm_sec = sec;
    int64_t epoch = static_cast<int64_t>(timegm(&tm));

    int64_t millis = 0;
    size_t dot = text.find('.');
    size_t zone_pos = std::string_view::npos;
    for (size_t i = 19; i < text.size(); ++i) {
        if (text[i] == 'Z' || text[i] == '+' || (text[i] == '-' && i > 19)) {
            zone_pos = i;
            break;
        }
    }
    if (dot != std::string_view::npos) {
        size_t end = (zone_pos != std::string_view::npos) ? zone_pos : text.size();
        std::string_view frac = text.substr(dot + 1, end - dot - 1);
        int64_t scale = 100;
        for (size_t i = 0; i < frac.size() && i < 3; ++i) {
            if (frac[i] < '0' || frac[i] > '9') break;
            millis += (frac[i] - '0') * scale;
            scale /= 10;
        }
    }
    if (zone_pos != std::string_view::npos && text[zone_pos] != 'Z') {
        int zh = 0, zm = 0;
        if (std::sscanf(std::string(text.substr(zone_pos + 1)).c_str(), "%d:%d", &zh, &zm) >= 1) {
            int64_t offset = zh * 3600 + zm * 60;
            if (text[zone_pos] == '+') epoch -= offset;
            else epoch += offset;
        }
    }
    return epoch * 1000 + millis;
}

inline std::string make_flow_id(std::string_view app_id, CrawlKind kind, size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06zu", index);
    return std::string(app_id) + "#" + (kind == CrawlKind::Manual ? "m" : "a") + buf;
}

/// Applies Content-Encoding removal to a freshly parsed flow.
inline void finish_body(FlowRecord& flow) {
    auto encoding = flow.header("content-encoding");
    if (encoding && !flow.request_body.empty()) {
        std::string token = util::to_lower(util::trim(*encoding));
        if (token != "identity" && !token.empty()) {
            auto decoded = util::decode_content_encoding(token, flow.request_body);
            if (decoded) {
                flow.encoded_body_length = flow.request_body.size();
                flow.request_body = std::move(*decoded);
            } else {
                flow.decompression_failed = true;
            }
        }
    }
    flow.body_length = flow.request_body.size();
}

inline bool try_parse_har(const std::string& text, nlohmann::json& doc) {
    auto parsed = nlohmann::json::parse(text, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("log")) return false;
    doc = std::move(parsed);
    return true;
}

inline void ingest_har(const nlohmann::json& doc, std::string_view app_id, CrawlKind kind,
                       size_t index_offset, IngestResult& out) {
    const auto& log = doc.at("log");
    if (!log.contains("entries") || !log["entries"].is_array()) {
        throw UnknownCaptureFormatError("har log without entries array");
    }
    size_t index = index_offset;
    for (const auto& entry : log["entries"]) {
        try {
            const auto& request = entry.at("request");
            FlowRecord flow;
            flow.app_id = std::string(app_id);
            flow.crawl_kind = kind;
            flow.flow_id = make_flow_id(app_id, kind, index);
            flow.method = util::to_upper(request.value("method", "GET"));
            ParsedUrl url = parse_url(request.value("url", ""));
            flow.scheme = url.scheme;
            flow.host = url.host;
            flow.port = url.port;
            flow.path = url.path;
            flow.query = url.query;
            if (entry.contains("startedDateTime")) {
                flow.timestamp_ms = parse_iso8601_ms(entry["startedDateTime"].get<std::string>());
            }
            if (request.contains("headers")) {
                for (const auto& h : request["headers"]) {
                    flow.request_headers.push_back({h.value("name", ""), h.value("value", "")});
                }
            }
            if (request.contains("postData")) {
                const auto& post = request["postData"];
                std::string text = post.value("text", "");
                if (post.value("encoding", "") == "base64") {
                    flow.request_body = util::base64_decode(text);
                } else {
                    flow.request_body = std::move(text);
                }
            }
            if (entry.contains("response") && entry["response"].contains("status")) {
                flow.response_status = entry["response"]["status"].get<int>();
            }
            if (flow.host.empty()) throw UnknownCaptureFormatError("entry without host");
            finish_body(flow);
            out.flows.push_back(std::move(flow));
            ++index;
        } catch (const std::exception& e) {
            ++out.skipped_entries;
            out.warnings.push_back("MalformedEntry: " + std::string(e.what()));
        }
    }
}

inline void ingest_jsonl(const std::string& text, std::string_view app_id, CrawlKind kind,
                         size_t index_offset, IngestResult& out) {
    size_t pos = 0;
    size_t index = index_offset;
    bool saw_any = false;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line = (eol == std::string::npos)
                                    ? std::string_view(text).substr(pos)
                                    : std::string_view(text).substr(pos, eol - pos);
        pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
        line = util::trim(line);
        if (line.empty()) continue;
        saw_any = true;
        auto obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("url") || !obj.contains("method")) {
            ++out.skipped_entries;
            out.warnings.push_back("MalformedEntry: unparseable flow line");
            continue;
        }
        try {
            FlowRecord flow;
            flow.app_id = obj.value("app", std::string(app_id));
            flow.crawl_kind = obj.contains("kind") ? parse_crawl_kind(obj["kind"].get<std::string>())
                                                   : kind;
            flow.flow_id = make_flow_id(flow.app_id, flow.crawl_kind, index);
            flow.timestamp_ms = obj.value("ts", static_cast<int64_t>(0));
            flow.method = util::to_upper(obj.value("method", "GET"));
            ParsedUrl url = parse_url(obj["url"].get<std::string>());
            flow.scheme = url.scheme;
            flow.host = url.host;
            flow.port = url.port;
            flow.path = url.path;
            flow.query = url.query;
            if (obj.contains("headers")) {
                for (const auto& h : obj["headers"]) {
                    if (h.is_array() && h.size() == 2) {
                        flow.request_headers.push_back(
                            {h[0].get<std::string>(), h[1].get<std::string>()});
                    }
                }
            }
            if (obj.contains("body_b64")) {
                flow.request_body = util::base64_decode(obj["body_b64"].get<std::string>());
            }
            if (obj.contains("status")) flow.response_status = obj["status"].get<int>();
            if (flow.host.empty()) throw UnknownCaptureFormatError("flow without host");
            finish_body(flow);
            out.flows.push_back(std::move(flow));
            ++index;
        } catch (const std::exception& e) {
            ++out.skipped_entries;
            out.warnings.push_back("MalformedEntry: " + std::string(e.what()));
        }
    }
    if (!saw_any && text.empty()) return; // empty capture file: zero flows
}

} // namespace capdetail

/// Ingests a capture file, auto-detecting HAR 1.2 (one JSON document with a
/// "log" object) versus flow-record JSONL (one flow object per line). Flow
/// ids are assigned from `index_offset` upwards, so re-ingesting identical
/// bytes with identical arguments reproduces the records exactly.
inline IngestResult ingest_capture(const std::filesystem::path& file, std::string_view app_id,
                                   CrawlKind kind, size_t index_offset = 0) {
    std::string text = util::read_file(file);
    IngestResult out;

    std::string_view head = util::trim(std::string_view(text).substr(0, 64));
    if (head.empty()) return out;
    if (head.front() != '{') {
        throw UnknownCaptureFormatError("capture file is neither HAR nor flow JSONL: " +
                                        file.string());
    }
    nlohmann::json har;
    if (capdetail::try_parse_har(text, har)) {
        capdetail::ingest_har(har, app_id, kind, index_offset, out);
    } else {
        capdetail::ingest_jsonl(text, app_id, kind, index_offset, out);
        if (out.flows.empty() && out.skipped_entries > 0) {
            // Nothing usable in the file: treat the first line as a format probe.
            throw UnknownCaptureFormatError("no parseable flow records in " + file.string());
        }
    }
    return out;
}

/// The reviewable subset: outbound requests with a non-zero body, in the
/// original order. Idempotent.
inline std::vector<FlowRecord> filter_reviewable(const std::vector<FlowRecord>& flows) {
    std::vector<FlowRecord> out;
    out.reserve(flows.size());
    for (const FlowRecord& f : flows) {
        if (f.body_length > 0) out.push_back(f);
    }
    return out;
}

/// Assigns tracker labels to every flow in place.
inline void label_flows(std::vector<FlowRecord>& flows, const HostsList& hosts, HostMatchMode mode) {
    for (FlowRecord& f : flows) {
        f.host_label = classify_host(hosts, f.host, mode);
    }
}

} // namespace mhaudit

// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "mhaudit/bodyviews.hpp"
#include "mhaudit/capture.hpp"
#include "mhaudit/matcher.hpp"

namespace mhaudit {

enum class HitLocation { Path = 0, Query, Header, Body };

inline std::string_view to_id(HitLocation l) {
    switch (l) {
    case HitLocation::Path: return "path";
    case HitLocation::Query: return "query";
    case HitLocation::Header: return "header";
    case HitLocation::Body: return "body";
    }
    return "body";
}

inline HitLocation parse_hit_location(std::string_view id) {
    if (id == "path") return HitLocation::Path;
    if (id == "query") return HitLocation::Query;
    if (id == "header") return HitLocation::Header;
    if (id == "body") return HitLocation::Body;
    throw ConfigError("unknown hit location: " + std::string(id));
}

/// One observed transmission of a persona attribute. Deduplicated per
/// (flow, data type, variant, location).
struct DetectionHit {
    std::string app_id;
    std::string flow_id;
    std::string data_type_id;
    VariantKind variant = VariantKind::Plain;
    HitLocation location = HitLocation::Body;
    std::string destination_host;
    HostLabel host_label = HostLabel::NonTracker;
    CrawlKind crawl_kind = CrawlKind::Manual;

    friend auto operator<=>(const DetectionHit&, const DetectionHit&) = default;
};

namespace scandetail {

inline bool find_needle(std::string_view text, std::string_view needle, bool case_insensitive) {
    if (needle.empty()) return false;
    if (case_insensitive) return util::ifind(text, needle) != std::string_view::npos;
    return text.find(needle) != std::string_view::npos;
}

inline bool digit_at(std::string_view text, size_t pos) {
    return pos < text.size() && text[pos] >= '0' && text[pos] <= '9';
}

/// True when the numeric needle at [pos, pos+len) stands alone: not embedded
/// in a longer digit run and not extended by a decimal fraction.
inline bool numeric_boundary_ok(std::string_view text, size_t pos, size_t len) {
    if (pos > 0) {
        char prev = text[pos - 1];
        if (prev >= '0' && prev <= '9') return false;
        if (prev == '.' && pos >= 2 && digit_at(text, pos - 2)) return false;
    }
    size_t end = pos + len;
    if (end < text.size()) {
        char next = text[end];
        if (next >= '0' && next <= '9') return false;
        if (next == '.' && digit_at(text, end + 1)) return false;
    }
    return true;
}

/// Proximity rule: some key hint must occur within `window` bytes before the
/// number, case-insensitively.
inline bool keyed_numeric_in_text(std::string_view text, const Matcher& m, int window) {
    size_t from = 0;
    while (true) {
        size_t pos = text.find(m.needle, from);
        if (pos == std::string_view::npos) return false;
        if (numeric_boundary_ok(text, pos, m.needle.size())) {
            size_t win_start = pos > static_cast<size_t>(window) ? pos - window : 0;
            std::string_view before = text.substr(win_start, pos - win_start);
            for (const std::string& hint : m.key_hints) {
                if (util::icontains(before, hint)) return true;
            }
        }
        from = pos + 1;
    }
}

inline bool hint_equals_key(const Matcher& m, std::string_view key) {
    // The last dotted segment of a JSON path counts as the key.
    std::string_view tail = key;
    if (size_t dot = tail.rfind('.'); dot != std::string_view::npos) tail = tail.substr(dot + 1);
    for (const std::string& hint : m.key_hints) {
        if (util::iequals(tail, hint) || util::iequals(key, hint)) return true;
    }
    return false;
}

inline bool value_is_needle(std::string_view value, std::string_view needle) {
    return util::trim(value) == needle;
}

} // namespace scandetail

/// Scans one reviewable flow: raw path and query, header values (names are
/// skipped) and every decoded body view. KeyedNumeric needles additionally
/// accept an exact decoded-key match where the field key equals a hint.
inline std::vector<DetectionHit> scan_flow(const MatcherSet& matchers, const FlowRecord& flow,
                                           const DecodedViews& views) {
    using scandetail::find_needle;
    using scandetail::hint_equals_key;
    using scandetail::keyed_numeric_in_text;
    using scandetail::value_is_needle;

    std::set<std::tuple<std::string, VariantKind, HitLocation>> found;

    auto scan_text = [&](std::string_view text, HitLocation location) {
        for (const Matcher& m : matchers.matchers) {
            if (m.variant == VariantKind::KeyedNumeric) {
                if (keyed_numeric_in_text(text, m, matchers.numeric_window)) {
                    found.emplace(m.data_type_id, m.variant, location);
                }
            } else if (find_needle(text, m.needle, m.case_insensitive)) {
                found.emplace(m.data_type_id, m.variant, location);
            }
        }
    };

    scan_text(flow.path, HitLocation::Path);
    if (!flow.query.empty()) scan_text(flow.query, HitLocation::Query);
    for (const HttpHeader& h : flow.request_headers) {
        scan_text(h.value, HitLocation::Header);
    }
    for (const DecodedView& view : views.views) {
        HitLocation location = HitLocation::Body;
        if (view.provenance == "path") location = HitLocation::Path;
        else if (view.provenance == "query") location = HitLocation::Query;
        scan_text(view.text, location);

        // Exact decoded-key rule for keyed fields.
        if (!view.key.empty()) {
            for (const Matcher& m : matchers.matchers) {
                if (m.variant != VariantKind::KeyedNumeric) continue;
                if (hint_equals_key(m, view.key) && value_is_needle(view.text, m.needle)) {
                    found.emplace(m.data_type_id, m.variant, location);
                }
            }
        }
    }

    std::vector<DetectionHit> hits;
    hits.reserve(found.size());
    for (const auto& [type, variant, location] : found) {
        DetectionHit hit;
        hit.app_id = flow.app_id;
        hit.flow_id = flow.flow_id;
        hit.data_type_id = type;
        hit.variant = variant;
        hit.location = location;
        hit.destination_host = flow.host;
        hit.host_label = flow.host_label.value_or(HostLabel::NonTracker);
        hit.crawl_kind = flow.crawl_kind;
        hits.push_back(std::move(hit));
    }
    std::sort(hits.begin(), hits.end());
    return hits;
}

// ---------------------------------------------------------------------------
// Corpus-level aggregation

struct DestinationFlags {
    bool to_nontracker = false;
    bool to_tracker = false;
};

/// Per-app rollup: for each crawl kind, the data types ever transmitted and
/// whether any destination was a tracker.
struct AppRollup {
    std::map<CrawlKind, std::map<std::string, DestinationFlags>> by_kind;

    bool transmitted(std::string_view data_type) const {
        for (const auto& [kind, types] : by_kind) {
            if (types.count(std::string(data_type)) > 0) return true;
        }
        return false;
    }

    DestinationFlags flags_for(std::string_view data_type) const {
        DestinationFlags merged;
        for (const auto& [kind, types] : by_kind) {
            auto it = types.find(std::string(data_type));
            if (it != types.end()) {
                merged.to_nontracker |= it->second.to_nontracker;
                merged.to_tracker |= it->second.to_tracker;
            }
        }
        return merged;
    }
};

struct DetectionSet {
    std::vector<DetectionHit> hits;                // sorted canonical order
    std::map<std::string, AppRollup> rollup;       // keyed by app id

    /// Rebuilds the rollup from the hit list. The fold is commutative, so
    /// any hit order produces the same rollup.
    void rebuild_rollup(const std::vector<std::string>& app_ids) {
        rollup.clear();
        for (const std::string& app : app_ids) rollup[app]; // ensure empty entries exist
        for (const DetectionHit& hit : hits) {
            DestinationFlags& flags = rollup[hit.app_id].by_kind[hit.crawl_kind][hit.data_type_id];
            if (hit.host_label == HostLabel::Tracker) flags.to_tracker = true;
            else flags.to_nontracker = true;
        }
    }
};

inline nlohmann::ordered_json to_json(const DetectionHit& hit) {
    return {{"app", hit.app_id},
            {"flow", hit.flow_id},
            {"type", hit.data_type_id},
            {"variant", std::string(to_id(hit.variant))},
            {"location", std::string(to_id(hit.location))},
            {"host", hit.destination_host},
            {"host_label", std::string(to_id(hit.host_label))},
            {"kind", std::string(to_id(hit.crawl_kind))}};
}

inline DetectionHit hit_from_json(const nlohmann::json& obj) {
    DetectionHit hit;
    hit.app_id = obj.at("app").get<std::string>();
    hit.flow_id = obj.at("flow").get<std::string>();
    hit.data_type_id = obj.at("type").get<std::string>();
    hit.variant = parse_variant_kind(obj.at("variant").get<std::string>());
    hit.location = parse_hit_location(obj.at("location").get<std::string>());
    hit.destination_host = obj.at("host").get<std::string>();
    hit.host_label = obj.at("host_label").get<std::string>() == "tracker" ? HostLabel::Tracker
                                                                          : HostLabel::NonTracker;
    hit.crawl_kind = parse_crawl_kind(obj.at("kind").get<std::string>());
    return hit;
}

/// Scans labeled flows of one app and appends hits. Only reviewable flows
/// (non-zero body) are searched.
inline void scan_app_flows(const MatcherSet& matchers, const std::vector<FlowRecord>& flows,
                           std::vector<DetectionHit>& out) {
    for (const FlowRecord& flow : filter_reviewable(flows)) {
        DecodedViews views = decode_body(flow);
        std::vector<DetectionHit> hits = scan_flow(matchers, flow, views);
        out.insert(out.end(), hits.begin(), hits.end());
    }
}

struct AppScanInput {
    std::string app_id;
    std::vector<FlowRecord> flows; // labeled
};

/// Deterministic corpus scan: hits sorted canonically, rollup rebuilt, all
/// independent of input ordering.
inline DetectionSet scan_corpus(const std::vector<AppScanInput>& apps, const MatcherSet& matchers) {
    DetectionSet set;
    std::vector<std::string> ids;
    for (const AppScanInput& app : apps) {
        ids.push_back(app.app_id);
        scan_app_flows(matchers, app.flows, set.hits);
    }
    std::sort(set.hits.begin(), set.hits.end());
    set.hits.erase(std::unique(set.hits.begin(), set.hits.end()), set.hits.end());
    set.rebuild_rollup(ids);
    return set;
}

} // namespace mhaudit

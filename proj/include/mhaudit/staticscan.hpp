// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhaudit/dex.hpp"
#include "mhaudit/errors.hpp"
#include "mhaudit/util/fileio.hpp"
#include "mhaudit/util/strings.hpp"
#include "mhaudit/zip.hpp"

namespace mhaudit {

/// Fully qualified class names of one app, dotted form, deduplicated.
struct ClassSet {
    std::string app_id;
    std::set<std::string> classes;
};

namespace scandetail {

inline bool is_dex_member_name(std::string_view name) {
    // classes.dex, classes2.dex, ... at archive root.
    if (!name.starts_with("classes") || !name.ends_with(".dex")) return false;
    std::string_view digits = name.substr(7, name.size() - 7 - 4);
    return digits.empty() || util::is_digits(digits);
}

inline void collect_from_dex(std::span<const uint8_t> bytes, std::set<std::string>& out) {
    DexFile dex = DexFile::parse(bytes);
    for (const std::string& descriptor : dex.type_descriptors()) {
        std::string dotted = descriptor_to_dotted(descriptor);
        if (!dotted.empty()) out.insert(std::move(dotted));
    }
}

inline void collect_from_text(std::string_view text, std::set<std::string>& out) {
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line = (eol == std::string_view::npos) ? text.substr(pos)
                                                                : text.substr(pos, eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        if (size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = util::trim(line);
        if (line.empty()) continue;
        // Tolerate descriptor syntax in hand-written lists.
        if (line.front() == 'L' && line.back() == ';') {
            std::string dotted = descriptor_to_dotted(line);
            if (!dotted.empty()) out.insert(std::move(dotted));
            continue;
        }
        std::string name(line);
        std::replace(name.begin(), name.end(), '/', '.');
        out.insert(std::move(name));
    }
}

} // namespace scandetail

/// Extracts the class-name set from an app artifact: an APK (union over its
/// classes*.dex members), a bare DEX file, or a plain-text class list. An APK
/// without DEX members yields an empty set plus a warning.
inline ClassSet extract_class_names(const std::filesystem::path& artifact, std::string app_id,
                                    std::vector<std::string>* warnings = nullptr) {
    std::string raw;
    try {
        raw = util::read_file(artifact);
    } catch (const IoError& e) {
        throw UnreadableArtifactError(e.what());
    }
    std::span<const uint8_t> bytes(reinterpret_cast<const uint8_t*>(raw.data()), raw.size());

    ClassSet result;
    result.app_id = std::move(app_id);
    if (looks_like_zip(bytes)) {
        ZipReader zip = ZipReader::open(bytes);
        int dex_members = 0;
        for (const ZipEntry& entry : zip.entries()) {
            if (!scandetail::is_dex_member_name(entry.name)) continue;
            ++dex_members;
            std::vector<uint8_t> dex_bytes = zip.read(entry);
            scandetail::collect_from_dex(dex_bytes, result.classes);
        }
        if (dex_members == 0 && warnings != nullptr) {
            warnings->push_back("EmptyArtifact: no dex members in " + artifact.string());
        }
    } else if (looks_like_dex(bytes)) {
        scandetail::collect_from_dex(bytes, result.classes);
    } else {
        scandetail::collect_from_text(raw, result.classes);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Tracker signatures

struct TrackerSignature {
    std::string signature_id;
    std::string tracker_name;
    std::string vendor;
    std::vector<std::string> code_prefixes;
};

/// Loads a signature database. The native shape is a JSON array of
/// {id, name, vendor, code_prefixes[]}; entries carrying an exodus-style
/// "code_signature" string ('|'-separated prefixes) are accepted as well.
/// Empty network-related fields are ignored.
inline std::vector<TrackerSignature> load_signature_db(const std::filesystem::path& file) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(util::read_file(file));
    } catch (const nlohmann::json::exception& e) {
        throw MalformedSignatureDbError("signature db parse error: " + std::string(e.what()));
    }
    if (doc.is_object() && doc.contains("trackers")) doc = doc["trackers"];
    if (!doc.is_array()) throw MalformedSignatureDbError("signature db must be a JSON array");

    std::vector<TrackerSignature> db;
    std::set<std::string> seen_ids;
    for (const auto& item : doc) {
        if (!item.is_object()) throw MalformedSignatureDbError("signature entry must be an object");
        TrackerSignature sig;
        if (item.contains("id") && item["id"].is_string()) {
            sig.signature_id = item["id"].get<std::string>();
        } else if (item.contains("id") && item["id"].is_number_integer()) {
            sig.signature_id = std::to_string(item["id"].get<int64_t>());
        }
        sig.tracker_name = item.value("name", "");
        if (sig.signature_id.empty()) sig.signature_id = sig.tracker_name;
        sig.vendor = item.value("vendor", sig.tracker_name);
        if (item.contains("code_prefixes")) {
            for (const auto& p : item["code_prefixes"]) {
                sig.code_prefixes.push_back(p.get<std::string>());
            }
        } else if (item.contains("code_signature")) {
            for (std::string& p : util::split(item["code_signature"].get<std::string>(), '|')) {
                std::string_view t = util::trim(p);
                if (!t.empty()) sig.code_prefixes.emplace_back(t);
            }
        }
        for (std::string& p : sig.code_prefixes) {
            if (!p.empty() && p.back() == '.') p.pop_back(); // exodus prefixes end with '.'
        }
        if (sig.signature_id.empty()) throw MalformedSignatureDbError("signature without id or name");
        if (!seen_ids.insert(sig.signature_id).second) {
            throw MalformedSignatureDbError("duplicate signature id: " + sig.signature_id);
        }
        if (sig.code_prefixes.empty()) {
            throw MalformedSignatureDbError("signature " + sig.signature_id + " has no code prefixes");
        }
        for (const std::string& p : sig.code_prefixes) {
            if (p.find('.') == std::string::npos) {
                throw MalformedSignatureDbError("code prefix without package dot: " + p);
            }
        }
        db.push_back(std::move(sig));
    }
    return db;
}

struct TrackerMatch {
    std::string signature_id;
    std::string matched_prefix;
    std::string example_class;

    friend auto operator<=>(const TrackerMatch&, const TrackerMatch&) = default;
};

struct EmbeddedTrackerReport {
    std::string app_id;
    std::vector<TrackerMatch> matches; // sorted, one per (signature, prefix)
    int distinct_trackers = 0;
    int distinct_vendors = 0;
};

/// A signature matches when some class name equals one of its prefixes or
/// extends it across a '.' package boundary. The example class recorded per
/// match is the lexicographically smallest matching name.
inline EmbeddedTrackerReport match_trackers(const ClassSet& classes,
                                            const std::vector<TrackerSignature>& db) {
    EmbeddedTrackerReport report;
    report.app_id = classes.app_id;
    std::set<std::string> matched_sigs;
    std::set<std::string> matched_vendors;

    for (const TrackerSignature& sig : db) {
        bool sig_matched = false;
        for (const std::string& prefix : sig.code_prefixes) {
            if (prefix.empty()) continue;
            // Sorted-set range scan: candidates sharing the literal prefix.
            auto it = classes.classes.lower_bound(prefix);
            std::string example;
            for (; it != classes.classes.end() && it->compare(0, prefix.size(), prefix) == 0; ++it) {
                const std::string& cls = *it;
                if (cls.size() == prefix.size() || cls[prefix.size()] == '.') {
                    example = cls;
                    break; // set order makes the first hit the smallest
                }
            }
            if (!example.empty()) {
                report.matches.push_back({sig.signature_id, prefix, example});
                sig_matched = true;
            }
        }
        if (sig_matched) {
            matched_sigs.insert(sig.signature_id);
            matched_vendors.insert(sig.vendor);
        }
    }
    std::sort(report.matches.begin(), report.matches.end());
    report.distinct_trackers = static_cast<int>(matched_sigs.size());
    report.distinct_vendors = static_cast<int>(matched_vendors.size());
    return report;
}

} // namespace mhaudit

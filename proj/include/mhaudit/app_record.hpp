// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mhaudit/errors.hpp"
#include "mhaudit/taxonomy.hpp"

namespace mhaudit {

enum class CrawlKind { Manual = 0, Automated = 1 };

inline std::string_view to_id(CrawlKind k) {
    return k == CrawlKind::Manual ? "manual" : "automated";
}

inline CrawlKind parse_crawl_kind(std::string_view id) {
    if (id == "manual") return CrawlKind::Manual;
    if (id == "automated") return CrawlKind::Automated;
    throw ConfigError("unknown crawl kind: " + std::string(id));
}

struct LabelDeclaration {
    LabelCategory label;
    bool collected = false;
    bool shared = false;
};

/// The developer-declared data-practice summary for one app. An unpublished
/// label set carries no declarations.
struct PrivacyLabelSet {
    bool published = false;
    std::vector<LabelDeclaration> declarations;

    std::optional<LabelDeclaration> find(LabelKind kind) const {
        for (const auto& d : declarations) {
            if (d.label.kind == kind) return d;
        }
        return std::nullopt;
    }

    void validate() const {
        if (!published && !declarations.empty()) {
            throw ConfigError("unpublished label set must carry no declarations");
        }
        for (size_t i = 0; i < declarations.size(); ++i) {
            for (size_t j = i + 1; j < declarations.size(); ++j) {
                if (declarations[i].label == declarations[j].label) {
                    throw ConfigError("duplicate label declaration: " +
                                      std::string(to_id(declarations[i].label.kind)));
                }
            }
        }
    }
};

struct CaptureRef {
    std::filesystem::path path;
    CrawlKind kind = CrawlKind::Manual;
};

struct AppRecord {
    std::string app_id;
    std::string display_name;
    FeatureCategory feature_category = FeatureCategory::HealthMonitor;
    PrivacyLabelSet labels;
    std::filesystem::path artifact; // APK, DEX or class-list text; may be empty
    std::vector<CaptureRef> captures;

    void validate() const {
        if (app_id.empty()) throw ConfigError("app record with empty app_id");
        if (artifact.empty() && captures.empty()) {
            throw ConfigError("app " + app_id + " has neither artifact nor captures");
        }
        labels.validate();
    }
};

} // namespace mhaudit

// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhaudit/app_record.hpp"
#include "mhaudit/errors.hpp"
#include "mhaudit/hostclass.hpp"
#include "mhaudit/util/fileio.hpp"

namespace mhaudit {

struct AuditOptions {
    HostMatchMode host_match_mode = HostMatchMode::Exact;
    int numeric_window = 32;
    std::filesystem::path output_dir; // empty → caller decides
};

/// The manifest wires every input of an audit run together. All referenced
/// paths are resolved against the manifest's directory and must exist at
/// load time.
struct AuditManifest {
    std::filesystem::path root; // directory the manifest lives in
    std::filesystem::path taxonomy;
    std::filesystem::path persona;
    std::filesystem::path hosts;
    std::filesystem::path signatures;
    std::filesystem::path policy;
    std::optional<std::filesystem::path> psl;
    AuditOptions options;
    std::vector<AppRecord> apps;

    static AuditManifest load(const std::filesystem::path& file) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(util::read_file(file));
        } catch (const IoError& e) {
            throw ConfigError(e.what());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("manifest parse error in " + file.string() + ": " + e.what());
        }
        if (!doc.is_object()) throw ConfigError("manifest must be a JSON object");

        AuditManifest manifest;
        manifest.root = file.has_parent_path() ? file.parent_path() : ".";

        auto resolve_required = [&](const char* key) {
            if (!doc.contains(key) || !doc[key].is_string()) {
                throw ConfigError(std::string("manifest is missing required path: ") + key);
            }
            std::filesystem::path p = doc[key].get<std::string>();
            if (p.is_relative()) p = manifest.root / p;
            if (!std::filesystem::exists(p)) {
                throw ConfigError(std::string(key) + " path not found: " + p.string());
            }
            return p;
        };

        manifest.taxonomy = resolve_required("taxonomy");
        manifest.persona = resolve_required("persona");
        manifest.hosts = resolve_required("hosts");
        manifest.signatures = resolve_required("signatures");
        manifest.policy = resolve_required("policy");
        if (doc.contains("psl")) {
            std::filesystem::path p = doc["psl"].get<std::string>();
            if (p.is_relative()) p = manifest.root / p;
            if (!std::filesystem::exists(p)) {
                throw ConfigError("psl path not found: " + p.string());
            }
            manifest.psl = p;
        }

        if (doc.contains("options")) {
            const auto& opts = doc["options"];
            if (opts.contains("host_match_mode")) {
                manifest.options.host_match_mode =
                    parse_host_match_mode(opts["host_match_mode"].get<std::string>());
            }
            manifest.options.numeric_window = opts.value("numeric_window", 32);
            if (opts.contains("output_dir")) {
                manifest.options.output_dir = opts["output_dir"].get<std::string>();
            }
        }

        if (!doc.contains("apps") || !doc["apps"].is_array()) {
            throw ConfigError("manifest has no apps array");
        }
        std::set<std::string> seen_ids;
        for (const auto& a : doc["apps"]) {
            AppRecord app;
            app.app_id = a.value("app_id", "");
            app.display_name = a.value("display_name", app.app_id);
            app.feature_category =
                parse_feature_category(a.value("feature_category", ""));
            if (a.contains("labels")) {
                const auto& labels = a["labels"];
                app.labels.published = labels.value("published", false);
                if (labels.contains("declarations")) {
                    for (const auto& d : labels["declarations"]) {
                        LabelDeclaration decl;
                        decl.label = parse_label_category(d.at("label").get<std::string>());
                        decl.collected = d.value("collected", false);
                        decl.shared = d.value("shared", false);
                        app.labels.declarations.push_back(std::move(decl));
                    }
                }
            }
            if (a.contains("artifact")) {
                std::filesystem::path p = a["artifact"].get<std::string>();
                app.artifact = p.is_relative() ? manifest.root / p : p;
            }
            if (a.contains("captures")) {
                for (const auto& c : a["captures"]) {
                    CaptureRef ref;
                    std::filesystem::path p = c.at("path").get<std::string>();
                    ref.path = p.is_relative() ? manifest.root / p : p;
                    ref.kind = parse_crawl_kind(c.value("kind", "manual"));
                    app.captures.push_back(std::move(ref));
                }
            }
            app.validate();
            if (!seen_ids.insert(app.app_id).second) {
                throw ConfigError("duplicate app_id in manifest: " + app.app_id);
            }
            manifest.apps.push_back(std::move(app));
        }
        return manifest;
    }
};

} // namespace mhaudit

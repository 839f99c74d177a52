// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhaudit/stats.hpp"
#include "mhaudit/util/fileio.hpp"

namespace mhaudit {

/// Per-app digest rendered into report.md.
struct AppReportDetail {
    std::string app_id;
    std::string display_name;
    FeatureCategory feature_category = FeatureCategory::HealthMonitor;
    int embedded_trackers = 0;
    int tracker_hosts = 0;
    int nontracker_hosts = 0;
    std::vector<std::string> transmitted_types;       // sorted type ids
    std::vector<std::string> out_of_scope_categories; // display names
    std::vector<std::string> undeclared_labels;       // display names
};

namespace renderdetail {

inline std::string pct(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", value);
    return buf;
}

inline std::string mean2(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

} // namespace renderdetail

/// Writes the report bundle: summary.json, six CSV tables and report.md.
/// Output is byte-identical across runs for identical inputs; percentages
/// are printed with one decimal and always accompanied by raw counts.
inline std::vector<std::filesystem::path> render_report(const CorpusStats& stats,
                                                        const std::vector<AppReportDetail>& apps,
                                                        const std::filesystem::path& out_dir) {
    using renderdetail::csv_escape;
    using renderdetail::mean2;
    using renderdetail::pct;
    namespace fs = std::filesystem;

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::vector<fs::path> written;

    // -- summary.json ------------------------------------------------------
    nlohmann::ordered_json summary;
    summary["corpus"] = {{"apps", stats.apps},
                         {"apps_processed", stats.apps_processed},
                         {"requests_total", stats.requests_total},
                         {"requests_reviewable", stats.requests_reviewable}};
    {
        nlohmann::ordered_json embedded;
        embedded["apps_with_tracker"] = stats.embedded.apps_with_tracker;
        embedded["pct_apps_with_tracker"] = pct(stats.embedded.pct_apps_with_tracker);
        embedded["total_embedded"] = stats.embedded.total_embedded;
        embedded["mean_trackers_per_app"] = mean2(stats.embedded.mean_trackers_per_app);
        nlohmann::ordered_json ranking = nlohmann::ordered_json::array();
        for (const LibraryRank& r : stats.embedded.library_ranking) {
            ranking.push_back({{"tracker", r.tracker_name}, {"apps", r.app_count}});
        }
        embedded["library_ranking"] = std::move(ranking);
        summary["embedded"] = std::move(embedded);
    }
    {
        nlohmann::ordered_json contacted;
        contacted["unique_hosts"] = stats.contacted.unique_hosts;
        contacted["unique_domains"] = stats.contacted.unique_domains;
        contacted["unique_tracker_domains"] = stats.contacted.unique_tracker_domains;
        contacted["apps_more_trackers"] = stats.contacted.apps_more_trackers;
        contacted["apps_zero_trackers"] = stats.contacted.apps_zero_trackers;
        nlohmann::ordered_json ranking = nlohmann::ordered_json::array();
        for (const DomainRank& r : stats.contacted.domain_ranking) {
            ranking.push_back({{"domain", r.domain},
                               {"tracker", r.tracker},
                               {"apps", r.app_count},
                               {"pct_apps", pct(r.pct_apps)}});
        }
        contacted["domain_ranking"] = std::move(ranking);
        summary["contacted"] = std::move(contacted);
    }
    {
        nlohmann::ordered_json tx;
        tx["apps_with_rollup"] = stats.transmissions.apps;
        const char* keys[3] = {"standard", "nonstandard", "medical"};
        for (size_t i = 0; i < 3; ++i) {
            tx[std::string("apps_") + keys[i]] = stats.transmissions.apps_per_specificity[i];
            tx[std::string("pct_apps_") + keys[i]] =
                pct(stats.transmissions.pct_apps_per_specificity[i]);
        }
        summary["transmissions"] = std::move(tx);
    }
    {
        nlohmann::ordered_json scope;
        scope["apps_within_scope"] = stats.scope.apps_within_scope;
        scope["pct_apps_within_scope"] = pct(stats.scope.pct_apps_within_scope);
        summary["scope"] = std::move(scope);
    }
    {
        nlohmann::ordered_json labels;
        labels["apps_without_labels"] = stats.labels.apps_without_labels;
        labels["pct_apps_without_labels"] = pct(stats.labels.pct_apps_without_labels);
        labels["apps_share_without_collect"] = stats.labels.apps_share_without_collect;
        labels["pct_apps_share_without_collect"] = pct(stats.labels.pct_apps_share_without_collect);
        labels["apps_with_undeclared"] = stats.labels.apps_with_undeclared;
        labels["pct_apps_with_undeclared"] = pct(stats.labels.pct_apps_with_undeclared);
        summary["labels"] = std::move(labels);
    }
    {
        fs::path path = out_dir / "summary.json";
        util::write_file(path, summary.dump(2) + "\n");
        written.push_back(path);
    }

    // -- embedded_trackers.csv ---------------------------------------------
    {
        std::ostringstream csv;
        csv << "tracker,app_count\n";
        for (const LibraryRank& r : stats.embedded.library_ranking) {
            csv << csv_escape(r.tracker_name) << "," << r.app_count << "\n";
        }
        fs::path path = out_dir / "embedded_trackers.csv";
        util::write_file(path, csv.str());
        written.push_back(path);
    }

    // -- contacted_hosts.csv -----------------------------------------------
    {
        std::ostringstream csv;
        csv << "app_id,tracker_hosts,nontracker_hosts,tracker_domains\n";
        for (const AppHostCounts& row : stats.contacted.per_app) {
            csv << csv_escape(row.app_id) << "," << row.tracker_hosts << ","
                << row.nontracker_hosts << "," << row.tracker_domains << "\n";
        }
        fs::path path = out_dir / "contacted_hosts.csv";
        util::write_file(path, csv.str());
        written.push_back(path);
    }

    // -- transmissions_by_type.csv -------------------------------------------
    {
        std::ostringstream csv;
        csv << "data_type,category,specificity,apps_to_nontrackers,apps_to_trackers\n";
        for (const TypeTransmission& t : stats.transmissions.by_type) {
            csv << t.data_type_id << "," << to_id(t.category) << "," << to_id(t.specificity) << ","
                << t.apps_to_nontrackers << "," << t.apps_to_trackers << "\n";
        }
        fs::path path = out_dir / "transmissions_by_type.csv";
        util::write_file(path, csv.str());
        written.push_back(path);
    }

    // -- transmissions_by_specificity.csv ------------------------------------
    {
        std::ostringstream csv;
        csv << "specificity,crawl_kind,app_count\n";
        for (const SpecificityCrawlCount& row : stats.transmissions.by_specificity_crawl) {
            csv << to_id(row.specificity) << "," << to_id(row.crawl_kind) << "," << row.app_count
                << "\n";
        }
        fs::path path = out_dir / "transmissions_by_specificity.csv";
        util::write_file(path, csv.str());
        written.push_back(path);
    }

    // -- scope_matrix.csv ----------------------------------------------------
    // Out-of-scope cells carry a '*' suffix on the count.
    {
        std::ostringstream csv;
        csv << "feature_category,apps";
        for (DataCategory c : kDataCategories) csv << "," << csv_escape(std::string(display_name(c)));
        csv << "\n";
        for (FeatureCategory feature : kFeatureCategories) {
            csv << csv_escape(std::string(display_name(feature)));
            csv << "," << stats.scope.apps_per_category.at(feature);
            const auto& row = stats.scope.cells.at(feature);
            for (size_t i = 0; i < kDataCategories.size(); ++i) {
                csv << "," << row[i].app_count << (row[i].in_scope ? "" : "*");
            }
            csv << "\n";
        }
        fs::path path = out_dir / "scope_matrix.csv";
        util::write_file(path, csv.str());
        written.push_back(path);
    }

    // -- label_accuracy.csv --------------------------------------------------
    {
        std::ostringstream csv;
        csv << "label,declared_ok_collect,undeclared_collect,declared_ok_share,undeclared_share,"
               "unobserved_declarations\n";
        for (const LabelAccuracyRow& row : stats.labels.per_label) {
            csv << csv_escape(std::string(display_name(row.label))) << ","
                << row.declared_ok_collect << "," << row.undeclared_collect << ","
                << row.declared_ok_share << "," << row.undeclared_share << ","
                << row.unobserved_declarations << "\n";
        }
        fs::path path = out_dir / "label_accuracy.csv";
        util::write_file(path, csv.str());
        written.push_back(path);
    }

    // -- report.md -----------------------------------------------------------
    {
        std::ostringstream md;
        md << "# Privacy audit report\n\n";
        md << "Apps audited: " << stats.apps << " (" << stats.apps_processed
           << " fully processed)\n\n";
        md << "## Observation\n\n";
        md << "- Apps embedding at least one tracker: " << stats.embedded.apps_with_tracker << "/"
           << stats.embedded.apps << " (" << pct(stats.embedded.pct_apps_with_tracker) << "%)\n";
        md << "- Mean embedded trackers per app: " << mean2(stats.embedded.mean_trackers_per_app)
           << "\n";
        md << "- Contacted hosts: " << stats.contacted.unique_hosts << " across "
           << stats.contacted.unique_domains << " domains ("
           << stats.contacted.unique_tracker_domains << " tracker domains)\n";
        md << "- Apps contacting more tracker than non-tracker hosts: "
           << stats.contacted.apps_more_trackers << "; apps contacting none: "
           << stats.contacted.apps_zero_trackers << "\n";
        md << "- Requests reviewed: " << stats.requests_reviewable << " of "
           << stats.requests_total << " (non-zero body)\n";
        md << "- Apps transmitting standard PII: "
           << pct(stats.transmissions.pct_apps_per_specificity[0]) << "%, nonstandard: "
           << pct(stats.transmissions.pct_apps_per_specificity[1]) << "%, medical: "
           << pct(stats.transmissions.pct_apps_per_specificity[2]) << "%\n\n";
        md << "## Expectation\n\n";
        md << "- Apps within expected scope: " << stats.scope.apps_within_scope << "/"
           << stats.scope.apps << " (" << pct(stats.scope.pct_apps_within_scope) << "%)\n\n";
        md << "## Declaration\n\n";
        md << "- Apps without privacy labels: " << pct(stats.labels.pct_apps_without_labels)
           << "%\n";
        md << "- Apps declaring sharing without collection: "
           << pct(stats.labels.pct_apps_share_without_collect) << "%\n";
        md << "- Apps with at least one undeclared practice: "
           << pct(stats.labels.pct_apps_with_undeclared) << "%\n\n";
        if (!stats.embedded.library_ranking.empty()) {
            md << "## Most embedded trackers\n\n";
            md << "| Tracker | Apps |\n|---|---|\n";
            size_t shown = 0;
            for (const LibraryRank& r : stats.embedded.library_ranking) {
                md << "| " << r.tracker_name << " | " << r.app_count << " |\n";
                if (++shown == 10) break;
            }
            md << "\n";
        }
        if (!apps.empty()) {
            md << "## Per-app findings\n\n";
            for (const AppReportDetail& app : apps) {
                md << "### " << app.app_id << "\n\n";
                if (!app.display_name.empty() && app.display_name != app.app_id) {
                    md << "- Name: " << app.display_name << "\n";
                }
                md << "- Feature category: " << display_name(app.feature_category) << "\n";
                md << "- Embedded trackers: " << app.embedded_trackers << "\n";
                md << "- Contacted hosts: " << app.tracker_hosts << " tracker / "
                   << app.nontracker_hosts << " non-tracker\n";
                if (!app.transmitted_types.empty()) {
                    md << "- Transmitted data types:";
                    for (const std::string& t : app.transmitted_types) md << " " << t;
                    md << "\n";
                }
                if (!app.out_of_scope_categories.empty()) {
                    md << "- Out-of-scope transmissions:";
                    for (const std::string& c : app.out_of_scope_categories) md << " " << c;
                    md << "\n";
                }
                if (!app.undeclared_labels.empty()) {
                    md << "- Undeclared practices:";
                    for (const std::string& l : app.undeclared_labels) md << " " << l;
                    md << "\n";
                }
                md << "\n";
            }
        }
        fs::path path = out_dir / "report.md";
        util::write_file(path, md.str());
        written.push_back(path);
    }

    return written;
}

} // namespace mhaudit

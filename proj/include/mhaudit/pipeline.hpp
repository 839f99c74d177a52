// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhaudit/assess.hpp"
#include "mhaudit/capture.hpp"
#include "mhaudit/manifest.hpp"
#include "mhaudit/matcher.hpp"
#include "mhaudit/render.hpp"
#include "mhaudit/scan.hpp"
#include "mhaudit/staticscan.hpp"
#include "mhaudit/stats.hpp"

namespace mhaudit {

/// Shared, immutable inputs loaded once per run. A config failure here is
/// fatal (exit 2); per-app failures later are not.
struct LoadedConfig {
    Taxonomy taxonomy;
    Persona persona;
    MatcherSet matchers;
    HostsList hosts;
    PublicSuffixList psl = PublicSuffixList::embedded_snapshot();
    std::vector<TrackerSignature> signature_db;
    ExpectationPolicy policy = ExpectationPolicy::default_policy();
    AuditOptions options;

    static LoadedConfig load(const AuditManifest& manifest) {
        LoadedConfig config;
        config.taxonomy = Taxonomy::load(manifest.taxonomy);
        config.persona = Persona::load(manifest.persona);
        try {
            config.matchers =
                compile_persona(config.persona, config.taxonomy, manifest.options.numeric_window);
        } catch (const AuditError& e) {
            throw ConfigError(std::string("persona rejected: ") + e.what());
        }
        config.hosts = load_hosts_list(manifest.hosts);
        if (manifest.psl) config.psl = PublicSuffixList::load(*manifest.psl);
        config.signature_db = load_signature_db(manifest.signatures);
        config.policy = ExpectationPolicy::load(manifest.policy);
        config.options = manifest.options;
        return config;
    }
};

struct LedgerEntry {
    std::string app_id;
    std::string stage;
    std::string message;
};

/// Everything observed for one app before aggregation.
struct AppAuditResult {
    std::string app_id;
    bool failed = false;
    LedgerEntry error;
    EmbeddedTrackerReport embedded;
    AppHostContacts contacts;
    std::vector<DetectionHit> hits;
    size_t requests_total = 0;
    size_t requests_reviewable = 0;
    std::vector<std::string> warnings;
};

/// Static-scan stage for one app. Failures are captured, never thrown.
inline void process_app_static(const LoadedConfig& config, const AppRecord& app,
                               AppAuditResult& result) {
    try {
        if (!app.artifact.empty()) {
            ClassSet classes = extract_class_names(app.artifact, app.app_id, &result.warnings);
            result.embedded = match_trackers(classes, config.signature_db);
        }
    } catch (const std::exception& e) {
        result.failed = true;
        result.error = {app.app_id, "staticscan", e.what()};
    }
}

/// Capture + detection stage for one app: ingest, label, count, scan.
inline void process_app_capture(const LoadedConfig& config, const AppRecord& app,
                                AppAuditResult& result) {
    try {
        std::vector<FlowRecord> flows;
        size_t offset = 0;
        for (const CaptureRef& ref : app.captures) {
            IngestResult ingested = ingest_capture(ref.path, app.app_id, ref.kind, offset);
            offset += ingested.flows.size();
            for (const std::string& w : ingested.warnings) result.warnings.push_back(w);
            flows.insert(flows.end(), std::make_move_iterator(ingested.flows.begin()),
                         std::make_move_iterator(ingested.flows.end()));
        }
        label_flows(flows, config.hosts, config.options.host_match_mode);
        result.requests_total = flows.size();
        result.requests_reviewable = filter_reviewable(flows).size();
        result.contacts = collect_host_contacts(app.app_id, flows);
        scan_app_flows(config.matchers, flows, result.hits);
    } catch (const std::exception& e) {
        result.failed = true;
        result.error = {app.app_id, "capture", e.what()};
    }
}

/// Runs every stage for one app; a failed stage short-circuits the rest.
inline AppAuditResult process_app(const LoadedConfig& config, const AppRecord& app) {
    AppAuditResult result;
    result.app_id = app.app_id;
    result.contacts.app_id = app.app_id;
    result.embedded.app_id = app.app_id;
    process_app_static(config, app, result);
    if (!result.failed) process_app_capture(config, app, result);
    return result;
}

/// Maps process_app over the corpus with a worker pool. Results land in
/// manifest order, so the job count never changes the output.
inline std::vector<AppAuditResult> process_corpus(const LoadedConfig& config,
                                                  const std::vector<AppRecord>& apps, int jobs) {
    std::vector<AppAuditResult> results(apps.size());
    if (jobs < 1) jobs = 1;
    jobs = std::min<int>(jobs, std::max<size_t>(apps.size(), 1));

    if (jobs == 1) {
        for (size_t i = 0; i < apps.size(); ++i) results[i] = process_app(config, apps[i]);
        return results;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int t = 0; t < jobs; ++t) {
        workers.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= apps.size()) break;
                results[i] = process_app(config, apps[i]);
            }
        });
    }
    for (std::thread& w : workers) w.join();
    return results;
}

// ---------------------------------------------------------------------------
// Aggregation

struct CorpusAudit {
    std::vector<AppAuditResult> per_app; // manifest order, failed apps included
    DetectionSet detections;             // successful apps only
    std::vector<std::pair<FeatureCategory, std::vector<ScopeFinding>>> scope_findings;
    std::vector<DeclarationVerdict> verdicts;
    CorpusStats stats;
    std::vector<AppReportDetail> details;
    std::vector<LedgerEntry> ledger;
};

inline CorpusAudit aggregate_corpus(const LoadedConfig& config, const AuditManifest& manifest,
                                    std::vector<AppAuditResult> per_app) {
    CorpusAudit audit;
    audit.per_app = std::move(per_app);

    std::vector<const AppRecord*> ok_apps;
    std::vector<std::string> ok_ids;
    std::vector<EmbeddedTrackerReport> reports;
    std::vector<AppHostContacts> contacts;
    for (size_t i = 0; i < audit.per_app.size(); ++i) {
        const AppAuditResult& r = audit.per_app[i];
        if (r.failed) {
            audit.ledger.push_back(r.error);
            continue;
        }
        ok_apps.push_back(&manifest.apps[i]);
        ok_ids.push_back(r.app_id);
        reports.push_back(r.embedded);
        contacts.push_back(r.contacts);
        audit.detections.hits.insert(audit.detections.hits.end(), r.hits.begin(), r.hits.end());
        audit.stats.requests_total += r.requests_total;
        audit.stats.requests_reviewable += r.requests_reviewable;
    }
    std::sort(audit.detections.hits.begin(), audit.detections.hits.end());
    audit.detections.hits.erase(
        std::unique(audit.detections.hits.begin(), audit.detections.hits.end()),
        audit.detections.hits.end());
    audit.detections.rebuild_rollup(ok_ids);

    audit.stats.apps = static_cast<int>(manifest.apps.size());
    audit.stats.apps_processed = static_cast<int>(ok_ids.size());

    std::vector<AppLabelMeta> label_meta;
    for (const AppRecord* app : ok_apps) {
        auto findings = evaluate_scope(config.policy, audit.detections, *app, config.taxonomy);
        auto verdicts = evaluate_labels(*app, audit.detections, config.taxonomy);
        audit.scope_findings.emplace_back(app->feature_category, findings);
        audit.verdicts.insert(audit.verdicts.end(), verdicts.begin(), verdicts.end());
        label_meta.push_back({app->app_id, app->labels.published,
                              declares_sharing_without_collection(app->labels)});
    }

    if (!reports.empty()) {
        audit.stats.embedded = embedded_stats(reports, config.signature_db);
    }
    audit.stats.contacted = contact_stats(contacts, config.psl);
    audit.stats.transmissions = transmission_stats(audit.detections, config.taxonomy);
    audit.stats.scope = scope_matrix(audit.scope_findings, config.policy);
    audit.stats.labels = label_accuracy(audit.verdicts, label_meta);

    // Per-app report digests.
    for (size_t i = 0, ok = 0; i < audit.per_app.size(); ++i) {
        const AppAuditResult& r = audit.per_app[i];
        if (r.failed) continue;
        const AppRecord& app = *ok_apps[ok];
        AppReportDetail detail;
        detail.app_id = app.app_id;
        detail.display_name = app.display_name;
        detail.feature_category = app.feature_category;
        detail.embedded_trackers = r.embedded.distinct_trackers;
        detail.tracker_hosts = audit.stats.contacted.per_app[ok].tracker_hosts;
        detail.nontracker_hosts = audit.stats.contacted.per_app[ok].nontracker_hosts;
        if (auto it = audit.detections.rollup.find(app.app_id);
            it != audit.detections.rollup.end()) {
            std::set<std::string> types;
            for (const auto& [kind, type_map] : it->second.by_kind) {
                for (const auto& [type, flags] : type_map) types.insert(type);
            }
            detail.transmitted_types.assign(types.begin(), types.end());
        }
        for (const ScopeFinding& f : audit.scope_findings[ok].second) {
            if (f.transmitted && !f.in_scope) {
                detail.out_of_scope_categories.emplace_back(display_name(f.data_category));
            }
        }
        for (const DeclarationVerdict& v : audit.verdicts) {
            if (v.app_id != app.app_id) continue;
            if (v.verdicts.count(VerdictFlag::UndeclaredCollection) ||
                v.verdicts.count(VerdictFlag::UndeclaredSharing)) {
                detail.undeclared_labels.emplace_back(display_name(v.label));
            }
        }
        audit.details.push_back(std::move(detail));
        ++ok;
    }
    return audit;
}

// ---------------------------------------------------------------------------
// Intermediate artifacts (stage outputs under <out>/intermediate/)

namespace stagefiles {

inline std::filesystem::path dir(const std::filesystem::path& out) { return out / "intermediate"; }
inline std::filesystem::path embedded(const std::filesystem::path& out) {
    return dir(out) / "embedded_reports.json";
}
inline std::filesystem::path contacts(const std::filesystem::path& out) {
    return dir(out) / "host_contacts.json";
}
inline std::filesystem::path hits(const std::filesystem::path& out) {
    return dir(out) / "hits.jsonl";
}
inline std::filesystem::path detect_summary(const std::filesystem::path& out) {
    return dir(out) / "detect_summary.json";
}
inline std::filesystem::path scope(const std::filesystem::path& out) {
    return dir(out) / "scope_findings.json";
}
inline std::filesystem::path verdicts(const std::filesystem::path& out) {
    return dir(out) / "verdicts.csv";
}

} // namespace stagefiles

inline void write_embedded_reports(const std::vector<AppAuditResult>& per_app,
                                   const std::filesystem::path& out_dir) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const AppAuditResult& r : per_app) {
        if (r.failed) continue;
        nlohmann::ordered_json matches = nlohmann::ordered_json::array();
        for (const TrackerMatch& m : r.embedded.matches) {
            matches.push_back({{"signature", m.signature_id},
                               {"prefix", m.matched_prefix},
                               {"example", m.example_class}});
        }
        doc.push_back({{"app", r.app_id},
                       {"matches", matches},
                       {"distinct_trackers", r.embedded.distinct_trackers},
                       {"distinct_vendors", r.embedded.distinct_vendors}});
    }
    util::write_file(stagefiles::embedded(out_dir), doc.dump(2) + "\n");
}

inline std::vector<EmbeddedTrackerReport> read_embedded_reports(const std::filesystem::path& out_dir) {
    auto doc = nlohmann::json::parse(util::read_file(stagefiles::embedded(out_dir)));
    std::vector<EmbeddedTrackerReport> reports;
    for (const auto& r : doc) {
        EmbeddedTrackerReport report;
        report.app_id = r.at("app").get<std::string>();
        for (const auto& m : r.at("matches")) {
            report.matches.push_back({m.at("signature").get<std::string>(),
                                      m.at("prefix").get<std::string>(),
                                      m.at("example").get<std::string>()});
        }
        report.distinct_trackers = r.at("distinct_trackers").get<int>();
        report.distinct_vendors = r.at("distinct_vendors").get<int>();
        reports.push_back(std::move(report));
    }
    return reports;
}

inline void write_host_contacts(const std::vector<AppAuditResult>& per_app,
                                const std::filesystem::path& out_dir) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const AppAuditResult& r : per_app) {
        if (r.failed) continue;
        nlohmann::ordered_json hosts = nlohmann::ordered_json::array();
        for (const auto& [host, label] : r.contacts.hosts) {
            hosts.push_back({host, std::string(to_id(label))});
        }
        doc.push_back({{"app", r.app_id}, {"hosts", hosts}});
    }
    util::write_file(stagefiles::contacts(out_dir), doc.dump(2) + "\n");
}

inline std::vector<AppHostContacts> read_host_contacts(const std::filesystem::path& out_dir) {
    auto doc = nlohmann::json::parse(util::read_file(stagefiles::contacts(out_dir)));
    std::vector<AppHostContacts> contacts;
    for (const auto& entry : doc) {
        AppHostContacts c;
        c.app_id = entry.at("app").get<std::string>();
        for (const auto& h : entry.at("hosts")) {
            c.hosts.emplace(h.at(0).get<std::string>(),
                            h.at(1).get<std::string>() == "tracker" ? HostLabel::Tracker
                                                                    : HostLabel::NonTracker);
        }
        contacts.push_back(std::move(c));
    }
    return contacts;
}

inline void write_hits(const std::vector<DetectionHit>& hits,
                       const std::filesystem::path& out_dir) {
    std::string lines;
    for (const DetectionHit& hit : hits) {
        lines += to_json(hit).dump();
        lines += "\n";
    }
    util::write_file(stagefiles::hits(out_dir), lines);
}

inline std::vector<DetectionHit> read_hits(const std::filesystem::path& file) {
    std::string text = util::read_file(file);
    std::vector<DetectionHit> hits;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line = (eol == std::string::npos)
                                    ? std::string_view(text).substr(pos)
                                    : std::string_view(text).substr(pos, eol - pos);
        pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
        line = util::trim(line);
        if (line.empty()) continue;
        hits.push_back(hit_from_json(nlohmann::json::parse(line)));
    }
    return hits;
}

inline void write_detect_summary(const std::vector<AppAuditResult>& per_app,
                                 const std::filesystem::path& out_dir) {
    nlohmann::ordered_json apps = nlohmann::ordered_json::array();
    size_t total = 0;
    size_t reviewable = 0;
    for (const AppAuditResult& r : per_app) {
        if (r.failed) continue;
        apps.push_back({{"app", r.app_id},
                        {"requests_total", r.requests_total},
                        {"requests_reviewable", r.requests_reviewable}});
        total += r.requests_total;
        reviewable += r.requests_reviewable;
    }
    nlohmann::ordered_json doc;
    doc["apps"] = std::move(apps);
    doc["requests_total"] = total;
    doc["requests_reviewable"] = reviewable;
    util::write_file(stagefiles::detect_summary(out_dir), doc.dump(2) + "\n");
}

inline void write_scope_findings(const std::vector<std::pair<FeatureCategory,
                                                             std::vector<ScopeFinding>>>& findings,
                                 const std::filesystem::path& out_dir) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& [feature, app_findings] : findings) {
        for (const ScopeFinding& f : app_findings) {
            doc.push_back({{"app", f.app_id},
                           {"feature_category", std::string(to_id(feature))},
                           {"category", std::string(to_id(f.data_category))},
                           {"transmitted", f.transmitted},
                           {"in_scope", f.in_scope}});
        }
    }
    util::write_file(stagefiles::scope(out_dir), doc.dump(2) + "\n");
}

/// Verdict export: one CSV row per (app, label).
inline void write_verdicts_csv(const std::vector<DeclarationVerdict>& verdicts,
                               const std::filesystem::path& path) {
    std::string csv = "app_id,label,observed_collected,observed_shared,declared_collected,"
                      "declared_shared,verdicts\n";
    for (const DeclarationVerdict& v : verdicts) {
        csv += v.app_id;
        csv += ",";
        csv += to_id(v.label);
        csv += ",";
        csv += v.observed_collected ? "true" : "false";
        csv += ",";
        csv += v.observed_shared ? "true" : "false";
        csv += ",";
        csv += v.declared_collected ? "true" : "false";
        csv += ",";
        csv += v.declared_shared ? "true" : "false";
        csv += ",";
        bool first = true;
        for (VerdictFlag f : v.verdicts) {
            if (!first) csv += ";";
            csv += to_id(f);
            first = false;
        }
        csv += "\n";
    }
    util::write_file(path, csv);
}

inline void write_error_ledger(const std::vector<LedgerEntry>& ledger,
                               const std::filesystem::path& out_dir) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const LedgerEntry& e : ledger) {
        doc.push_back({{"app", e.app_id}, {"stage", e.stage}, {"message", e.message}});
    }
    util::write_file(out_dir / "errors.json", doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Stage entry points (each independently re-runnable over the manifest)

/// scan-static: writes intermediate/embedded_reports.json.
inline std::vector<LedgerEntry> stage_scan_static(const AuditManifest& manifest,
                                                  const std::filesystem::path& out_dir) {
    LoadedConfig config = LoadedConfig::load(manifest);
    std::vector<AppAuditResult> per_app(manifest.apps.size());
    std::vector<LedgerEntry> ledger;
    for (size_t i = 0; i < manifest.apps.size(); ++i) {
        per_app[i].app_id = manifest.apps[i].app_id;
        per_app[i].embedded.app_id = manifest.apps[i].app_id;
        process_app_static(config, manifest.apps[i], per_app[i]);
        if (per_app[i].failed) ledger.push_back(per_app[i].error);
    }
    write_embedded_reports(per_app, out_dir);
    return ledger;
}

/// detect: writes intermediate host_contacts.json, hits.jsonl and
/// detect_summary.json.
inline std::vector<LedgerEntry> stage_detect(const AuditManifest& manifest,
                                             const std::filesystem::path& out_dir, int jobs = 1) {
    LoadedConfig config = LoadedConfig::load(manifest);
    std::vector<AppAuditResult> per_app(manifest.apps.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= manifest.apps.size()) break;
            per_app[i].app_id = manifest.apps[i].app_id;
            per_app[i].contacts.app_id = manifest.apps[i].app_id;
            process_app_capture(config, manifest.apps[i], per_app[i]);
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> workers;
        for (int t = 0; t < jobs; ++t) workers.emplace_back(worker);
        for (std::thread& w : workers) w.join();
    }

    std::vector<LedgerEntry> ledger;
    std::vector<DetectionHit> hits;
    for (const AppAuditResult& r : per_app) {
        if (r.failed) ledger.push_back(r.error);
        else hits.insert(hits.end(), r.hits.begin(), r.hits.end());
    }
    std::sort(hits.begin(), hits.end());
    hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
    write_host_contacts(per_app, out_dir);
    write_hits(hits, out_dir);
    write_detect_summary(per_app, out_dir);
    return ledger;
}

/// Reassembles per-app results from stage intermediates. Apps must appear in
/// both the static and detect outputs to count as processed; everything else
/// is excluded exactly as a failed app would be in a single run.
inline CorpusAudit aggregate_from_intermediates(const LoadedConfig& config,
                                                const AuditManifest& manifest,
                                                const std::filesystem::path& out_dir) {
    std::map<std::string, EmbeddedTrackerReport> embedded;
    for (EmbeddedTrackerReport& r : read_embedded_reports(out_dir)) {
        embedded[r.app_id] = std::move(r);
    }
    std::map<std::string, AppHostContacts> contacts;
    for (AppHostContacts& c : read_host_contacts(out_dir)) {
        contacts[c.app_id] = std::move(c);
    }
    std::map<std::string, std::pair<size_t, size_t>> counters;
    {
        auto doc = nlohmann::json::parse(util::read_file(stagefiles::detect_summary(out_dir)));
        for (const auto& a : doc.at("apps")) {
            counters[a.at("app").get<std::string>()] = {
                a.at("requests_total").get<size_t>(), a.at("requests_reviewable").get<size_t>()};
        }
    }
    std::map<std::string, std::vector<DetectionHit>> hits_by_app;
    for (DetectionHit& hit : read_hits(stagefiles::hits(out_dir))) {
        hits_by_app[hit.app_id].push_back(std::move(hit));
    }

    std::vector<AppAuditResult> per_app(manifest.apps.size());
    for (size_t i = 0; i < manifest.apps.size(); ++i) {
        AppAuditResult& r = per_app[i];
        r.app_id = manifest.apps[i].app_id;
        auto emb = embedded.find(r.app_id);
        auto cnt = counters.find(r.app_id);
        if (emb == embedded.end() || cnt == counters.end()) {
            r.failed = true;
            r.error = {r.app_id, "intermediates", "absent from stage outputs"};
            continue;
        }
        r.embedded = emb->second;
        if (auto con = contacts.find(r.app_id); con != contacts.end()) r.contacts = con->second;
        else r.contacts.app_id = r.app_id;
        r.requests_total = cnt->second.first;
        r.requests_reviewable = cnt->second.second;
        if (auto h = hits_by_app.find(r.app_id); h != hits_by_app.end()) r.hits = h->second;
    }
    return aggregate_corpus(config, manifest, std::move(per_app));
}

/// assess: exports scope findings and the per-(app,label) verdict CSV.
inline void stage_assess(const AuditManifest& manifest, const std::filesystem::path& out_dir) {
    LoadedConfig config = LoadedConfig::load(manifest);
    CorpusAudit audit = aggregate_from_intermediates(config, manifest, out_dir);
    write_scope_findings(audit.scope_findings, out_dir);
    write_verdicts_csv(audit.verdicts, stagefiles::verdicts(out_dir));
}

/// report: renders the final bundle from stage intermediates.
inline std::vector<std::filesystem::path> stage_report(const AuditManifest& manifest,
                                                       const std::filesystem::path& out_dir) {
    LoadedConfig config = LoadedConfig::load(manifest);
    CorpusAudit audit = aggregate_from_intermediates(config, manifest, out_dir);
    return render_report(audit.stats, audit.details, out_dir);
}

// ---------------------------------------------------------------------------
// Whole pipeline

struct PipelineOptions {
    int jobs = 1;
    std::filesystem::path output_dir = "out";
    bool keep_intermediates = false;
};

struct PipelineResult {
    int exit_code = 0; // 0 ok, 1 partial (ledger non-empty); fatal errors throw
    CorpusAudit audit;
    std::vector<std::filesystem::path> bundle;
};

/// Executes every stage over the manifest and writes the report bundle.
/// Per-app failures land in the error ledger (exit 1) without aborting the
/// corpus; configuration problems throw ConfigError (exit 2 at the CLI).
inline PipelineResult run_pipeline(const AuditManifest& manifest, const PipelineOptions& options) {
    LoadedConfig config = LoadedConfig::load(manifest);
    std::vector<AppAuditResult> per_app = process_corpus(config, manifest.apps, options.jobs);
    PipelineResult result;
    result.audit = aggregate_corpus(config, manifest, std::move(per_app));
    result.bundle = render_report(result.audit.stats, result.audit.details, options.output_dir);

    if (options.keep_intermediates) {
        write_embedded_reports(result.audit.per_app, options.output_dir);
        write_host_contacts(result.audit.per_app, options.output_dir);
        write_hits(result.audit.detections.hits, options.output_dir);
        write_detect_summary(result.audit.per_app, options.output_dir);
        write_scope_findings(result.audit.scope_findings, options.output_dir);
        write_verdicts_csv(result.audit.verdicts, stagefiles::verdicts(options.output_dir));
    }
    if (!result.audit.ledger.empty()) {
        write_error_ledger(result.audit.ledger, options.output_dir);
        result.exit_code = 1;
    }
    return result;
}

} // namespace mhaudit

// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mhaudit/assess.hpp"
#include "mhaudit/errors.hpp"
#include "mhaudit/hostclass.hpp"
#include "mhaudit/scan.hpp"
#include "mhaudit/staticscan.hpp"
#include "mhaudit/taxonomy.hpp"

namespace mhaudit {

// ---------------------------------------------------------------------------
// Embedded trackers (static scan aggregate)

struct LibraryRank {
    std::string tracker_name;
    int app_count = 0;
};

struct EmbeddedStats {
    int apps = 0;
    int apps_with_tracker = 0;
    double pct_apps_with_tracker = 0.0;
    int total_embedded = 0; // sum of distinct trackers over apps
    double mean_trackers_per_app = 0.0;
    std::vector<LibraryRank> library_ranking; // count desc, name asc
};

/// Aggregates per-app static-scan reports. Ranking ties break on the tracker
/// name so output is reproducible.
inline EmbeddedStats embedded_stats(const std::vector<EmbeddedTrackerReport>& reports,
                                    const std::vector<TrackerSignature>& db) {
    if (reports.empty()) throw EmptyCorpusError("no static-scan reports");

    std::map<std::string, std::string> names;
    for (const TrackerSignature& sig : db) names[sig.signature_id] = sig.tracker_name;

    EmbeddedStats stats;
    stats.apps = static_cast<int>(reports.size());
    std::map<std::string, int> per_signature;
    for (const EmbeddedTrackerReport& report : reports) {
        if (report.distinct_trackers > 0) ++stats.apps_with_tracker;
        stats.total_embedded += report.distinct_trackers;
        std::set<std::string> sigs;
        for (const TrackerMatch& m : report.matches) sigs.insert(m.signature_id);
        for (const std::string& sig : sigs) ++per_signature[sig];
    }
    stats.pct_apps_with_tracker = 100.0 * stats.apps_with_tracker / stats.apps;
    stats.mean_trackers_per_app = static_cast<double>(stats.total_embedded) / stats.apps;

    for (const auto& [sig, count] : per_signature) {
        auto it = names.find(sig);
        stats.library_ranking.push_back({it != names.end() ? it->second : sig, count});
    }
    std::sort(stats.library_ranking.begin(), stats.library_ranking.end(),
              [](const LibraryRank& a, const LibraryRank& b) {
                  if (a.app_count != b.app_count) return a.app_count > b.app_count;
                  return a.tracker_name < b.tracker_name;
              });
    return stats;
}

// ---------------------------------------------------------------------------
// Contacted hosts

/// Distinct labeled hosts contacted by one app (all requests count, including
/// zero-length ones).
struct AppHostContacts {
    std::string app_id;
    std::set<std::pair<std::string, HostLabel>> hosts;
};

inline AppHostContacts collect_host_contacts(const std::string& app_id,
                                             const std::vector<FlowRecord>& flows) {
    AppHostContacts contacts;
    contacts.app_id = app_id;
    for (const FlowRecord& f : flows) {
        contacts.hosts.emplace(f.host, f.host_label.value_or(HostLabel::NonTracker));
    }
    return contacts;
}

struct AppHostCounts {
    std::string app_id;
    int tracker_hosts = 0;
    int nontracker_hosts = 0;
    int tracker_domains = 0;
};

struct DomainRank {
    std::string domain;
    bool tracker = false; // any contributing host was tracker-labeled
    int app_count = 0;
    double pct_apps = 0.0;
};

struct ContactStats {
    std::vector<AppHostCounts> per_app;     // manifest order
    std::vector<DomainRank> domain_ranking; // count desc, domain asc
    int apps_more_trackers = 0;             // strictly more tracker than non-tracker hosts
    int apps_zero_trackers = 0;
    int unique_hosts = 0;
    int unique_domains = 0;
    int unique_tracker_domains = 0;
};

inline ContactStats contact_stats(const std::vector<AppHostContacts>& apps,
                                  const PublicSuffixList& psl = PublicSuffixList::embedded_snapshot()) {
    ContactStats stats;
    std::set<std::string> all_hosts;
    std::map<std::string, bool> domain_tracker; // domain -> saw tracker host
    std::map<std::string, std::set<std::string>> domain_apps;

    for (const AppHostContacts& app : apps) {
        AppHostCounts counts;
        counts.app_id = app.app_id;
        std::set<std::string> tracker_domains;
        for (const auto& [host, label] : app.hosts) {
            all_hosts.insert(host);
            if (label == HostLabel::Tracker) ++counts.tracker_hosts;
            else ++counts.nontracker_hosts;
            std::string domain = registrable_domain(host, psl);
            domain_apps[domain].insert(app.app_id);
            if (label == HostLabel::Tracker) {
                domain_tracker[domain] = true;
                tracker_domains.insert(domain);
            } else {
                domain_tracker.emplace(domain, false);
            }
        }
        counts.tracker_domains = static_cast<int>(tracker_domains.size());
        if (counts.tracker_hosts > counts.nontracker_hosts) ++stats.apps_more_trackers;
        if (counts.tracker_hosts == 0) ++stats.apps_zero_trackers;
        stats.per_app.push_back(std::move(counts));
    }

    stats.unique_hosts = static_cast<int>(all_hosts.size());
    stats.unique_domains = static_cast<int>(domain_apps.size());
    for (const auto& [domain, tracker] : domain_tracker) {
        if (tracker) ++stats.unique_tracker_domains;
    }
    for (const auto& [domain, contacting] : domain_apps) {
        DomainRank rank;
        rank.domain = domain;
        rank.tracker = domain_tracker[domain];
        rank.app_count = static_cast<int>(contacting.size());
        rank.pct_apps = apps.empty() ? 0.0 : 100.0 * rank.app_count / apps.size();
        stats.domain_ranking.push_back(std::move(rank));
    }
    std::sort(stats.domain_ranking.begin(), stats.domain_ranking.end(),
              [](const DomainRank& a, const DomainRank& b) {
                  if (a.app_count != b.app_count) return a.app_count > b.app_count;
                  return a.domain < b.domain;
              });
    return stats;
}

// ---------------------------------------------------------------------------
// Transmissions

struct TypeTransmission {
    std::string data_type_id;
    DataCategory category = DataCategory::DeviceIds;
    Specificity specificity = Specificity::Standard;
    int apps_to_nontrackers = 0;
    int apps_to_trackers = 0;
};

struct SpecificityCrawlCount {
    Specificity specificity = Specificity::Standard;
    CrawlKind crawl_kind = CrawlKind::Manual;
    int app_count = 0;
};

struct TransmissionStats {
    std::vector<TypeTransmission> by_type; // ordered by (specificity, category, type id)
    std::vector<SpecificityCrawlCount> by_specificity_crawl;
    // Apps transmitting at least one type of the given specificity, either
    // crawl kind, any destination.
    std::array<int, 3> apps_per_specificity{0, 0, 0};
    std::array<double, 3> pct_apps_per_specificity{0.0, 0.0, 0.0};
    int apps = 0;
};

inline TransmissionStats transmission_stats(const DetectionSet& detections,
                                            const Taxonomy& taxonomy) {
    TransmissionStats stats;
    stats.apps = static_cast<int>(detections.rollup.size());

    // Canonical type order.
    std::vector<TaxonomyEntry> entries = taxonomy.entries();
    std::stable_sort(entries.begin(), entries.end(), [](const TaxonomyEntry& a, const TaxonomyEntry& b) {
        auto ka = std::tuple(specificity_of(a.category), a.category, a.id);
        auto kb = std::tuple(specificity_of(b.category), b.category, b.id);
        return ka < kb;
    });

    for (const TaxonomyEntry& entry : entries) {
        TypeTransmission t;
        t.data_type_id = entry.id;
        t.category = entry.category;
        t.specificity = specificity_of(entry.category);
        for (const auto& [app, rollup] : detections.rollup) {
            DestinationFlags flags = rollup.flags_for(entry.id);
            if (flags.to_nontracker) ++t.apps_to_nontrackers;
            if (flags.to_tracker) ++t.apps_to_trackers;
        }
        stats.by_type.push_back(std::move(t));
    }

    for (Specificity spec : kSpecificities) {
        for (CrawlKind kind : {CrawlKind::Manual, CrawlKind::Automated}) {
            SpecificityCrawlCount row;
            row.specificity = spec;
            row.crawl_kind = kind;
            for (const auto& [app, rollup] : detections.rollup) {
                auto it = rollup.by_kind.find(kind);
                if (it == rollup.by_kind.end()) continue;
                bool any = false;
                for (const auto& [type, flags] : it->second) {
                    if (taxonomy.lookup(type).specificity == spec) {
                        any = true;
                        break;
                    }
                }
                if (any) ++row.app_count;
            }
            stats.by_specificity_crawl.push_back(row);
        }
    }

    for (const auto& [app, rollup] : detections.rollup) {
        std::array<bool, 3> seen{false, false, false};
        for (const auto& [kind, types] : rollup.by_kind) {
            for (const auto& [type, flags] : types) {
                seen[static_cast<size_t>(taxonomy.lookup(type).specificity)] = true;
            }
        }
        for (size_t i = 0; i < 3; ++i) {
            if (seen[i]) ++stats.apps_per_specificity[i];
        }
    }
    for (size_t i = 0; i < 3; ++i) {
        stats.pct_apps_per_specificity[i] =
            stats.apps == 0 ? 0.0 : 100.0 * stats.apps_per_specificity[i] / stats.apps;
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Scope matrix

struct ScopeMatrixCell {
    int app_count = 0;
    bool in_scope = true;
};

struct ScopeMatrix {
    // Table of (feature category, data category) cells plus row app totals.
    std::map<FeatureCategory, std::array<ScopeMatrixCell, 7>> cells;
    std::map<FeatureCategory, int> apps_per_category;
    int apps_within_scope = 0; // apps with no out-of-scope transmission
    int apps = 0;
    double pct_apps_within_scope = 0.0;
};

/// Builds the feature-by-data matrix from per-app findings. Cell flags come
/// from the findings themselves (they already encode the policy).
inline ScopeMatrix scope_matrix(const std::vector<std::pair<FeatureCategory,
                                                            std::vector<ScopeFinding>>>& findings,
                                const ExpectationPolicy& policy) {
    ScopeMatrix matrix;
    for (FeatureCategory feature : kFeatureCategories) {
        auto& row = matrix.cells[feature];
        for (size_t i = 0; i < kDataCategories.size(); ++i) {
            row[i].in_scope = policy.in_scope(feature, kDataCategories[i]);
        }
        matrix.apps_per_category[feature] = 0;
    }

    matrix.apps = static_cast<int>(findings.size());
    for (const auto& [feature, app_findings] : findings) {
        ++matrix.apps_per_category[feature];
        bool violation = false;
        for (const ScopeFinding& f : app_findings) {
            size_t idx = static_cast<size_t>(f.data_category);
            if (f.transmitted) {
                ++matrix.cells[feature][idx].app_count;
                if (!f.in_scope) violation = true;
            }
        }
        if (!violation) ++matrix.apps_within_scope;
    }
    matrix.pct_apps_within_scope =
        matrix.apps == 0 ? 0.0 : 100.0 * matrix.apps_within_scope / matrix.apps;
    return matrix;
}

// ---------------------------------------------------------------------------
// Label accuracy

struct LabelAccuracyRow {
    LabelKind label = LabelKind::DeviceOrOtherIds;
    int declared_ok_collect = 0;
    int undeclared_collect = 0;
    int declared_ok_share = 0;
    int undeclared_share = 0;
    int unobserved_declarations = 0;
};

struct AppLabelMeta {
    std::string app_id;
    bool labels_published = false;
    bool declares_share_without_collect = false;
};

struct LabelStats {
    std::vector<LabelAccuracyRow> per_label; // relevant label order
    int apps = 0;
    int apps_without_labels = 0;
    int apps_share_without_collect = 0;
    int apps_with_undeclared = 0;
    double pct_apps_without_labels = 0.0;
    double pct_apps_share_without_collect = 0.0;
    double pct_apps_with_undeclared = 0.0;
};

inline LabelStats label_accuracy(const std::vector<DeclarationVerdict>& verdicts,
                                 const std::vector<AppLabelMeta>& apps) {
    LabelStats stats;
    stats.apps = static_cast<int>(apps.size());

    std::map<LabelKind, LabelAccuracyRow> rows;
    for (LabelKind label : kRelevantLabels) rows[label].label = label;
    std::set<std::string> undeclared_apps;
    for (const DeclarationVerdict& v : verdicts) {
        LabelAccuracyRow& row = rows[v.label];
        if (v.verdicts.count(VerdictFlag::CorrectCollection)) ++row.declared_ok_collect;
        if (v.verdicts.count(VerdictFlag::UndeclaredCollection)) ++row.undeclared_collect;
        if (v.verdicts.count(VerdictFlag::CorrectSharing)) ++row.declared_ok_share;
        if (v.verdicts.count(VerdictFlag::UndeclaredSharing)) ++row.undeclared_share;
        if (v.verdicts.count(VerdictFlag::UnobservedDeclaration)) ++row.unobserved_declarations;
        if (v.verdicts.count(VerdictFlag::UndeclaredCollection) ||
            v.verdicts.count(VerdictFlag::UndeclaredSharing)) {
            undeclared_apps.insert(v.app_id);
        }
    }
    for (LabelKind label : kRelevantLabels) stats.per_label.push_back(rows[label]);

    for (const AppLabelMeta& app : apps) {
        if (!app.labels_published) ++stats.apps_without_labels;
        if (app.declares_share_without_collect) ++stats.apps_share_without_collect;
    }
    stats.apps_with_undeclared = static_cast<int>(undeclared_apps.size());
    if (stats.apps > 0) {
        stats.pct_apps_without_labels = 100.0 * stats.apps_without_labels / stats.apps;
        stats.pct_apps_share_without_collect = 100.0 * stats.apps_share_without_collect / stats.apps;
        stats.pct_apps_with_undeclared = 100.0 * stats.apps_with_undeclared / stats.apps;
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Bundle

struct CorpusStats {
    int apps = 0;
    int apps_processed = 0;
    size_t requests_total = 0;
    size_t requests_reviewable = 0;
    EmbeddedStats embedded;
    ContactStats contacted;
    TransmissionStats transmissions;
    ScopeMatrix scope;
    LabelStats labels;
};

} // namespace mhaudit

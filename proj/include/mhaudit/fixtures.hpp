// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhaudit/assess.hpp"
#include "mhaudit/capture.hpp"
#include "mhaudit/errors.hpp"
#include "mhaudit/matcher.hpp"
#include "mhaudit/persona.hpp"
#include "mhaudit/scan.hpp"
#include "mhaudit/staticscan.hpp"
#include "mhaudit/taxonomy.hpp"
#include "mhaudit/util/encoding.hpp"
#include "mhaudit/util/fileio.hpp"

namespace mhaudit {

// Seeded synthetic corpora with exact ground truth. The generator encodes
// persona values forward into traffic bytes; recovering them is entirely the
// detector's problem.

struct LeakPlan {
    std::string data_type_id;
    VariantKind variant = VariantKind::Plain;
    bool to_tracker = false;
    CrawlKind kind = CrawlKind::Manual;
    HitLocation location = HitLocation::Body;
};

struct AppPlan {
    FeatureCategory feature = FeatureCategory::HealthMonitor;
    std::vector<std::string> embedded_signatures;
    std::vector<LeakPlan> leaks;
    PrivacyLabelSet labels;
    int tracker_hosts = 1;
    int nontracker_hosts = 1;
};

/// Integer targets for corpus-level statistics. When present, the generator
/// solves a plan hitting these numbers exactly instead of using `apps`.
struct TargetStats {
    int apps = 0;
    int apps_with_tracker = 0;
    int total_embeddings = 0;
    int total_requests = 0;
    int reviewable_requests = 0;
    int apps_more_trackers = 0;
    int apps_zero_trackers = 0;
};

struct FixtureConfig {
    uint64_t seed = 1;
    int decoy_flows_per_app = 3;
    std::vector<AppPlan> apps;
    std::optional<TargetStats> target_stats;

    static FixtureConfig from_json(const nlohmann::json& doc);
    static FixtureConfig load(const std::filesystem::path& file) {
        try {
            return from_json(nlohmann::json::parse(util::read_file(file)));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("fixture config parse error: " + std::string(e.what()));
        }
    }
};

struct PlantedHit {
    std::string app_id;
    std::string flow_id;
    std::string data_type_id;
    VariantKind variant = VariantKind::Plain;
    HitLocation location = HitLocation::Body;
    bool to_tracker = false;
    CrawlKind kind = CrawlKind::Manual;

    friend auto operator<=>(const PlantedHit&, const PlantedHit&) = default;
};

struct GroundTruth {
    std::vector<std::string> apps;
    std::map<std::string, std::set<std::string>> embeddings; // app -> signature ids
    std::vector<PlantedHit> hits;
    std::vector<ScopeFinding> expected_scope;
    std::vector<DeclarationVerdict> expected_verdicts;

    nlohmann::ordered_json to_json() const;
    static GroundTruth from_json(const nlohmann::json& doc);
    static GroundTruth load(const std::filesystem::path& file) {
        try {
            return from_json(nlohmann::json::parse(util::read_file(file)));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("ground truth parse error: " + std::string(e.what()));
        }
    }
};

// ---------------------------------------------------------------------------
// Fixture signature database: 20 synthetic trackers over 15 vendors; the
// first 19 span exactly 14 vendors.

inline std::vector<TrackerSignature> fixture_signature_db() {
    std::vector<TrackerSignature> db;
    for (int i = 0; i < 20; ++i) {
        TrackerSignature sig;
        char id[8];
        std::snprintf(id, sizeof(id), "trk%02d", i);
        sig.signature_id = id;
        sig.tracker_name = "Fixture Tracker " + std::string(id + 3);
        int vendor = (i < 10) ? i / 2 : i - 5;
        sig.vendor = "Fixture Vendor " + std::to_string(vendor);
        sig.code_prefixes = {"com.fixture." + std::string(id) + ".sdk"};
        db.push_back(std::move(sig));
    }
    return db;
}

namespace fixdetail {

inline std::string tracker_host(int app_index, int k) {
    return "a" + std::to_string(k) + ".fixtrk" + std::to_string((app_index + k) % 12) + ".example";
}

inline std::string nontracker_host(int app_index, int k) {
    return "api" + std::to_string(k) + ".app" + std::to_string(app_index) + ".example";
}

inline std::string letters_token(std::mt19937_64& rng, size_t len) {
    static constexpr char kAlpha[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
    std::string s;
    s.reserve(len);
    for (size_t i = 0; i < len; ++i) s.push_back(kAlpha[rng() % 52]);
    return s;
}

struct PlannedFlow {
    CrawlKind kind = CrawlKind::Manual;
    std::string method = "POST";
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
};

/// Picks a persona value usable for the requested variant, or throws
/// InvalidPlan.
inline std::string pick_value(const PersonaAttribute& attr, VariantKind variant) {
    if (variant == VariantKind::KeyedNumeric) {
        if (!attr.numeric) {
            throw InvalidPlanError("keyed_numeric leak planned for non-numeric type " +
                                   attr.data_type_id);
        }
        return attr.values.front();
    }
    if (attr.numeric) {
        throw InvalidPlanError("numeric type " + attr.data_type_id +
                               " only supports keyed_numeric leaks");
    }
    if (variant == VariantKind::PercentEncoded) {
        for (const std::string& v : attr.values) {
            if (util::percent_encode(v) != v) return v;
        }
        throw InvalidPlanError("no percent-encodable value for " + attr.data_type_id);
    }
    return attr.values.front();
}

inline std::string encode_needle(const std::string& value, VariantKind variant) {
    switch (variant) {
    case VariantKind::Plain: return value;
    case VariantKind::PercentEncoded: return util::percent_encode(value);
    case VariantKind::Base64: return util::base64_encode(value, /*url_safe=*/false, /*padded=*/true);
    case VariantKind::Md5Hex: return util::md5_hex(util::to_lower(value));
    case VariantKind::Sha1Hex: return util::sha1_hex(util::to_lower(value));
    case VariantKind::Sha256Hex: return util::sha256_hex(util::to_lower(value));
    case VariantKind::KeyedNumeric: return value;
    }
    return value;
}

/// Renders one leak into a flow. `container_index` cycles the body container
/// (raw text, form, JSON, multipart) for Body-located plants.
inline PlannedFlow render_leak(const LeakPlan& leak, const PersonaAttribute& attr,
                               const std::string& host, int container_index) {
    PlannedFlow flow;
    flow.kind = leak.kind;
    std::string value = pick_value(attr, leak.variant);
    std::string needle = encode_needle(value, leak.variant);
    bool keyed = leak.variant == VariantKind::KeyedNumeric;
    std::string hint = keyed ? attr.key_hints.front() : "f";

    std::string path = "/collect";
    std::string query;
    switch (leak.location) {
    case HitLocation::Path:
        path = keyed ? "/m/" + hint + "/" + needle : "/u/" + needle;
        flow.body = "padding";
        break;
    case HitLocation::Query:
        query = keyed ? hint + "=" + needle : "d=" + needle;
        flow.body = "padding";
        break;
    case HitLocation::Header:
        flow.headers.emplace_back("X-Client-Data", keyed ? hint + "=" + needle : needle);
        flow.body = "padding";
        break;
    case HitLocation::Body: {
        switch (container_index % 4) {
        case 0: // raw text
            flow.body = keyed ? hint + "=" + needle : "data " + needle + " end";
            break;
        case 1: // form
            flow.headers.emplace_back("Content-Type", "application/x-www-form-urlencoded");
            flow.body = (keyed ? hint : std::string("f")) + "=" + needle;
            break;
        case 2: // json
            flow.headers.emplace_back("Content-Type", "application/json");
            flow.body = std::string("{\"") + (keyed ? hint : "f") + "\":\"" + needle + "\"}";
            break;
        default: // multipart
            flow.headers.emplace_back("Content-Type", "multipart/form-data; boundary=fixb");
            flow.body = "--fixb\r\nContent-Disposition: form-data; name=\"" +
                        (keyed ? hint : std::string("f")) + "\"\r\n\r\n" + needle +
                        "\r\n--fixb--\r\n";
            break;
        }
        break;
    }
    }
    flow.url = "https://" + host + path + (query.empty() ? "" : "?" + query);
    return flow;
}

inline PlannedFlow render_decoy(std::mt19937_64& rng, const std::string& host, bool with_body,
                                CrawlKind kind) {
    PlannedFlow flow;
    flow.kind = kind;
    flow.method = with_body ? "POST" : "GET";
    flow.url = "https://" + host + "/v1/" + letters_token(rng, 8);
    if (with_body) {
        flow.headers.emplace_back("Content-Type", "application/json");
        flow.body = "{\"" + letters_token(rng, 8) + "\":\"" + letters_token(rng, 20) + "\",\"" +
                    letters_token(rng, 6) + "\":\"" + letters_token(rng, 24) + "\"}";
    }
    return flow;
}

inline nlohmann::ordered_json flow_to_jsonl(const PlannedFlow& flow, const std::string& app_id,
                                            int64_t ts) {
    nlohmann::ordered_json headers = nlohmann::ordered_json::array();
    for (const auto& [name, value] : flow.headers) {
        headers.push_back({name, value});
    }
    return {{"app", app_id},
            {"ts", ts},
            {"kind", std::string(to_id(flow.kind))},
            {"method", flow.method},
            {"url", flow.url},
            {"headers", headers},
            {"body_b64", util::base64_encode(flow.body)}};
}

} // namespace fixdetail

// ---------------------------------------------------------------------------
// Config (de)serialization

inline FixtureConfig FixtureConfig::from_json(const nlohmann::json& doc) {
    FixtureConfig config;
    config.seed = doc.value("seed", static_cast<uint64_t>(1));
    config.decoy_flows_per_app = doc.value("decoy_flows_per_app", 3);
    if (doc.contains("target_stats")) {
        const auto& t = doc["target_stats"];
        TargetStats target;
        target.apps = t.value("apps", 0);
        target.apps_with_tracker = t.value("apps_with_tracker", 0);
        target.total_embeddings = t.value("total_embeddings", 0);
        target.total_requests = t.value("total_requests", 0);
        target.reviewable_requests = t.value("reviewable_requests", 0);
        target.apps_more_trackers = t.value("apps_more_trackers", 0);
        target.apps_zero_trackers = t.value("apps_zero_trackers", 0);
        config.target_stats = target;
    }
    if (doc.contains("apps")) {
        for (const auto& a : doc["apps"]) {
            AppPlan plan;
            plan.feature = parse_feature_category(a.value("feature_category", "health_monitor"));
            if (a.contains("embedded")) {
                for (const auto& sig : a["embedded"]) {
                    plan.embedded_signatures.push_back(sig.get<std::string>());
                }
            }
            if (a.contains("leaks")) {
                for (const auto& l : a["leaks"]) {
                    LeakPlan leak;
                    leak.data_type_id = l.at("type").get<std::string>();
                    leak.variant = parse_variant_kind(l.value("variant", "plain"));
                    leak.to_tracker = l.value("tracker", false);
                    leak.kind = parse_crawl_kind(l.value("kind", "manual"));
                    leak.location = parse_hit_location(l.value("location", "body"));
                    plan.leaks.push_back(std::move(leak));
                }
            }
            if (a.contains("labels")) {
                const auto& labels = a["labels"];
                plan.labels.published = labels.value("published", false);
                if (labels.contains("declarations")) {
                    for (const auto& d : labels["declarations"]) {
                        LabelDeclaration decl;
                        decl.label = parse_label_category(d.at("label").get<std::string>());
                        decl.collected = d.value("collected", false);
                        decl.shared = d.value("shared", false);
                        plan.labels.declarations.push_back(std::move(decl));
                    }
                }
            }
            plan.tracker_hosts = a.value("tracker_hosts", 1);
            plan.nontracker_hosts = a.value("nontracker_hosts", 1);
            config.apps.push_back(std::move(plan));
        }
    }
    return config;
}

// ---------------------------------------------------------------------------
// GroundTruth (de)serialization

inline nlohmann::ordered_json GroundTruth::to_json() const {
    nlohmann::ordered_json doc;
    doc["apps"] = apps;
    nlohmann::ordered_json emb = nlohmann::ordered_json::object();
    for (const auto& [app, sigs] : embeddings) {
        emb[app] = std::vector<std::string>(sigs.begin(), sigs.end());
    }
    doc["embeddings"] = std::move(emb);
    nlohmann::ordered_json hit_list = nlohmann::ordered_json::array();
    for (const PlantedHit& h : hits) {
        hit_list.push_back({{"app", h.app_id},
                            {"flow", h.flow_id},
                            {"type", h.data_type_id},
                            {"variant", std::string(to_id(h.variant))},
                            {"location", std::string(to_id(h.location))},
                            {"tracker", h.to_tracker},
                            {"kind", std::string(to_id(h.kind))}});
    }
    doc["hits"] = std::move(hit_list);
    nlohmann::ordered_json scope = nlohmann::ordered_json::array();
    for (const ScopeFinding& f : expected_scope) {
        scope.push_back({{"app", f.app_id},
                         {"category", std::string(to_id(f.data_category))},
                         {"transmitted", f.transmitted},
                         {"in_scope", f.in_scope}});
    }
    doc["expected_scope"] = std::move(scope);
    nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
    for (const DeclarationVerdict& v : expected_verdicts) {
        std::vector<std::string> flags;
        for (VerdictFlag f : v.verdicts) flags.emplace_back(to_id(f));
        verdicts.push_back({{"app", v.app_id},
                            {"label", std::string(to_id(v.label))},
                            {"observed_collected", v.observed_collected},
                            {"observed_shared", v.observed_shared},
                            {"declared_collected", v.declared_collected},
                            {"declared_shared", v.declared_shared},
                            {"verdicts", flags}});
    }
    doc["expected_verdicts"] = std::move(verdicts);
    return doc;
}

inline GroundTruth GroundTruth::from_json(const nlohmann::json& doc) {
    GroundTruth truth;
    for (const auto& a : doc.at("apps")) truth.apps.push_back(a.get<std::string>());
    if (doc.contains("embeddings")) {
        for (const auto& [app, sigs] : doc["embeddings"].items()) {
            for (const auto& sig : sigs) truth.embeddings[app].insert(sig.get<std::string>());
        }
    }
    for (const auto& h : doc.at("hits")) {
        PlantedHit hit;
        hit.app_id = h.at("app").get<std::string>();
        hit.flow_id = h.at("flow").get<std::string>();
        hit.data_type_id = h.at("type").get<std::string>();
        hit.variant = parse_variant_kind(h.at("variant").get<std::string>());
        hit.location = parse_hit_location(h.at("location").get<std::string>());
        hit.to_tracker = h.at("tracker").get<bool>();
        hit.kind = parse_crawl_kind(h.at("kind").get<std::string>());
        truth.hits.push_back(std::move(hit));
    }
    if (doc.contains("expected_scope")) {
        for (const auto& f : doc["expected_scope"]) {
            ScopeFinding finding;
            finding.app_id = f.at("app").get<std::string>();
            finding.data_category = parse_data_category(f.at("category").get<std::string>());
            finding.transmitted = f.at("transmitted").get<bool>();
            finding.in_scope = f.at("in_scope").get<bool>();
            truth.expected_scope.push_back(std::move(finding));
        }
    }
    if (doc.contains("expected_verdicts")) {
        for (const auto& v : doc["expected_verdicts"]) {
            DeclarationVerdict verdict;
            verdict.app_id = v.at("app").get<std::string>();
            verdict.label = parse_label_category(v.at("label").get<std::string>()).kind;
            verdict.observed_collected = v.at("observed_collected").get<bool>();
            verdict.observed_shared = v.at("observed_shared").get<bool>();
            verdict.declared_collected = v.at("declared_collected").get<bool>();
            verdict.declared_shared = v.at("declared_shared").get<bool>();
            for (const auto& f : v.at("verdicts")) {
                verdict.verdicts.insert(parse_verdict_flag(f.get<std::string>()));
            }
            truth.expected_verdicts.push_back(std::move(verdict));
        }
    }
    return truth;
}

// ---------------------------------------------------------------------------
// Generation

/// Expands a target-stats block into an explicit per-app plan.
inline std::vector<AppPlan> solve_target_plan(const TargetStats& target) {
    if (target.apps <= 0) throw InvalidPlanError("target_stats.apps must be positive");
    if (target.apps_with_tracker > target.apps ||
        target.apps_zero_trackers + target.apps_more_trackers > target.apps) {
        throw InvalidPlanError("target_stats counts exceed the app count");
    }
    std::vector<AppPlan> plans(target.apps);

    // Distinct embedded trackers: spread total_embeddings over the first
    // apps_with_tracker apps, at least one each.
    if (target.apps_with_tracker > 0) {
        int base = target.total_embeddings / target.apps_with_tracker;
        int rem = target.total_embeddings % target.apps_with_tracker;
        if (base < 1 || base + 1 > 20) {
            throw InvalidPlanError("total_embeddings not distributable over tracked apps");
        }
        for (int i = 0; i < target.apps_with_tracker; ++i) {
            int count = base + (i < rem ? 1 : 0);
            for (int j = 0; j < count; ++j) {
                char id[8];
                std::snprintf(id, sizeof(id), "trk%02d", (i + j) % 20);
                plans[i].embedded_signatures.push_back(id);
            }
        }
    }

    // Host contacts: the first apps_more_trackers apps get 3 tracker hosts to
    // 1 non-tracker; the trailing apps_zero_trackers get none; everyone else
    // sits at 1:2.
    for (int i = 0; i < target.apps; ++i) {
        if (i < target.apps_more_trackers) {
            plans[i].tracker_hosts = 3;
            plans[i].nontracker_hosts = 1;
        } else if (i >= target.apps - target.apps_zero_trackers) {
            plans[i].tracker_hosts = 0;
            plans[i].nontracker_hosts = 2;
        } else {
            plans[i].tracker_hosts = 1;
            plans[i].nontracker_hosts = 2;
        }
        plans[i].feature = kFeatureCategories[i % kFeatureCategories.size()];
    }
    return plans;
}

struct GeneratedCorpus {
    std::filesystem::path manifest_path;
    GroundTruth truth;
};

/// Writes a complete manifest-rooted corpus. Identical (config, seed) pairs
/// produce byte-identical directories.
inline GeneratedCorpus generate_corpus(const FixtureConfig& config,
                                       const std::filesystem::path& out_dir) {
    using namespace fixdetail;
    namespace fs = std::filesystem;

    const Taxonomy& taxonomy = Taxonomy::default_taxonomy();
    const Persona& persona = Persona::default_persona();
    std::vector<TrackerSignature> db = fixture_signature_db();
    std::map<std::string, const TrackerSignature*> db_index;
    for (const TrackerSignature& sig : db) db_index[sig.signature_id] = &sig;

    std::vector<AppPlan> plans =
        config.target_stats ? solve_target_plan(*config.target_stats) : config.apps;
    if (plans.empty()) throw InvalidPlanError("fixture config plans no apps");

    // Request-count shaping for target mode.
    std::vector<int> total_requests(plans.size(), 0);
    std::vector<int> reviewable_requests(plans.size(), 0);
    if (config.target_stats) {
        const TargetStats& t = *config.target_stats;
        int napps = static_cast<int>(plans.size());
        if (t.reviewable_requests > t.total_requests) {
            throw InvalidPlanError("reviewable_requests exceeds total_requests");
        }
        for (int i = 0; i < napps; ++i) {
            total_requests[i] = t.total_requests / napps + (i < t.total_requests % napps ? 1 : 0);
            reviewable_requests[i] =
                t.reviewable_requests / napps + (i < t.reviewable_requests % napps ? 1 : 0);
            int hosts = plans[i].tracker_hosts + plans[i].nontracker_hosts;
            if (total_requests[i] < reviewable_requests[i] || total_requests[i] < hosts) {
                throw InvalidPlanError("per-app request budget too small");
            }
        }
    }

    fs::create_directories(out_dir);
    util::write_file(out_dir / "taxonomy.json", taxonomy.to_json().dump(2) + "\n");
    util::write_file(out_dir / "persona.json", persona.to_json().dump(2) + "\n");
    util::write_file(out_dir / "policy.json",
                     ExpectationPolicy::default_policy().to_json().dump(2) + "\n");
    {
        nlohmann::ordered_json sigs = nlohmann::ordered_json::array();
        for (const TrackerSignature& sig : db) {
            sigs.push_back({{"id", sig.signature_id},
                            {"name", sig.tracker_name},
                            {"vendor", sig.vendor},
                            {"code_prefixes", sig.code_prefixes}});
        }
        util::write_file(out_dir / "signatures.json", sigs.dump(2) + "\n");
    }

    GroundTruth truth;
    std::set<std::string> tracker_hostnames;
    nlohmann::ordered_json manifest_apps = nlohmann::ordered_json::array();

    for (size_t i = 0; i < plans.size(); ++i) {
        const AppPlan& plan = plans[i];
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%03zu", i);
        std::string app_id = "com.fixture.app" + std::string(buf);
        truth.apps.push_back(app_id);
        fs::path app_dir = out_dir / "apps" / app_id;
        fs::create_directories(app_dir);

        // Per-app RNG derived from the seed and index keeps generation
        // order-independent across apps.
        std::mt19937_64 rng(config.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));

        // --- static artifact -------------------------------------------------
        std::string classes;
        std::set<std::string> embedded;
        for (const std::string& sig_id : plan.embedded_signatures) {
            auto it = db_index.find(sig_id);
            if (it == db_index.end()) throw InvalidPlanError("unknown signature id: " + sig_id);
            classes += it->second->code_prefixes.front() + ".Main\n";
            embedded.insert(sig_id);
        }
        for (int d = 0; d < 5; ++d) {
            classes += "com.decoy." + letters_token(rng, 6) + "." + letters_token(rng, 8) + "\n";
        }
        util::write_file(app_dir / "classes.txt", classes);
        truth.embeddings[app_id] = embedded;

        // --- host pools ------------------------------------------------------
        std::vector<std::string> trackers;
        std::vector<std::string> nontrackers;
        for (int k = 0; k < plan.tracker_hosts; ++k) {
            trackers.push_back(tracker_host(static_cast<int>(i), k));
            tracker_hostnames.insert(trackers.back());
        }
        for (int k = 0; k < plan.nontracker_hosts; ++k) {
            nontrackers.push_back(nontracker_host(static_cast<int>(i), k));
        }
        if (nontrackers.empty() && trackers.empty()) {
            nontrackers.push_back(nontracker_host(static_cast<int>(i), 0));
        }
        // Any leak to a tracker needs at least one tracker host.
        bool needs_tracker = std::any_of(plan.leaks.begin(), plan.leaks.end(),
                                         [](const LeakPlan& l) { return l.to_tracker; });
        if (needs_tracker && trackers.empty()) {
            trackers.push_back(tracker_host(static_cast<int>(i), 0));
            tracker_hostnames.insert(trackers.back());
        }
        bool needs_nontracker = std::any_of(plan.leaks.begin(), plan.leaks.end(),
                                            [](const LeakPlan& l) { return !l.to_tracker; });
        if (needs_nontracker && nontrackers.empty()) {
            nontrackers.push_back(nontracker_host(static_cast<int>(i), 0));
        }

        // --- flows -----------------------------------------------------------
        std::vector<PlannedFlow> flows;
        int container_counter = 0;
        std::vector<std::tuple<size_t, LeakPlan>> leak_slots; // flow index, plan
        for (const LeakPlan& leak : plan.leaks) {
            const PersonaAttribute* attr = persona.find(leak.data_type_id);
            if (attr == nullptr) throw InvalidPlanError("unknown data type: " + leak.data_type_id);
            const std::string& host = leak.to_tracker
                                          ? trackers[container_counter % trackers.size()]
                                          : nontrackers[container_counter % nontrackers.size()];
            flows.push_back(render_leak(leak, *attr, host, container_counter));
            leak_slots.emplace_back(flows.size() - 1, leak);
            ++container_counter;
        }

        // One empty-bodied decoy per pool host so contact counts are exact.
        std::vector<std::string> pool;
        pool.insert(pool.end(), trackers.begin(), trackers.end());
        pool.insert(pool.end(), nontrackers.begin(), nontrackers.end());
        for (const std::string& host : pool) {
            flows.push_back(render_decoy(rng, host, /*with_body=*/false,
                                         flows.size() % 2 == 0 ? CrawlKind::Manual
                                                               : CrawlKind::Automated));
        }

        if (config.target_stats) {
            // Pad to the per-app request budget: reviewable first.
            int want_total = total_requests[i];
            int want_bodies = reviewable_requests[i];
            int have_bodies = 0;
            for (const PlannedFlow& f : flows) {
                if (!f.body.empty()) ++have_bodies;
            }
            if (have_bodies > want_bodies || static_cast<int>(flows.size()) > want_total) {
                throw InvalidPlanError("planned flows exceed the target request budget");
            }
            int host_cursor = 0;
            auto next_host = [&]() -> const std::string& {
                return pool[host_cursor++ % pool.size()];
            };
            while (have_bodies < want_bodies) {
                flows.push_back(render_decoy(rng, next_host(), true,
                                             have_bodies % 2 == 0 ? CrawlKind::Manual
                                                                  : CrawlKind::Automated));
                ++have_bodies;
            }
            while (static_cast<int>(flows.size()) < want_total) {
                flows.push_back(render_decoy(rng, next_host(), false,
                                             flows.size() % 2 == 0 ? CrawlKind::Manual
                                                                   : CrawlKind::Automated));
            }
        } else {
            for (int d = 0; d < config.decoy_flows_per_app; ++d) {
                flows.push_back(render_decoy(rng, pool[d % pool.size()], d % 2 == 0,
                                             d % 2 == 0 ? CrawlKind::Manual
                                                        : CrawlKind::Automated));
            }
        }

        // Stable flow ids replicate ingest order: the manual file is listed
        // first and indices keep counting into the automated file.
        std::vector<size_t> manual_idx;
        std::vector<size_t> automated_idx;
        for (size_t f = 0; f < flows.size(); ++f) {
            (flows[f].kind == CrawlKind::Manual ? manual_idx : automated_idx).push_back(f);
        }
        std::map<size_t, std::string> flow_ids;
        size_t counter = 0;
        for (size_t f : manual_idx) {
            flow_ids[f] = capdetail::make_flow_id(app_id, CrawlKind::Manual, counter++);
        }
        for (size_t f : automated_idx) {
            flow_ids[f] = capdetail::make_flow_id(app_id, CrawlKind::Automated, counter++);
        }

        int64_t ts = 1700000000000 + static_cast<int64_t>(i) * 60000;
        std::string manual_lines;
        std::string automated_lines;
        for (size_t f : manual_idx) {
            manual_lines += flow_to_jsonl(flows[f], app_id, ts + static_cast<int64_t>(f)).dump();
            manual_lines += "\n";
        }
        for (size_t f : automated_idx) {
            automated_lines += flow_to_jsonl(flows[f], app_id, ts + static_cast<int64_t>(f)).dump();
            automated_lines += "\n";
        }
        util::write_file(app_dir / "manual.jsonl", manual_lines);
        util::write_file(app_dir / "automated.jsonl", automated_lines);

        for (auto& [flow_index, leak] : leak_slots) {
            PlantedHit hit;
            hit.app_id = app_id;
            hit.flow_id = flow_ids[flow_index];
            hit.data_type_id = leak.data_type_id;
            hit.variant = leak.variant;
            hit.location = leak.location;
            hit.to_tracker = leak.to_tracker;
            hit.kind = leak.kind;
            truth.hits.push_back(std::move(hit));
        }

        // --- expected assessments -------------------------------------------
        std::map<LabelKind, DestinationFlags> label_flags;
        std::set<DataCategory> transmitted_categories;
        for (const LeakPlan& leak : plan.leaks) {
            auto info = taxonomy.lookup(leak.data_type_id);
            transmitted_categories.insert(info.category);
            DestinationFlags& flags = label_flags[info.label];
            if (leak.to_tracker) flags.to_tracker = true;
            else flags.to_nontracker = true;
        }
        for (DataCategory category : kDataCategories) {
            ScopeFinding finding;
            finding.app_id = app_id;
            finding.data_category = category;
            finding.transmitted = transmitted_categories.count(category) > 0;
            finding.in_scope = ExpectationPolicy::default_policy().in_scope(plan.feature, category);
            truth.expected_scope.push_back(std::move(finding));
        }
        for (LabelKind label : kRelevantLabels) {
            DestinationFlags flags;
            if (auto it = label_flags.find(label); it != label_flags.end()) flags = it->second;
            bool dc = false;
            bool ds = false;
            if (plan.labels.published) {
                if (auto decl = plan.labels.find(label)) {
                    dc = decl->collected;
                    ds = decl->shared;
                }
            }
            truth.expected_verdicts.push_back(
                assess_declaration(app_id, label, flags.to_nontracker || flags.to_tracker,
                                   flags.to_tracker, dc, ds));
        }

        // --- manifest entry ---------------------------------------------------
        nlohmann::ordered_json labels_json;
        labels_json["published"] = plan.labels.published;
        nlohmann::ordered_json decls = nlohmann::ordered_json::array();
        for (const LabelDeclaration& d : plan.labels.declarations) {
            decls.push_back({{"label", d.label.kind == LabelKind::Other
                                           ? d.label.other_name
                                           : std::string(to_id(d.label.kind))},
                             {"collected", d.collected},
                             {"shared", d.shared}});
        }
        labels_json["declarations"] = std::move(decls);
        manifest_apps.push_back(
            {{"app_id", app_id},
             {"display_name", "Fixture App " + std::string(buf)},
             {"feature_category", std::string(to_id(plan.feature))},
             {"labels", labels_json},
             {"artifact", "apps/" + app_id + "/classes.txt"},
             {"captures",
              {{{"path", "apps/" + app_id + "/manual.jsonl"}, {"kind", "manual"}},
               {{"path", "apps/" + app_id + "/automated.jsonl"}, {"kind", "automated"}}}}});
    }

    // Hosts blocklist covering every tracker hostname used anywhere.
    std::string hosts_text = "# fixture unified hosts\n";
    for (const std::string& host : tracker_hostnames) {
        hosts_text += "0.0.0.0 " + host + "\n";
    }
    util::write_file(out_dir / "hosts.txt", hosts_text);

    nlohmann::ordered_json manifest;
    manifest["taxonomy"] = "taxonomy.json";
    manifest["persona"] = "persona.json";
    manifest["hosts"] = "hosts.txt";
    manifest["signatures"] = "signatures.json";
    manifest["policy"] = "policy.json";
    manifest["options"] = {{"host_match_mode", "exact"}, {"numeric_window", 32}};
    manifest["apps"] = std::move(manifest_apps);
    util::write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    util::write_file(out_dir / "ground_truth.json", truth.to_json().dump(2) + "\n");

    GeneratedCorpus result;
    result.manifest_path = out_dir / "manifest.json";
    result.truth = truth;
    return result;
}

// ---------------------------------------------------------------------------
// Scoring

struct VariantScore {
    int planted = 0;
    int recovered = 0;
};

struct DetectorEvaluation {
    int planted = 0;
    int recovered = 0;
    int true_hits = 0;
    int spurious_hits = 0;
    double recall = 1.0;
    double precision = 1.0;
    std::map<VariantKind, VariantScore> per_variant;
    std::vector<PlantedHit> missed;
    std::vector<DetectionHit> spurious;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json doc;
        doc["planted"] = planted;
        doc["recovered"] = recovered;
        doc["true_hits"] = true_hits;
        doc["spurious_hits"] = spurious_hits;
        doc["recall"] = recall;
        doc["precision"] = precision;
        nlohmann::ordered_json variants = nlohmann::ordered_json::object();
        for (const auto& [variant, score] : per_variant) {
            variants[std::string(to_id(variant))] = {{"planted", score.planted},
                                                     {"recovered", score.recovered}};
        }
        doc["per_variant"] = std::move(variants);
        nlohmann::ordered_json missed_list = nlohmann::ordered_json::array();
        for (const PlantedHit& m : missed) {
            missed_list.push_back({{"app", m.app_id},
                                   {"flow", m.flow_id},
                                   {"type", m.data_type_id},
                                   {"variant", std::string(to_id(m.variant))},
                                   {"location", std::string(to_id(m.location))}});
        }
        doc["missed"] = std::move(missed_list);
        nlohmann::ordered_json spurious_list = nlohmann::ordered_json::array();
        for (const DetectionHit& s : spurious) spurious_list.push_back(mhaudit::to_json(s));
        doc["spurious"] = std::move(spurious_list);
        return doc;
    }
};

/// Scores detector output against the plant plan. A plant is recovered when a
/// hit reproduces its exact (app, flow, type, variant, location, label); a
/// hit is true when any plant in the same flow explains its (type, location)
/// -- decoded re-detections of an encoded plant count as true, not spurious.
inline DetectorEvaluation evaluate_detector(const DetectionSet& detections,
                                            const GroundTruth& truth) {
    std::set<std::string> known_apps(truth.apps.begin(), truth.apps.end());
    for (const DetectionHit& hit : detections.hits) {
        if (known_apps.count(hit.app_id) == 0) {
            throw CorpusMismatchError("detection hit references unknown app " + hit.app_id);
        }
    }

    DetectorEvaluation eval;
    eval.planted = static_cast<int>(truth.hits.size());

    std::set<std::tuple<std::string, std::string, std::string, VariantKind, HitLocation, bool>>
        exact_hits;
    std::set<std::tuple<std::string, std::string, std::string, HitLocation>> loose_plants;
    for (const DetectionHit& hit : detections.hits) {
        exact_hits.emplace(hit.app_id, hit.flow_id, hit.data_type_id, hit.variant, hit.location,
                           hit.host_label == HostLabel::Tracker);
    }
    for (const PlantedHit& plant : truth.hits) {
        loose_plants.emplace(plant.app_id, plant.flow_id, plant.data_type_id, plant.location);
    }

    for (const PlantedHit& plant : truth.hits) {
        VariantScore& score = eval.per_variant[plant.variant];
        ++score.planted;
        bool found = exact_hits.count({plant.app_id, plant.flow_id, plant.data_type_id,
                                       plant.variant, plant.location, plant.to_tracker}) > 0;
        if (found) {
            ++eval.recovered;
            ++score.recovered;
        } else {
            eval.missed.push_back(plant);
        }
    }

    for (const DetectionHit& hit : detections.hits) {
        bool explained =
            loose_plants.count({hit.app_id, hit.flow_id, hit.data_type_id, hit.location}) > 0;
        if (explained) ++eval.true_hits;
        else {
            ++eval.spurious_hits;
            eval.spurious.push_back(hit);
        }
    }

    eval.recall = eval.planted == 0 ? 1.0 : static_cast<double>(eval.recovered) / eval.planted;
    int total_hits = eval.true_hits + eval.spurious_hits;
    eval.precision = total_hits == 0 ? 1.0 : static_cast<double>(eval.true_hits) / total_hits;
    return eval;
}

} // namespace mhaudit

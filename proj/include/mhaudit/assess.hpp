// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhaudit/app_record.hpp"
#include "mhaudit/errors.hpp"
#include "mhaudit/scan.hpp"
#include "mhaudit/taxonomy.hpp"
#include "mhaudit/util/fileio.hpp"

namespace mhaudit {

/// Scope rule for one feature category: the highest data specificity the
/// category is expected to access, and whether location data is in scope.
/// Location gets its own gate because several categories legitimately reach
/// Nonstandard or Medical data yet have no business locating the user.
struct ScopeRule {
    Specificity max_specificity = Specificity::Standard;
    bool location_in_scope = false;
};

class ExpectationPolicy {
public:
    static ExpectationPolicy from_rules(std::map<FeatureCategory, ScopeRule> rules) {
        ExpectationPolicy p;
        p.rules_ = std::move(rules);
        return p;
    }

    /// Built-in policy: two casual categories capped at Standard, six at
    /// Nonstandard, six with full Medical scope; exactly seven categories
    /// have location in scope.
    static const ExpectationPolicy& default_policy() {
        static const ExpectationPolicy p = [] {
            using FC = FeatureCategory;
            std::map<FC, ScopeRule> rules;
            rules[FC::ScreenOverlay] = {Specificity::Standard, false};
            rules[FC::HealthEducation] = {Specificity::Standard, false};
            rules[FC::StepCounter] = {Specificity::Nonstandard, true};
            rules[FC::WorkoutTracker] = {Specificity::Nonstandard, true};
            rules[FC::CardioTracker] = {Specificity::Nonstandard, true};
            rules[FC::DietTracker] = {Specificity::Nonstandard, false};
            rules[FC::Wearable] = {Specificity::Nonstandard, true};
            rules[FC::MentalWellbeing] = {Specificity::Nonstandard, false};
            rules[FC::Pharmacy] = {Specificity::Medical, true};
            rules[FC::PhysicianFinder] = {Specificity::Medical, true};
            rules[FC::FemaleHealth] = {Specificity::Medical, false};
            rules[FC::Diagnostic] = {Specificity::Medical, false};
            rules[FC::HealthMonitor] = {Specificity::Medical, false};
            rules[FC::Telemedicine] = {Specificity::Medical, true};
            return from_rules(std::move(rules));
        }();
        return p;
    }

    static ExpectationPolicy load(const std::filesystem::path& file) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(util::read_file(file));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("policy parse error in " + file.string() + ": " + e.what());
        }
        if (!doc.is_object()) throw ConfigError("policy document must be a JSON object");
        std::map<FeatureCategory, ScopeRule> rules;
        for (const auto& [key, value] : doc.items()) {
            ScopeRule rule;
            rule.max_specificity = parse_specificity(value.value("max_specificity", ""));
            rule.location_in_scope = value.value("location_in_scope", false);
            rules[parse_feature_category(key)] = rule;
        }
        return from_rules(std::move(rules));
    }

    const ScopeRule& rule_for(FeatureCategory category) const {
        auto it = rules_.find(category);
        if (it == rules_.end()) {
            throw MissingPolicyRuleError("no scope rule for feature category: " +
                                         std::string(to_id(category)));
        }
        return it->second;
    }

    bool in_scope(FeatureCategory feature, DataCategory data) const {
        const ScopeRule& rule = rule_for(feature);
        if (data == DataCategory::Location) return rule.location_in_scope;
        return specificity_of(data) <= rule.max_specificity;
    }

    const std::map<FeatureCategory, ScopeRule>& rules() const { return rules_; }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json doc = nlohmann::ordered_json::object();
        for (FeatureCategory c : kFeatureCategories) {
            auto it = rules_.find(c);
            if (it == rules_.end()) continue;
            doc[std::string(to_id(c))] = {
                {"max_specificity", std::string(to_id(it->second.max_specificity))},
                {"location_in_scope", it->second.location_in_scope}};
        }
        return doc;
    }

private:
    std::map<FeatureCategory, ScopeRule> rules_;
};

/// Per-app, per-data-category scope outcome.
struct ScopeFinding {
    std::string app_id;
    DataCategory data_category = DataCategory::DeviceIds;
    bool transmitted = false;
    bool in_scope = true;
};

/// Evaluates one app against the policy: one finding per data category,
/// transmitted iff any persona hit mapped into that category.
inline std::vector<ScopeFinding> evaluate_scope(const ExpectationPolicy& policy,
                                                const DetectionSet& detections,
                                                const AppRecord& app, const Taxonomy& taxonomy) {
    policy.rule_for(app.feature_category); // throws MissingPolicyRule up front

    std::set<DataCategory> transmitted;
    auto it = detections.rollup.find(app.app_id);
    if (it != detections.rollup.end()) {
        for (const auto& [kind, types] : it->second.by_kind) {
            for (const auto& [type, flags] : types) {
                transmitted.insert(taxonomy.lookup(type).category);
            }
        }
    }

    std::vector<ScopeFinding> findings;
    findings.reserve(kDataCategories.size());
    for (DataCategory category : kDataCategories) {
        ScopeFinding f;
        f.app_id = app.app_id;
        f.data_category = category;
        f.transmitted = transmitted.count(category) > 0;
        f.in_scope = policy.in_scope(app.feature_category, category);
        findings.push_back(std::move(f));
    }
    return findings;
}

// ---------------------------------------------------------------------------
// Declaration dimension

enum class VerdictFlag {
    CorrectCollection = 0,
    CorrectSharing,
    UndeclaredCollection,
    UndeclaredSharing,
    UnobservedDeclaration,
};

inline std::string_view to_id(VerdictFlag v) {
    switch (v) {
    case VerdictFlag::CorrectCollection: return "correct_collection";
    case VerdictFlag::CorrectSharing: return "correct_sharing";
    case VerdictFlag::UndeclaredCollection: return "undeclared_collection";
    case VerdictFlag::UndeclaredSharing: return "undeclared_sharing";
    case VerdictFlag::UnobservedDeclaration: return "unobserved_declaration";
    }
    return "correct_collection";
}

inline VerdictFlag parse_verdict_flag(std::string_view id) {
    for (VerdictFlag v : {VerdictFlag::CorrectCollection, VerdictFlag::CorrectSharing,
                          VerdictFlag::UndeclaredCollection, VerdictFlag::UndeclaredSharing,
                          VerdictFlag::UnobservedDeclaration}) {
        if (id == to_id(v)) return v;
    }
    throw ConfigError("unknown verdict flag: " + std::string(id));
}

struct DeclarationVerdict {
    std::string app_id;
    LabelKind label = LabelKind::DeviceOrOtherIds;
    bool observed_collected = false;
    bool observed_shared = false;
    bool declared_collected = false;
    bool declared_shared = false;
    std::set<VerdictFlag> verdicts;
};

/// The verdict truth table. Observation flags must satisfy shared => collected
/// (a tracker transmission is also a transmission); declarations are taken
/// verbatim.
inline DeclarationVerdict assess_declaration(std::string app_id, LabelKind label,
                                             bool observed_collected, bool observed_shared,
                                             bool declared_collected, bool declared_shared) {
    DeclarationVerdict v;
    v.app_id = std::move(app_id);
    v.label = label;
    v.observed_collected = observed_collected || observed_shared;
    v.observed_shared = observed_shared;
    v.declared_collected = declared_collected;
    v.declared_shared = declared_shared;

    if (v.observed_collected && v.declared_collected) v.verdicts.insert(VerdictFlag::CorrectCollection);
    if (v.observed_shared && v.declared_shared) v.verdicts.insert(VerdictFlag::CorrectSharing);
    if (v.observed_collected && !v.declared_collected) {
        v.verdicts.insert(VerdictFlag::UndeclaredCollection);
    }
    if (v.observed_shared && !v.declared_shared) v.verdicts.insert(VerdictFlag::UndeclaredSharing);
    if ((v.declared_collected || v.declared_shared) && !v.observed_collected) {
        v.verdicts.insert(VerdictFlag::UnobservedDeclaration);
    }
    return v;
}

/// Evaluates the five audit-relevant label categories for one app. Observed
/// flags come from the detection rollup via the taxonomy's type-to-label
/// mapping; unpublished label sets declare nothing.
inline std::vector<DeclarationVerdict> evaluate_labels(const AppRecord& app,
                                                       const DetectionSet& detections,
                                                       const Taxonomy& taxonomy) {
    std::map<LabelKind, DestinationFlags> observed;
    auto it = detections.rollup.find(app.app_id);
    if (it != detections.rollup.end()) {
        for (const auto& [kind, types] : it->second.by_kind) {
            for (const auto& [type, flags] : types) {
                DestinationFlags& merged = observed[taxonomy.lookup(type).label];
                merged.to_nontracker |= flags.to_nontracker;
                merged.to_tracker |= flags.to_tracker;
            }
        }
    }

    std::vector<DeclarationVerdict> verdicts;
    verdicts.reserve(kRelevantLabels.size());
    for (LabelKind label : kRelevantLabels) {
        DestinationFlags flags;
        if (auto found = observed.find(label); found != observed.end()) flags = found->second;
        bool declared_collected = false;
        bool declared_shared = false;
        if (app.labels.published) {
            if (auto decl = app.labels.find(label)) {
                declared_collected = decl->collected;
                declared_shared = decl->shared;
            }
        }
        verdicts.push_back(assess_declaration(app.app_id, label,
                                              flags.to_nontracker || flags.to_tracker,
                                              flags.to_tracker, declared_collected, declared_shared));
    }
    return verdicts;
}

/// Label-consistency warning: declarations of sharing without collection are
/// legal input but worth surfacing.
inline bool declares_sharing_without_collection(const PrivacyLabelSet& labels) {
    for (const LabelDeclaration& d : labels.declarations) {
        if (d.shared && !d.collected) return true;
    }
    return false;
}

} // namespace mhaudit

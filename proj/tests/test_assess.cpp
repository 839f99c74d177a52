// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "mhaudit/assess.hpp"
#include "mhaudit/util/fileio.hpp"
#include "support/builders.hpp"

using namespace mhaudit;

namespace {

DetectionSet rollup_with(const std::string& app_id,
                         std::vector<std::tuple<std::string, bool, CrawlKind>> types) {
    // (data type, to_tracker, crawl kind)
    DetectionSet set;
    AppRollup& rollup = set.rollup[app_id];
    for (auto& [type, tracker, kind] : types) {
        DestinationFlags& flags = rollup.by_kind[kind][type];
        if (tracker) flags.to_tracker = true;
        else flags.to_nontracker = true;
    }
    return set;
}

AppRecord make_app(const std::string& id, FeatureCategory feature) {
    AppRecord app;
    app.app_id = id;
    app.display_name = id;
    app.feature_category = feature;
    app.artifact = "unused.txt";
    return app;
}

} // namespace

TEST_CASE("default policy caps match the archetype tiers") {
    const ExpectationPolicy& policy = ExpectationPolicy::default_policy();
    CHECK(policy.rule_for(FeatureCategory::ScreenOverlay).max_specificity == Specificity::Standard);
    CHECK(policy.rule_for(FeatureCategory::HealthEducation).max_specificity ==
          Specificity::Standard);
    for (FeatureCategory c : {FeatureCategory::StepCounter, FeatureCategory::WorkoutTracker,
                              FeatureCategory::CardioTracker, FeatureCategory::DietTracker,
                              FeatureCategory::Wearable, FeatureCategory::MentalWellbeing}) {
        CHECK(policy.rule_for(c).max_specificity == Specificity::Nonstandard);
    }
    for (FeatureCategory c : {FeatureCategory::Pharmacy, FeatureCategory::PhysicianFinder,
                              FeatureCategory::FemaleHealth, FeatureCategory::Diagnostic,
                              FeatureCategory::HealthMonitor, FeatureCategory::Telemedicine}) {
        CHECK(policy.rule_for(c).max_specificity == Specificity::Medical);
    }
}

TEST_CASE("exactly seven categories have location in scope") {
    const ExpectationPolicy& policy = ExpectationPolicy::default_policy();
    int with_location = 0;
    for (FeatureCategory c : kFeatureCategories) {
        if (policy.rule_for(c).location_in_scope) ++with_location;
    }
    CHECK(with_location == 7);
    CHECK(policy.in_scope(FeatureCategory::Telemedicine, DataCategory::Location));
    CHECK_FALSE(policy.in_scope(FeatureCategory::ScreenOverlay, DataCategory::Location));
    CHECK_FALSE(policy.in_scope(FeatureCategory::DietTracker, DataCategory::Location));
    CHECK(policy.in_scope(FeatureCategory::Wearable, DataCategory::Location));
}

TEST_CASE("scope evaluation flags out-of-scope transmissions") {
    const Taxonomy& tax = Taxonomy::default_taxonomy();
    const ExpectationPolicy& policy = ExpectationPolicy::default_policy();

    SECTION("education app transmitting body measurements") {
        auto set = rollup_with("edu", {{"body_weight", false, CrawlKind::Manual}});
        auto findings = evaluate_scope(policy, set, make_app("edu", FeatureCategory::HealthEducation),
                                       tax);
        REQUIRE(findings.size() == 7);
        const ScopeFinding& body = findings[static_cast<size_t>(DataCategory::BodyMeasurements)];
        CHECK(body.transmitted);
        CHECK_FALSE(body.in_scope);
    }

    SECTION("screen overlay app transmitting location") {
        auto set = rollup_with("overlay", {{"gps_latitude", false, CrawlKind::Manual}});
        auto findings = evaluate_scope(policy, set,
                                       make_app("overlay", FeatureCategory::ScreenOverlay), tax);
        const ScopeFinding& loc = findings[static_cast<size_t>(DataCategory::Location)];
        CHECK(loc.transmitted);
        CHECK_FALSE(loc.in_scope);
    }

    SECTION("telemedicine app transmitting location is in scope") {
        auto set = rollup_with("tele", {{"gps_latitude", false, CrawlKind::Manual}});
        auto findings = evaluate_scope(policy, set,
                                       make_app("tele", FeatureCategory::Telemedicine), tax);
        const ScopeFinding& loc = findings[static_cast<size_t>(DataCategory::Location)];
        CHECK(loc.transmitted);
        CHECK(loc.in_scope);
    }

    SECTION("tracker and non-tracker destinations both count as transmitted") {
        auto set = rollup_with("x", {{"medical_condition", true, CrawlKind::Automated}});
        auto findings = evaluate_scope(policy, set, make_app("x", FeatureCategory::StepCounter), tax);
        const ScopeFinding& med = findings[static_cast<size_t>(DataCategory::MedicalInfo)];
        CHECK(med.transmitted);
        CHECK_FALSE(med.in_scope);
    }
}

TEST_CASE("raising the specificity cap never shrinks scope") {
    for (Specificity lower : kSpecificities) {
        for (Specificity higher : kSpecificities) {
            if (higher < lower) continue;
            for (bool location : {false, true}) {
                auto low_policy = ExpectationPolicy::from_rules(
                    {{FeatureCategory::HealthMonitor, {lower, location}}});
                auto high_policy = ExpectationPolicy::from_rules(
                    {{FeatureCategory::HealthMonitor, {higher, location}}});
                for (DataCategory category : kDataCategories) {
                    if (low_policy.in_scope(FeatureCategory::HealthMonitor, category)) {
                        CHECK(high_policy.in_scope(FeatureCategory::HealthMonitor, category));
                    }
                }
            }
        }
    }
}

TEST_CASE("missing policy rule is an error") {
    auto partial = ExpectationPolicy::from_rules({{FeatureCategory::Pharmacy,
                                                   {Specificity::Medical, true}}});
    const Taxonomy& tax = Taxonomy::default_taxonomy();
    DetectionSet empty;
    CHECK_THROWS_AS(evaluate_scope(partial, empty, make_app("a", FeatureCategory::Wearable), tax),
                    MissingPolicyRuleError);
}

TEST_CASE("policy json round-trip") {
    auto dir = testsupport::fresh_dir("policy");
    auto path = dir / "policy.json";
    util::write_file(path, ExpectationPolicy::default_policy().to_json().dump(2));
    ExpectationPolicy loaded = ExpectationPolicy::load(path);
    for (FeatureCategory c : kFeatureCategories) {
        CHECK(loaded.rule_for(c).max_specificity ==
              ExpectationPolicy::default_policy().rule_for(c).max_specificity);
        CHECK(loaded.rule_for(c).location_in_scope ==
              ExpectationPolicy::default_policy().rule_for(c).location_in_scope);
    }
}

// ---------------------------------------------------------------------------
// Declaration truth table

TEST_CASE("verdict truth table over all 12 consistent combinations") {
    for (int oc = 0; oc <= 1; ++oc) {
        for (int os = 0; os <= 1; ++os) {
            if (os && !oc) continue; // sharing implies collection for observations
            for (int dc = 0; dc <= 1; ++dc) {
                for (int ds = 0; ds <= 1; ++ds) {
                    DeclarationVerdict v = assess_declaration("app", LabelKind::HealthInfo, oc, os,
                                                              dc, ds);
                    std::set<VerdictFlag> expected;
                    if (oc && dc) expected.insert(VerdictFlag::CorrectCollection);
                    if (os && ds) expected.insert(VerdictFlag::CorrectSharing);
                    if (oc && !dc) expected.insert(VerdictFlag::UndeclaredCollection);
                    if (os && !ds) expected.insert(VerdictFlag::UndeclaredSharing);
                    if ((dc || ds) && !oc) expected.insert(VerdictFlag::UnobservedDeclaration);
                    INFO("oc=" << oc << " os=" << os << " dc=" << dc << " ds=" << ds);
                    CHECK(v.verdicts == expected);
                }
            }
        }
    }
}

TEST_CASE("observed sharing forces observed collection") {
    DeclarationVerdict v = assess_declaration("app", LabelKind::Location, false, true, false, false);
    CHECK(v.observed_collected);
    CHECK(v.verdicts.count(VerdictFlag::UndeclaredCollection) == 1);
    CHECK(v.verdicts.count(VerdictFlag::UndeclaredSharing) == 1);
}

TEST_CASE("evaluate_labels maps hits through the taxonomy") {
    const Taxonomy& tax = Taxonomy::default_taxonomy();

    SECTION("undeclared sharing of fitness info") {
        auto set = rollup_with("app", {{"step_count", true, CrawlKind::Manual}});
        AppRecord app = make_app("app", FeatureCategory::WorkoutTracker);
        app.labels.published = true; // published but silent on fitness info
        auto verdicts = evaluate_labels(app, set, tax);
        REQUIRE(verdicts.size() == 5);
        const DeclarationVerdict& fitness = verdicts[static_cast<size_t>(LabelKind::FitnessInfo)];
        CHECK(fitness.verdicts.count(VerdictFlag::UndeclaredSharing) == 1);
        CHECK(fitness.verdicts.count(VerdictFlag::UndeclaredCollection) == 1);
    }

    SECTION("declared collection observed first-party only") {
        auto set = rollup_with("app", {{"medical_condition", false, CrawlKind::Manual}});
        AppRecord app = make_app("app", FeatureCategory::HealthMonitor);
        app.labels.published = true;
        app.labels.declarations.push_back({LabelCategory(LabelKind::HealthInfo), true, false});
        auto verdicts = evaluate_labels(app, set, tax);
        const DeclarationVerdict& health = verdicts[static_cast<size_t>(LabelKind::HealthInfo)];
        CHECK(health.verdicts == std::set<VerdictFlag>{VerdictFlag::CorrectCollection});
    }

    SECTION("declaration without observation is informational") {
        DetectionSet empty;
        empty.rollup["app"];
        AppRecord app = make_app("app", FeatureCategory::CardioTracker);
        app.labels.published = true;
        app.labels.declarations.push_back({LabelCategory(LabelKind::Location), false, true});
        auto verdicts = evaluate_labels(app, empty, tax);
        const DeclarationVerdict& loc = verdicts[static_cast<size_t>(LabelKind::Location)];
        CHECK(loc.verdicts == std::set<VerdictFlag>{VerdictFlag::UnobservedDeclaration});
    }

    SECTION("unpublished labels declare nothing") {
        auto set = rollup_with("app", {{"advertising_id", true, CrawlKind::Manual}});
        AppRecord app = make_app("app", FeatureCategory::Pharmacy);
        auto verdicts = evaluate_labels(app, set, tax);
        const DeclarationVerdict& ids = verdicts[static_cast<size_t>(LabelKind::DeviceOrOtherIds)];
        CHECK_FALSE(ids.declared_collected);
        CHECK(ids.verdicts.count(VerdictFlag::UndeclaredSharing) == 1);
    }
}

TEST_CASE("share-without-collect declarations are representable and surfaced") {
    PrivacyLabelSet labels;
    labels.published = true;
    labels.declarations.push_back({LabelCategory(LabelKind::Location), false, true});
    CHECK(declares_sharing_without_collection(labels));
    labels.declarations[0].collected = true;
    CHECK_FALSE(declares_sharing_without_collection(labels));
}

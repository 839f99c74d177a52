// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "mhaudit/matcher.hpp"
#include "mhaudit/persona.hpp"
#include "mhaudit/scan.hpp"

using namespace mhaudit;

namespace {

Persona single_attribute(std::string type, std::string value, bool numeric = false,
                         std::vector<std::string> hints = {}) {
    Persona p;
    p.attributes.push_back({std::move(type), {std::move(value)}, numeric, std::move(hints)});
    return p;
}

bool has_needle(const MatcherSet& set, VariantKind variant, std::string_view needle) {
    return std::any_of(set.matchers.begin(), set.matchers.end(), [&](const Matcher& m) {
        return m.variant == variant && m.needle == needle;
    });
}

FlowRecord make_flow(std::string body, HostLabel label = HostLabel::NonTracker,
                     std::string host = "api.app.example") {
    static int counter = 0;
    FlowRecord f;
    f.app_id = "com.app";
    f.flow_id = "com.app#m" + std::to_string(counter++);
    f.method = "POST";
    f.host = std::move(host);
    f.path = "/v1/data";
    f.request_body = std::move(body);
    f.body_length = f.request_body.size();
    f.host_label = label;
    f.crawl_kind = CrawlKind::Manual;
    return f;
}

std::vector<DetectionHit> scan_one(const MatcherSet& matchers, const FlowRecord& flow) {
    return scan_flow(matchers, flow, decode_body(flow));
}

} // namespace

TEST_CASE("persona validation enforces taxonomy ids and hint rules") {
    const Taxonomy& tax = Taxonomy::default_taxonomy();
    CHECK_THROWS_AS(single_attribute("nope", "x").validate(tax), UnknownDataTypeError);
    CHECK_THROWS_AS(single_attribute("body_weight", "82", true, {}).validate(tax), ConfigError);
    CHECK_THROWS_AS(Persona{}.validate(tax), EmptyPersonaError);
    CHECK_NOTHROW(Persona::default_persona().validate(tax));
}

TEST_CASE("compiled variants match the independently computed encodings") {
    const Taxonomy& tax = Taxonomy::default_taxonomy();

    // Frozen oracle values, produced with an independent encoder.
    MatcherSet erika = compile_persona(single_attribute("first_name", "Erika"), tax);
    CHECK(has_needle(erika, VariantKind::Plain, "Erika"));
    CHECK(has_needle(erika, VariantKind::Base64, "RXJpa2E="));
    CHECK(has_needle(erika, VariantKind::Base64, "RXJpa2E"));

    MatcherSet email = compile_persona(single_attribute("email_address", "erika@example.com"), tax);
    CHECK(has_needle(email, VariantKind::Sha256Hex,
                     "7f7fa396e3e11fc18b40ea152c01b244db7424aecb390ded5b91f793ccc28212"));
    CHECK(has_needle(email, VariantKind::Md5Hex, "bf03e9f80d74def075de0de153ba8af8"));
    CHECK(has_needle(email, VariantKind::Sha1Hex, "89204109a94528c8adbb0bf19211cdf882e62624"));
    CHECK(has_needle(email, VariantKind::PercentEncoded, "erika%40example.com"));

    // Hashes are derived from the lowercase canonical value.
    MatcherSet mixed = compile_persona(single_attribute("email_address", "ERIKA@example.com"), tax);
    CHECK(has_needle(mixed, VariantKind::Sha256Hex,
                     "7f7fa396e3e11fc18b40ea152c01b244db7424aecb390ded5b91f793ccc28212"));
}

TEST_CASE("numeric attributes compile to keyed matchers only") {
    const Taxonomy& tax = Taxonomy::default_taxonomy();
    MatcherSet set = compile_persona(single_attribute("body_weight", "82", true, {"weight"}), tax);
    REQUIRE(set.matchers.size() == 1);
    CHECK(set.matchers[0].variant == VariantKind::KeyedNumeric);
    CHECK(set.matchers[0].needle == "82");
    CHECK_FALSE(has_needle(set, VariantKind::Plain, "82"));
}

TEST_CASE("keyed numeric scanning honours hints and windows") {
    const Taxonomy& tax = Taxonomy::default_taxonomy();
    MatcherSet set = compile_persona(single_attribute("body_weight", "82", true, {"weight"}), tax);

    auto hits = scan_one(set, make_flow("weight=82"));
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].data_type_id == "body_weight");
    CHECK(hits[0].variant == VariantKind::KeyedNumeric);
    CHECK(hits[0].location == HitLocation::Body);

    CHECK(scan_one(set, make_flow("page=82 of 90")).empty());
    CHECK(scan_one(set, make_flow("weight=182")).empty());   // embedded digit run
    CHECK(scan_one(set, make_flow("weight=82.5")).empty());  // decimal extension
    CHECK(scan_one(set, make_flow(R"({"weight":82})")).size() == 1);

    // Key-equality route: the decoded form key matches a hint exactly.
    FlowRecord form = make_flow("weight=82");
    form.request_headers.push_back({"Content-Type", "application/x-www-form-urlencoded"});
    CHECK(scan_one(set, form).size() == 1);

    // Hint outside the window is no hit.
    std::string padded = "weight" + std::string(40, 'x') + "82";
    CHECK(scan_one(set, make_flow(padded)).empty());
}

TEST_CASE("hash needle planted in the query is attributed to the tracker host") {
    const Taxonomy& tax = Taxonomy::default_taxonomy();
    MatcherSet set = compile_persona(
        single_attribute("advertising_id", "38400000-8cf0-11bd-b23e-10b96e40000d"), tax);

    FlowRecord flow = make_flow("x", HostLabel::Tracker, "ads.trk.example");
    flow.query = "uid=5756ae9022b2ea1e47d84fead75220c8"; // frozen md5 of the id
    auto hits = scan_one(set, flow);

    bool found = false;
    for (const DetectionHit& h : hits) {
        if (h.variant == VariantKind::Md5Hex && h.location == HitLocation::Query &&
            h.host_label == HostLabel::Tracker && h.data_type_id == "advertising_id") {
            found = true;
        }
    }
    CHECK(found);

    // Upper-case hex spelling is found as the same variant.
    FlowRecord upper = make_flow("x", HostLabel::Tracker, "ads.trk.example");
    upper.query = "uid=5756AE9022B2EA1E47D84FEAD75220C8";
    auto upper_hits = scan_one(set, upper);
    CHECK(std::any_of(upper_hits.begin(), upper_hits.end(), [](const DetectionHit& h) {
        return h.variant == VariantKind::Md5Hex && h.location == HitLocation::Query;
    }));
}

TEST_CASE("plain matching is case-insensitive for alphabetic values") {
    const Taxonomy& tax = Taxonomy::default_taxonomy();
    MatcherSet set = compile_persona(single_attribute("city", "Berlin"), tax);
    CHECK_FALSE(scan_one(set, make_flow("city=BERLIN")).empty());
    CHECK_FALSE(scan_one(set, make_flow("city=berlin")).empty());
}

TEST_CASE("header values are scanned but header names are not") {
    const Taxonomy& tax = Taxonomy::default_taxonomy();
    MatcherSet set = compile_persona(single_attribute("city", "Berlin"), tax);

    FlowRecord flow = make_flow("x");
    flow.request_headers.push_back({"X-City", "Berlin"});
    auto hits = scan_one(set, flow);
    CHECK(std::any_of(hits.begin(), hits.end(), [](const DetectionHit& h) {
        return h.location == HitLocation::Header;
    }));

    FlowRecord name_only = make_flow("x");
    name_only.request_headers.push_back({"X-Berlin-Route", "on"});
    CHECK(scan_one(set, name_only).empty());
}

TEST_CASE("duplicate matches collapse per (flow, type, variant, location)") {
    const Taxonomy& tax = Taxonomy::default_taxonomy();
    MatcherSet set = compile_persona(single_attribute("city", "Berlin"), tax);
    // Appears twice in the body and once in a JSON scalar: still one hit.
    auto hits = scan_one(set, make_flow(R"({"a":"Berlin","b":"Berlin"})"));
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].location == HitLocation::Body);
}

TEST_CASE("scanning decoy traffic without persona values yields nothing") {
    const Taxonomy& tax = Taxonomy::default_taxonomy();
    MatcherSet set = compile_persona(Persona::default_persona(), tax);

    std::mt19937_64 rng(99);
    auto token = [&rng](size_t len) {
        static constexpr char kAlpha[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
        std::string s;
        for (size_t i = 0; i < len; ++i) s.push_back(kAlpha[rng() % 52]);
        return s;
    };

    std::vector<AppScanInput> apps;
    AppScanInput app;
    app.app_id = "decoy.app";
    for (int i = 0; i < 200; ++i) {
        FlowRecord flow = make_flow("{\"" + token(8) + "\":\"" + token(20) + "\",\"" + token(6) +
                                    "\":\"" + token(24) + "\"}");
        flow.query = token(10) + "=" + token(18);
        app.flows.push_back(std::move(flow));
    }
    apps.push_back(std::move(app));

    DetectionSet result = scan_corpus(apps, set);
    CHECK(result.hits.empty());
}

TEST_CASE("corpus rollup is order-independent") {
    const Taxonomy& tax = Taxonomy::default_taxonomy();
    Persona persona;
    persona.attributes.push_back({"city", {"Berlin"}, false, {}});
    persona.attributes.push_back({"body_weight", {"82"}, true, {"weight"}});
    MatcherSet set = compile_persona(persona, tax);

    AppScanInput app;
    app.app_id = "com.app";
    app.flows.push_back(make_flow("city=Berlin"));
    app.flows.push_back(make_flow("weight=82", HostLabel::Tracker, "ads.trk.example"));
    app.flows.push_back(make_flow("nothing here"));

    DetectionSet forward = scan_corpus({app}, set);

    AppScanInput reversed = app;
    std::reverse(reversed.flows.begin(), reversed.flows.end());
    DetectionSet backward = scan_corpus({reversed}, set);

    REQUIRE(forward.hits.size() == backward.hits.size());
    CHECK(forward.rollup.size() == backward.rollup.size());
    const auto& fw = forward.rollup.at("com.app").by_kind.at(CrawlKind::Manual);
    const auto& bw = backward.rollup.at("com.app").by_kind.at(CrawlKind::Manual);
    REQUIRE(fw.size() == bw.size());
    CHECK(fw.at("body_weight").to_tracker);
    CHECK(bw.at("body_weight").to_tracker);
    CHECK(fw.at("city").to_nontracker);
    CHECK_FALSE(fw.at("city").to_tracker);
}

TEST_CASE("adding a variant kind never removes existing hits") {
    const Taxonomy& tax = Taxonomy::default_taxonomy();
    MatcherSet full = compile_persona(single_attribute("first_name", "Erika"), tax);

    MatcherSet plain_only = full;
    plain_only.matchers.erase(
        std::remove_if(plain_only.matchers.begin(), plain_only.matchers.end(),
                       [](const Matcher& m) { return m.variant != VariantKind::Plain; }),
        plain_only.matchers.end());

    FlowRecord flow = make_flow("name=Erika&enc=RXJpa2E=");
    auto small = scan_one(plain_only, flow);
    auto large = scan_one(full, flow);
    for (const DetectionHit& h : small) {
        CHECK(std::find(large.begin(), large.end(), h) != large.end());
    }
    CHECK(large.size() >= small.size());
}

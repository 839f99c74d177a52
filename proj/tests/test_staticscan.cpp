// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mhaudit/staticscan.hpp"
#include "mhaudit/util/fileio.hpp"
#include "mhaudit/zip.hpp"
#include "support/builders.hpp"

using namespace mhaudit;

namespace {

std::filesystem::path write_bytes(const std::filesystem::path& path,
                                  const std::vector<uint8_t>& bytes) {
    util::write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                            bytes.size()));
    return path;
}

std::vector<TrackerSignature> make_db(std::vector<std::pair<std::string, std::string>> prefixes) {
    std::vector<TrackerSignature> db;
    int i = 0;
    for (auto& [prefix, vendor] : prefixes) {
        TrackerSignature sig;
        sig.signature_id = "sig" + std::to_string(i++);
        sig.tracker_name = "Tracker " + prefix;
        sig.vendor = vendor;
        sig.code_prefixes = {prefix};
        db.push_back(std::move(sig));
    }
    return db;
}

} // namespace

TEST_CASE("dex extraction decodes reference descriptors only") {
    auto dir = testsupport::fresh_dir("dex");
    auto dex = testsupport::DexBuilder()
                   .add_type("Lcom/google/firebase/analytics/FirebaseAnalytics;")
                   .add_type("I")
                   .add_type("[B")
                   .add_string("someMethodName")
                   .build();

    // Independent route: read the string table directly.
    auto oracle = testsupport::string_table_class_names(dex);
    REQUIRE(oracle ==
            std::set<std::string>{"com.google.firebase.analytics.FirebaseAnalytics"});

    ClassSet set = extract_class_names(write_bytes(dir / "classes.dex", dex), "app");
    CHECK(set.classes == oracle);
}

TEST_CASE("dex with only primitive and array descriptors yields empty set") {
    auto dir = testsupport::fresh_dir("dex-prim");
    auto dex = testsupport::DexBuilder().add_type("I").add_type("[B").add_type("Z").build();
    ClassSet set = extract_class_names(write_bytes(dir / "p.dex", dex), "app");
    CHECK(set.classes.empty());
}

TEST_CASE("malformed dex inputs are rejected") {
    auto dir = testsupport::fresh_dir("dex-bad");

    std::vector<uint8_t> bad_magic{'d', 'e', 'x', '\n', '0', '3', '5', 0};
    bad_magic.resize(0x70, 0);
    bad_magic[0] = 'x';
    // Not dex magic and not zip: falls back to the text-list reader.
    CHECK_NOTHROW(extract_class_names(write_bytes(dir / "notdex.bin", bad_magic), "app"));

    auto good = testsupport::DexBuilder().add_type("La/B;").build();
    std::vector<uint8_t> truncated(good.begin(), good.begin() + 0x40);
    CHECK_THROWS_AS(DexFile::parse(truncated), MalformedDexError);

    auto overrun = good;
    overrun[0x38] = 0xff; // string_ids_size far beyond the file
    overrun[0x39] = 0xff;
    CHECK_THROWS_AS(DexFile::parse(overrun), MalformedDexError);

    CHECK_THROWS_AS(extract_class_names(dir / "missing.dex", "app"), UnreadableArtifactError);
}

TEST_CASE("apk extraction equals the union over its dex members") {
    auto dir = testsupport::fresh_dir("apk");
    auto dex1 = testsupport::DexBuilder()
                    .add_type("Lcom/alpha/One;")
                    .add_type("Lcom/shared/Both;")
                    .build();
    auto dex2 = testsupport::DexBuilder()
                    .add_type("Lcom/beta/Two;")
                    .add_type("Lcom/shared/Both;")
                    .build();

    ZipWriter zip;
    zip.add("classes.dex", dex1, /*deflate=*/false);
    zip.add("classes2.dex", dex2, /*deflate=*/true);
    zip.add("resources.arsc", std::vector<uint8_t>{1, 2, 3}, true);
    auto apk_path = write_bytes(dir / "app.apk", zip.finish());

    ClassSet from_apk = extract_class_names(apk_path, "app");

    ClassSet union_set;
    for (auto* dex : {&dex1, &dex2}) {
        auto path = dir / "member.dex";
        ClassSet member = extract_class_names(write_bytes(path, *dex), "app");
        union_set.classes.insert(member.classes.begin(), member.classes.end());
    }
    CHECK(from_apk.classes == union_set.classes);
    CHECK(from_apk.classes ==
          std::set<std::string>{"com.alpha.One", "com.beta.Two", "com.shared.Both"});
}

TEST_CASE("apk without dex members warns and yields empty set") {
    auto dir = testsupport::fresh_dir("apk-empty");
    ZipWriter zip;
    zip.add("assets/readme.txt", std::vector<uint8_t>{'h', 'i'}, false);
    std::vector<std::string> warnings;
    ClassSet set = extract_class_names(write_bytes(dir / "empty.apk", zip.finish()), "app",
                                       &warnings);
    CHECK(set.classes.empty());
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("EmptyArtifact") != std::string::npos);
}

TEST_CASE("text class lists deduplicate and normalize") {
    auto dir = testsupport::fresh_dir("txt");
    auto path = dir / "classes.txt";
    util::write_file(path, "a.b.C\na.b.C\n# comment\nLx/y/Z;\n\n");
    ClassSet set = extract_class_names(path, "app");
    CHECK(set.classes == std::set<std::string>{"a.b.C", "x.y.Z"});
}

TEST_CASE("prefix matching respects package boundaries") {
    ClassSet classes;
    classes.app_id = "app";
    classes.classes = {"com.google.firebase.analytics.Logger", "com.google.firebaseanalyticsx.Y"};

    auto db = make_db({{"com.google.firebase.analytics", "Google"}});
    EmbeddedTrackerReport report = match_trackers(classes, db);
    REQUIRE(report.matches.size() == 1);
    CHECK(report.matches[0].matched_prefix == "com.google.firebase.analytics");
    CHECK(report.matches[0].example_class == "com.google.firebase.analytics.Logger");
    CHECK(report.distinct_trackers == 1);

    ClassSet only_lookalike;
    only_lookalike.app_id = "app";
    only_lookalike.classes = {"com.google.firebaseanalyticsx.Y"};
    CHECK(match_trackers(only_lookalike, db).distinct_trackers == 0);

    ClassSet exact;
    exact.app_id = "app";
    exact.classes = {"com.google.firebase.analytics"};
    CHECK(match_trackers(exact, db).distinct_trackers == 1);
}

TEST_CASE("19 planted signatures from 14 vendors aggregate correctly") {
    std::vector<std::pair<std::string, std::string>> prefixes;
    for (int i = 0; i < 19; ++i) {
        // 14 distinct vendors: the first five vendors own two libraries each.
        std::string vendor = "vendor" + std::to_string(i < 10 ? i / 2 : i - 5);
        prefixes.push_back({"com.lib" + std::to_string(i) + ".sdk", vendor});
    }
    auto db = make_db(prefixes);

    ClassSet classes;
    classes.app_id = "peppapp";
    for (int i = 0; i < 19; ++i) {
        classes.classes.insert("com.lib" + std::to_string(i) + ".sdk.Main");
    }
    EmbeddedTrackerReport report = match_trackers(classes, db);
    CHECK(report.distinct_trackers == 19);
    CHECK(report.distinct_vendors == 14);
}

TEST_CASE("matching is monotone in the class set") {
    auto db = make_db({{"com.a.b", "A"}, {"com.c.d", "C"}, {"org.e.f", "E"}});
    ClassSet small;
    small.app_id = "app";
    small.classes = {"com.a.b.X"};
    ClassSet big = small;
    big.classes.insert("com.c.d.Y");
    big.classes.insert("unrelated.Z");
    CHECK(match_trackers(big, db).distinct_trackers >=
          match_trackers(small, db).distinct_trackers);
}

TEST_CASE("random non-extending class names never match") {
    auto db = make_db({{"com.google.firebase.analytics", "G"},
                       {"com.facebook.ads", "F"},
                       {"io.branch.sdk", "B"}});
    std::mt19937_64 rng(42);
    auto random_segment = [&rng](size_t len) {
        static constexpr char kAlpha[] = "abcdefghijklmnopqrstuvwxyz";
        std::string s;
        for (size_t i = 0; i < len; ++i) s.push_back(kAlpha[rng() % 26]);
        return s;
    };

    ClassSet classes;
    classes.app_id = "app";
    for (int i = 0; i < 1000; ++i) {
        if (i % 3 == 0) {
            // Adversarial: extend a prefix without a dot boundary.
            classes.classes.insert("com.google.firebase.analytics" + random_segment(4) + ".X");
        } else {
            classes.classes.insert(random_segment(5) + "." + random_segment(7) + "." +
                                   random_segment(4));
        }
    }
    CHECK(match_trackers(classes, db).distinct_trackers == 0);
}

TEST_CASE("signature db loader accepts both shapes and validates") {
    auto dir = testsupport::fresh_dir("sigdb");
    auto native = dir / "native.json";
    util::write_file(native, R"([
        {"id": "firebase", "name": "Google Firebase Analytics", "vendor": "Google",
         "code_prefixes": ["com.google.firebase.analytics", "com.google.android.gms.measurement"]}
    ])");
    auto db = load_signature_db(native);
    REQUIRE(db.size() == 1);
    CHECK(db[0].code_prefixes.size() == 2);
    CHECK(db[0].vendor == "Google");

    auto exodus = dir / "exodus.json";
    util::write_file(exodus, R"({"trackers": [
        {"id": 49, "name": "Facebook Ads", "code_signature": "com.facebook.ads.|com.facebook.marketing.",
         "network_signature": "", "website": ""}
    ]})");
    auto db2 = load_signature_db(exodus);
    REQUIRE(db2.size() == 1);
    CHECK(db2[0].signature_id == "49");
    CHECK(db2[0].vendor == "Facebook Ads"); // vendor defaults to the name
    CHECK(db2[0].code_prefixes ==
          std::vector<std::string>{"com.facebook.ads", "com.facebook.marketing"});

    auto bad = dir / "bad.json";
    util::write_file(bad, R"([{"id": "x", "name": "X", "code_prefixes": ["nodot"]}])");
    CHECK_THROWS_AS(load_signature_db(bad), MalformedSignatureDbError);
}

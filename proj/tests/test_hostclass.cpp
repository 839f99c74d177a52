// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "mhaudit/hostclass.hpp"

using namespace mhaudit;

TEST_CASE("hosts parsing collects hostnames and skips noise") {
    HostsList list = parse_hosts_list("0.0.0.0 app-measurement.com\n");
    CHECK(list.contains("app-measurement.com"));
    CHECK(list.malformed_lines == 0);

    list = parse_hosts_list("# comment\n\n0.0.0.0 a.example  b.example\n");
    CHECK(list.entries == std::set<std::string>{"a.example", "b.example"});

    list = parse_hosts_list("127.0.0.1 localhost\n");
    CHECK(list.entries.empty());

    list = parse_hosts_list("0.0.0.0 UPPER.Example # trailing comment\n");
    CHECK(list.contains("upper.example"));
}

TEST_CASE("malformed hosts lines are counted, not fatal") {
    HostsList list = parse_hosts_list("0.0.0.0 good.example\nnot-an-ip-line\n0.0.0.0\n");
    CHECK(list.contains("good.example"));
    CHECK(list.malformed_lines == 2);
}

TEST_CASE("hosts digest changes with content") {
    CHECK(parse_hosts_list("0.0.0.0 a.example\n").source_digest !=
          parse_hosts_list("0.0.0.0 b.example\n").source_digest);
    CHECK(parse_hosts_list("x").source_digest == parse_hosts_list("x").source_digest);
}

TEST_CASE("classification: exact and suffix modes") {
    HostsList list = parse_hosts_list("0.0.0.0 app-measurement.com\n0.0.0.0 doubleclick.net\n");

    CHECK(classify_host(list, "app-measurement.com", HostMatchMode::Exact) == HostLabel::Tracker);
    CHECK(classify_host(list, "stats.g.doubleclick.net", HostMatchMode::Exact) ==
          HostLabel::NonTracker);
    CHECK(classify_host(list, "stats.g.doubleclick.net", HostMatchMode::Suffix) ==
          HostLabel::Tracker);
    CHECK(classify_host(list, "api.clinic-portal.example", HostMatchMode::Exact) ==
          HostLabel::NonTracker);
    CHECK(classify_host(list, "api.clinic-portal.example", HostMatchMode::Suffix) ==
          HostLabel::NonTracker);

    CHECK_THROWS_AS(classify_host(list, "", HostMatchMode::Exact), InvalidHostnameError);
    CHECK_THROWS_AS(classify_host(list, "a b.example", HostMatchMode::Exact), InvalidHostnameError);
}

TEST_CASE("suffix chain oracle: stripping labels one at a time") {
    // Independent enumeration of the label-stripping chain.
    auto chain = [](std::string host) {
        std::vector<std::string> out{host};
        while (true) {
            size_t dot = host.find('.');
            if (dot == std::string::npos) break;
            host = host.substr(dot + 1);
            out.push_back(host);
        }
        return out;
    };

    HostsList list = parse_hosts_list("0.0.0.0 doubleclick.net\n");
    for (const std::string& host :
         {std::string("stats.g.doubleclick.net"), std::string("x.doubleclick.net"),
          std::string("doubleclick.net"), std::string("weird.net")}) {
        bool expected = false;
        for (const std::string& candidate : chain(host)) {
            if (list.contains(candidate)) expected = true;
        }
        HostLabel got = classify_host(list, host, HostMatchMode::Suffix);
        CHECK((got == HostLabel::Tracker) == expected);
    }
}

TEST_CASE("exact tracker implies suffix tracker") {
    HostsList list = parse_hosts_list("0.0.0.0 t1.example\n0.0.0.0 ads.t2.example\n");
    std::mt19937_64 rng(7);
    std::vector<std::string> pool{"t1.example", "ads.t2.example", "sub.t1.example",
                                  "other.example", "deep.sub.ads.t2.example"};
    for (int i = 0; i < 100; ++i) {
        const std::string& host = pool[rng() % pool.size()];
        if (classify_host(list, host, HostMatchMode::Exact) == HostLabel::Tracker) {
            CHECK(classify_host(list, host, HostMatchMode::Suffix) == HostLabel::Tracker);
        }
    }
}

TEST_CASE("hosts entries round-trip through re-serialization") {
    HostsList list =
        parse_hosts_list("0.0.0.0 b.example\n0.0.0.0 a.example\n0.0.0.0 c.example x.example\n");
    std::ostringstream out;
    for (const std::string& host : list.entries) out << "0.0.0.0 " << host << "\n";
    HostsList again = parse_hosts_list(out.str());
    CHECK(again.entries == list.entries);
}

TEST_CASE("registrable domain: fallback, psl, ip passthrough") {
    CHECK(registrable_domain("stats.g.doubleclick.net", PublicSuffixList::none()) ==
          "doubleclick.net");
    CHECK(registrable_domain("cdn.firm.co.uk") == "firm.co.uk"); // snapshot has co.uk
    CHECK(registrable_domain("192.0.2.7") == "192.0.2.7");
    CHECK(registrable_domain("single") == "single");
    CHECK(registrable_domain("a.b", PublicSuffixList::none()) == "a.b");
    CHECK_THROWS_AS(registrable_domain(""), InvalidHostnameError);
}

TEST_CASE("psl walk oracle agrees with registrable_domain") {
    auto psl = PublicSuffixList::from_suffixes({"co.uk", "org.uk", "com.au"});
    // Oracle: walk candidate suffixes from longest to shortest by hand.
    auto oracle = [&psl](const std::string& host) {
        std::vector<std::string> labels;
        size_t start = 0;
        while (true) {
            size_t dot = host.find('.', start);
            if (dot == std::string::npos) {
                labels.push_back(host.substr(start));
                break;
            }
            labels.push_back(host.substr(start, dot - start));
            start = dot + 1;
        }
        for (size_t take = labels.size() - 1; take >= 1; --take) {
            std::string suffix;
            for (size_t i = labels.size() - take; i < labels.size(); ++i) {
                if (!suffix.empty()) suffix += ".";
                suffix += labels[i];
            }
            if (psl.contains(suffix) && take + 1 <= labels.size()) {
                std::string out;
                for (size_t i = labels.size() - take - 1; i < labels.size(); ++i) {
                    if (!out.empty()) out += ".";
                    out += labels[i];
                }
                return out;
            }
        }
        if (labels.size() <= 1) return host;
        return labels[labels.size() - 2] + "." + labels[labels.size() - 1];
    };

    for (const std::string& host :
         {std::string("cdn.firm.co.uk"), std::string("deep.cdn.firm.co.uk"),
          std::string("shop.example.com.au"), std::string("plain.example.org"),
          std::string("firm.co.uk")}) {
        CHECK(registrable_domain(host, psl) == oracle(host));
    }
}

TEST_CASE("registrable domain is idempotent") {
    for (const std::string& host :
         {std::string("stats.g.doubleclick.net"), std::string("cdn.firm.co.uk"),
          std::string("192.0.2.7"), std::string("single"), std::string("a.b.c.d.e")}) {
        std::string once = registrable_domain(host);
        CHECK(registrable_domain(once) == once);
    }
}

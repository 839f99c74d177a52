// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "mhaudit/bodyviews.hpp"
#include "mhaudit/capture.hpp"
#include "mhaudit/util/encoding.hpp"
#include "mhaudit/util/fileio.hpp"
#include "support/builders.hpp"

using namespace mhaudit;

TEST_CASE("har entries map onto flow records") {
    auto dir = testsupport::fresh_dir("har");
    auto path = dir / "capture.har";
    util::write_file(path, R"({"log": {"version": "1.2", "entries": [
        {"startedDateTime": "2023-11-03T10:15:30.250Z",
         "request": {"method": "post", "url": "https://api.x.com/v1/log?k=v",
                     "headers": [{"name": "Content-Type", "value": "text/plain"}],
                     "postData": {"mimeType": "text/plain", "text": "a=1"}},
         "response": {"status": 204}}
    ]}})");

    IngestResult result = ingest_capture(path, "com.example", CrawlKind::Manual);
    REQUIRE(result.flows.size() == 1);
    const FlowRecord& flow = result.flows[0];
    CHECK(flow.method == "POST");
    CHECK(flow.scheme == "https");
    CHECK(flow.host == "api.x.com");
    CHECK(flow.port == 443);
    CHECK(flow.path == "/v1/log");
    CHECK(flow.query == "k=v");
    CHECK(flow.request_body == "a=1");
    CHECK(flow.body_length == 3);
    CHECK(flow.response_status == 204);
    CHECK(flow.timestamp_ms == 1699006530250);
    CHECK(flow.flow_id == "com.example#m000000");
}

TEST_CASE("jsonl flows parse with empty bodies and per-line fields") {
    auto dir = testsupport::fresh_dir("jsonl");
    auto path = dir / "flows.jsonl";
    util::write_file(path,
                     R"({"app":"c.ex","ts":1700000000000,"kind":"manual","method":"GET","url":"http://t.co/","headers":[["Host","t.co"]],"body_b64":""}
{"app":"c.ex","method":"POST","url":"http://t.co/send","body_b64":"aGVsbG8="}
)");
    IngestResult result = ingest_capture(path, "fallback.app", CrawlKind::Automated);
    REQUIRE(result.flows.size() == 2);
    CHECK(result.flows[0].app_id == "c.ex");
    CHECK(result.flows[0].crawl_kind == CrawlKind::Manual);
    CHECK(result.flows[0].body_length == 0);
    CHECK(result.flows[0].port == 80);
    CHECK(result.flows[1].crawl_kind == CrawlKind::Automated); // falls back to argument
    CHECK(result.flows[1].request_body == "hello");
}

TEST_CASE("gzip content-encoding is transparently decoded") {
    // Frozen gzip bytes of "weight=82" produced independently.
    const std::string gz_b64 = "H4sIAGaueGoC/ytPzUzPKLG1MAIARrL7XwkAAAA=";
    auto dir = testsupport::fresh_dir("gzip");
    auto path = dir / "flows.jsonl";
    util::write_file(path, std::string(R"({"app":"a","method":"POST","url":"https://h.example/up",)") +
                               R"("headers":[["Content-Encoding","gzip"]],"body_b64":")" + gz_b64 +
                               "\"}\n");
    IngestResult result = ingest_capture(path, "a", CrawlKind::Manual);
    REQUIRE(result.flows.size() == 1);
    CHECK(result.flows[0].request_body == "weight=82");
    CHECK(result.flows[0].body_length == 9);
    REQUIRE(result.flows[0].encoded_body_length.has_value());
    CHECK(*result.flows[0].encoded_body_length == 29);
    CHECK_FALSE(result.flows[0].decompression_failed);

    // Round-trip through the library's own gzip for good measure.
    std::string gz = util::gzip_compress("weight=82");
    CHECK(util::inflate_auto(gz) == std::string("weight=82"));
}

TEST_CASE("broken compressed bodies are kept raw and flagged") {
    auto dir = testsupport::fresh_dir("gzip-bad");
    auto path = dir / "flows.jsonl";
    util::write_file(
        path,
        R"({"app":"a","method":"POST","url":"https://h.example/up","headers":[["Content-Encoding","gzip"]],"body_b64":"bm90Z3ppcA=="})"
        "\n");
    IngestResult result = ingest_capture(path, "a", CrawlKind::Manual);
    REQUIRE(result.flows.size() == 1);
    CHECK(result.flows[0].decompression_failed);
    CHECK(result.flows[0].request_body == "notgzip");
}

TEST_CASE("unknown formats and malformed entries") {
    auto dir = testsupport::fresh_dir("badfmt");
    auto path = dir / "capture.bin";
    util::write_file(path, "PLAINTEXT NOT JSON\n");
    CHECK_THROWS_AS(ingest_capture(path, "a", CrawlKind::Manual), UnknownCaptureFormatError);

    auto mixed = dir / "mixed.jsonl";
    util::write_file(mixed, R"({"app":"a","method":"GET","url":"http://x.example/"})"
                            "\nnot json at all\n");
    IngestResult result = ingest_capture(mixed, "a", CrawlKind::Manual);
    CHECK(result.flows.size() == 1);
    CHECK(result.skipped_entries == 1);

    auto empty = dir / "empty.jsonl";
    util::write_file(empty, "");
    CHECK(ingest_capture(empty, "a", CrawlKind::Manual).flows.empty());
}

TEST_CASE("ingestion is deterministic including flow ids") {
    auto dir = testsupport::fresh_dir("det");
    auto path = dir / "flows.jsonl";
    std::string lines;
    for (int i = 0; i < 5; ++i) {
        lines += R"({"app":"a","method":"POST","url":"http://h.example/p","body_b64":"eA=="})";
        lines += "\n";
    }
    util::write_file(path, lines);
    IngestResult a = ingest_capture(path, "a", CrawlKind::Manual, 10);
    IngestResult b = ingest_capture(path, "a", CrawlKind::Manual, 10);
    REQUIRE(a.flows.size() == b.flows.size());
    for (size_t i = 0; i < a.flows.size(); ++i) {
        CHECK(a.flows[i].flow_id == b.flows[i].flow_id);
    }
    CHECK(a.flows[0].flow_id == "a#m000010");
}

TEST_CASE("filter_reviewable keeps exactly the non-empty requests in order") {
    std::vector<FlowRecord> flows(3);
    flows[0].method = "GET";
    flows[0].body_length = 0;
    flows[1].method = "POST";
    flows[1].request_body = "x";
    flows[1].body_length = 1;
    flows[2].method = "GET";
    flows[2].body_length = 0;

    auto reviewable = filter_reviewable(flows);
    REQUIRE(reviewable.size() == 1);
    CHECK(reviewable[0].method == "POST");

    // Idempotent and a subset.
    auto twice = filter_reviewable(reviewable);
    CHECK(twice.size() == reviewable.size());
    CHECK(filter_reviewable({}).empty());
}

TEST_CASE("reviewable ratio on a proportional fixture") {
    // 2,651 requests of which 717 carry bodies, mirroring a 10% corpus scale.
    std::vector<FlowRecord> flows(2651);
    for (size_t i = 0; i < flows.size(); ++i) {
        if (i < 717) {
            flows[i].request_body = "x";
            flows[i].body_length = 1;
        }
    }
    CHECK(filter_reviewable(flows).size() == 717);
}

// ---------------------------------------------------------------------------
// Body views

namespace {
FlowRecord flow_with_body(std::string body, std::string content_type = "") {
    FlowRecord f;
    f.app_id = "a";
    f.flow_id = "a#m000000";
    f.method = "POST";
    f.host = "h.example";
    f.path = "/p";
    f.request_body = std::move(body);
    f.body_length = f.request_body.size();
    if (!content_type.empty()) f.request_headers.push_back({"Content-Type", content_type});
    return f;
}
} // namespace

TEST_CASE("decode_body always provides raw text and extracts json paths") {
    FlowRecord flow = flow_with_body(R"({"u":{"em":"a@b.c"},"n":82})");
    DecodedViews views = decode_body(flow);

    REQUIRE(!views.views.empty());
    CHECK(views.views[0].kind == ViewKind::RawText);

    bool found_email = false;
    bool found_number = false;
    for (const DecodedView& v : views.views) {
        if (v.kind == ViewKind::JsonStrings && v.key == "u.em" && v.text == "a@b.c") {
            found_email = true;
        }
        if (v.kind == ViewKind::JsonStrings && v.key == "n" && v.text == "82") found_number = true;
    }
    CHECK(found_email);
    CHECK(found_number);
}

TEST_CASE("form fields decode percent escapes and plus signs") {
    FlowRecord flow = flow_with_body("name=Erika%20M&x=a+b", "application/x-www-form-urlencoded");
    DecodedViews views = decode_body(flow);
    bool found = false;
    bool found_plus = false;
    for (const DecodedView& v : views.views) {
        if (v.kind == ViewKind::FormFields && v.key == "name" && v.text == "Erika M") found = true;
        if (v.kind == ViewKind::FormFields && v.key == "x" && v.text == "a b") found_plus = true;
    }
    CHECK(found);
    CHECK(found_plus);
}

TEST_CASE("query text is retained verbatim without speculative base64 expansion") {
    FlowRecord flow = flow_with_body("");
    flow.query = "q=eyJ3IjoiODIifQ";
    DecodedViews views = decode_body(flow);
    bool found = false;
    for (const DecodedView& v : views.views) {
        if (v.kind == ViewKind::UrlDecoded && v.provenance == "query") {
            CHECK(v.text == "q=eyJ3IjoiODIifQ");
            found = true;
        }
        CHECK(v.text.find("\"w\"") == std::string::npos); // never base64-expanded
    }
    CHECK(found);
}

TEST_CASE("multipart parts are split with their field names") {
    std::string body = "--XX\r\nContent-Disposition: form-data; name=\"meal\"\r\n\r\n"
                       "vegetarian\r\n--XX\r\nContent-Disposition: form-data; name=\"note\"\r\n\r\n"
                       "hello\r\n--XX--\r\n";
    FlowRecord flow = flow_with_body(body, "multipart/form-data; boundary=XX");
    DecodedViews views = decode_body(flow);
    bool meal = false;
    for (const DecodedView& v : views.views) {
        if (v.kind == ViewKind::MultipartParts && v.key == "meal" && v.text == "vegetarian") {
            meal = true;
        }
    }
    CHECK(meal);
}

TEST_CASE("nested decoding goes one level deep") {
    FlowRecord flow = flow_with_body(R"({"payload":"em%40il%20x"})");
    DecodedViews views = decode_body(flow);
    bool nested = false;
    for (const DecodedView& v : views.views) {
        if (v.kind == ViewKind::UrlDecoded && v.key == "payload" && v.text == "em@il x") {
            nested = true;
        }
    }
    CHECK(nested);
}

TEST_CASE("views are reproducible from the flow alone") {
    FlowRecord flow = flow_with_body("name=Erika%20M", "application/x-www-form-urlencoded");
    DecodedViews a = decode_body(flow);
    DecodedViews b = decode_body(flow);
    REQUIRE(a.views.size() == b.views.size());
    for (size_t i = 0; i < a.views.size(); ++i) {
        CHECK(a.views[i].text == b.views[i].text);
        CHECK(a.views[i].key == b.views[i].key);
        CHECK(a.views[i].provenance == b.views[i].provenance);
    }
}

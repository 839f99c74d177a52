// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <zlib.h>

namespace mhaudit::util {

namespace detail {

inline std::optional<std::string> inflate_with(std::string_view data, int window_bits) {
    z_stream zs{};
    if (inflateInit2(&zs, window_bits) != Z_OK) return std::nullopt;
    std::string out;
    char buf[16384];
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            return std::nullopt;
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) return std::nullopt;
    return out;
}

} // namespace detail

/// Inflates gzip- or zlib-wrapped data (auto-detected header).
inline std::optional<std::string> inflate_auto(std::string_view data) {
    return detail::inflate_with(data, 15 + 32);
}

/// Inflates a raw deflate stream (no header). ZIP entries use this form.
inline std::optional<std::string> inflate_raw(std::string_view data) {
    return detail::inflate_with(data, -15);
}

/// Decompresses an HTTP body per its Content-Encoding token. "deflate" in the
/// wild is either zlib-wrapped or raw, so both are attempted.
inline std::optional<std::string> decode_content_encoding(std::string_view encoding, std::string_view body) {
    if (encoding == "gzip" || encoding == "x-gzip") {
        return inflate_auto(body);
    }
    if (encoding == "deflate") {
        auto wrapped = detail::inflate_with(body, 15);
        if (wrapped) return wrapped;
        return inflate_raw(body);
    }
    return std::nullopt;
}

inline std::string gzip_compress(std::string_view data) {
    z_stream zs{};
    // 15+16 selects a gzip wrapper.
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        return {};
    }
    std::string out;
    char buf[16384];
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        rc = deflate(&zs, Z_FINISH);
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (rc == Z_OK);
    deflateEnd(&zs);
    return out;
}

inline std::string deflate_raw(std::string_view data) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        return {};
    }
    std::string out;
    char buf[16384];
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        rc = deflate(&zs, Z_FINISH);
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (rc == Z_OK);
    deflateEnd(&zs);
    return out;
}

} // namespace mhaudit::util

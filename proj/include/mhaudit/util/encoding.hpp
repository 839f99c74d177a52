// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "mhaudit/errors.hpp"

namespace mhaudit::util {

// ---------------------------------------------------------------------------
// Base64

inline std::string base64_encode(std::string_view data, bool url_safe = false, bool padded = true) {
    static constexpr char kStd[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    static constexpr char kUrl[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
    const char* alphabet = url_safe ? kUrl : kStd;
    std::string out;
    out.reserve(((data.size() + 2) / 3) * 4);
    size_t i = 0;
    while (i + 3 <= data.size()) {
        uint32_t n = (static_cast<uint8_t>(data[i]) << 16) | (static_cast<uint8_t>(data[i + 1]) << 8) |
                     static_cast<uint8_t>(data[i + 2]);
        out.push_back(alphabet[(n >> 18) & 63]);
        out.push_back(alphabet[(n >> 12) & 63]);
        out.push_back(alphabet[(n >> 6) & 63]);
        out.push_back(alphabet[n & 63]);
        i += 3;
    }
    size_t rem = data.size() - i;
    if (rem == 1) {
        uint32_t n = static_cast<uint8_t>(data[i]) << 16;
        out.push_back(alphabet[(n >> 18) & 63]);
        out.push_back(alphabet[(n >> 12) & 63]);
        if (padded) out.append("==");
    } else if (rem == 2) {
        uint32_t n = (static_cast<uint8_t>(data[i]) << 16) | (static_cast<uint8_t>(data[i + 1]) << 8);
        out.push_back(alphabet[(n >> 18) & 63]);
        out.push_back(alphabet[(n >> 12) & 63]);
        out.push_back(alphabet[(n >> 6) & 63]);
        if (padded) out.push_back('=');
    }
    return out;
}

/// Decodes standard or URL-safe base64, padded or not. Throws IoError on bad input.
inline std::string base64_decode(std::string_view text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+' || c == '-') return 62;
        if (c == '/' || c == '_') return 63;
        return -1;
    };
    std::string out;
    uint32_t buf = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        int v = value_of(c);
        if (v < 0) throw IoError("invalid base64 input");
        buf = (buf << 6) | static_cast<uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>((buf >> bits) & 0xff));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Percent encoding

inline bool is_unreserved(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
           c == '.' || c == '_' || c == '~';
}

inline std::string percent_encode(std::string_view s) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (is_unreserved(c)) {
            out.push_back(c);
        } else {
            out.push_back('%');
            out.push_back(kHex[(static_cast<uint8_t>(c) >> 4) & 0xf]);
            out.push_back(kHex[static_cast<uint8_t>(c) & 0xf]);
        }
    }
    return out;
}

/// Decodes %XX sequences; optionally treats '+' as space (form semantics).
/// Malformed escapes are kept verbatim.
inline std::string percent_decode(std::string_view s, bool plus_as_space = false) {
    auto hex_val = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '%' && i + 2 < s.size()) {
            int hi = hex_val(s[i + 1]);
            int lo = hex_val(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>((hi << 4) | lo));
                i += 2;
                continue;
            }
        }
        if (plus_as_space && c == '+') {
            out.push_back(' ');
            continue;
        }
        out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Digests (OpenSSL EVP)

inline std::string digest_hex(std::string_view algorithm, std::string_view data) {
    const EVP_MD* md = EVP_get_digestbyname(std::string(algorithm).c_str());
    if (md == nullptr) throw IoError("unknown digest algorithm: " + std::string(algorithm));
    unsigned char buf[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), buf, &len) != 1) {
        throw IoError("digest computation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[(buf[i] >> 4) & 0xf]);
        out.push_back(kHex[buf[i] & 0xf]);
    }
    return out;
}

inline std::string md5_hex(std::string_view data) { return digest_hex("MD5", data); }
inline std::string sha1_hex(std::string_view data) { return digest_hex("SHA1", data); }
inline std::string sha256_hex(std::string_view data) { return digest_hex("SHA256", data); }

// ---------------------------------------------------------------------------
// Lossy UTF-8

/// Replaces invalid UTF-8 sequences with U+FFFD while passing valid bytes
/// through unchanged. ASCII (including control bytes) survives as-is, so
/// keyword scanning over binary-ish bodies still sees the embedded text.
inline std::string lossy_utf8(std::string_view bytes) {
    static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(bytes.size());
    size_t i = 0;
    while (i < bytes.size()) {
        uint8_t b = static_cast<uint8_t>(bytes[i]);
        if (b < 0x80) {
            out.push_back(static_cast<char>(b));
            ++i;
            continue;
        }
        size_t len = 0;
        if ((b & 0xE0) == 0xC0) len = 2;
        else if ((b & 0xF0) == 0xE0) len = 3;
        else if ((b & 0xF8) == 0xF0) len = 4;
        if (len == 0 || i + len > bytes.size()) {
            out.append(kReplacement);
            ++i;
            continue;
        }
        bool ok = true;
        for (size_t j = 1; j < len; ++j) {
            if ((static_cast<uint8_t>(bytes[i + j]) & 0xC0) != 0x80) {
                ok = false;
                break;
            }
        }
        if (ok) {
            out.append(bytes.substr(i, len));
            i += len;
        } else {
            out.append(kReplacement);
            ++i;
        }
    }
    return out;
}

} // namespace mhaudit::util

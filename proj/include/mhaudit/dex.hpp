// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mhaudit/errors.hpp"

namespace mhaudit {

// Dalvik executable reader covering exactly the tables needed for class-name
// extraction: header, string_ids and type_ids. Method, field and code
// sections are never touched.

namespace dexdetail {

constexpr uint32_t kHeaderSize = 0x70;
constexpr uint32_t kEndianConstant = 0x12345678;
constexpr uint32_t kReverseEndianConstant = 0x78563412;

inline uint32_t read_u32(std::span<const uint8_t> bytes, size_t off) {
    return static_cast<uint32_t>(bytes[off]) | (static_cast<uint32_t>(bytes[off + 1]) << 8) |
           (static_cast<uint32_t>(bytes[off + 2]) << 16) | (static_cast<uint32_t>(bytes[off + 3]) << 24);
}

inline uint32_t read_uleb128(std::span<const uint8_t> bytes, size_t& off) {
    uint32_t result = 0;
    int shift = 0;
    while (true) {
        if (off >= bytes.size()) throw MalformedDexError("truncated uleb128");
        uint8_t b = bytes[off++];
        result |= static_cast<uint32_t>(b & 0x7f) << shift;
        if ((b & 0x80) == 0) break;
        shift += 7;
        if (shift > 28) throw MalformedDexError("oversized uleb128");
    }
    return result;
}

inline void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

/// Decodes the NUL-terminated MUTF-8 payload of a string_data_item into
/// UTF-8. ASCII takes the fast path; surrogate pairs are combined
/// permissively and undecodable bytes become U+FFFD.
inline std::string decode_mutf8(std::span<const uint8_t> bytes, size_t off) {
    std::string out;
    std::vector<uint16_t> units;
    while (true) {
        if (off >= bytes.size()) throw MalformedDexError("unterminated string data");
        uint8_t b = bytes[off];
        if (b == 0) break;
        if (b < 0x80) {
            units.push_back(b);
            ++off;
        } else if ((b & 0xE0) == 0xC0) {
            if (off + 1 >= bytes.size()) throw MalformedDexError("truncated string data");
            uint8_t b2 = bytes[off + 1];
            if ((b2 & 0xC0) == 0x80) {
                units.push_back(static_cast<uint16_t>(((b & 0x1F) << 6) | (b2 & 0x3F)));
                off += 2;
            } else {
                units.push_back(0xFFFD);
                ++off;
            }
        } else if ((b & 0xF0) == 0xE0) {
            if (off + 2 >= bytes.size()) throw MalformedDexError("truncated string data");
            uint8_t b2 = bytes[off + 1];
            uint8_t b3 = bytes[off + 2];
            if ((b2 & 0xC0) == 0x80 && (b3 & 0xC0) == 0x80) {
                units.push_back(
                    static_cast<uint16_t>(((b & 0x0F) << 12) | ((b2 & 0x3F) << 6) | (b3 & 0x3F)));
                off += 3;
            } else {
                units.push_back(0xFFFD);
                ++off;
            }
        } else {
            units.push_back(0xFFFD);
            ++off;
        }
    }
    for (size_t i = 0; i < units.size(); ++i) {
        uint16_t u = units[i];
        if (u >= 0xD800 && u <= 0xDBFF && i + 1 < units.size() && units[i + 1] >= 0xDC00 &&
            units[i + 1] <= 0xDFFF) {
            uint32_t cp = 0x10000 + ((static_cast<uint32_t>(u) - 0xD800) << 10) +
                          (static_cast<uint32_t>(units[i + 1]) - 0xDC00);
            append_utf8(out, cp);
            ++i;
        } else if (u >= 0xD800 && u <= 0xDFFF) {
            append_utf8(out, 0xFFFD); // lone surrogate
        } else {
            append_utf8(out, u);
        }
    }
    return out;
}

} // namespace dexdetail

inline bool looks_like_dex(std::span<const uint8_t> bytes) {
    return bytes.size() >= 8 && bytes[0] == 'd' && bytes[1] == 'e' && bytes[2] == 'x' &&
           bytes[3] == '\n';
}

class DexFile {
public:
    /// Parses header, string_ids and type_ids. Throws MalformedDex on bad
    /// magic, unsupported endianness or truncated tables.
    static DexFile parse(std::span<const uint8_t> bytes) {
        using namespace dexdetail;
        if (!looks_like_dex(bytes)) throw MalformedDexError("bad dex magic");
        if (bytes.size() < kHeaderSize) throw MalformedDexError("truncated dex header");
        for (int i = 4; i < 7; ++i) {
            if (bytes[i] < '0' || bytes[i] > '9') throw MalformedDexError("bad dex version");
        }
        if (bytes[7] != 0) throw MalformedDexError("bad dex version terminator");

        uint32_t header_size = read_u32(bytes, 0x24);
        uint32_t endian_tag = read_u32(bytes, 0x28);
        if (endian_tag == kReverseEndianConstant) {
            throw MalformedDexError("big-endian dex files are not supported");
        }
        if (endian_tag != kEndianConstant) throw MalformedDexError("bad endian tag");
        if (header_size < kHeaderSize) throw MalformedDexError("header size too small");

        uint32_t string_ids_size = read_u32(bytes, 0x38);
        uint32_t string_ids_off = read_u32(bytes, 0x3C);
        uint32_t type_ids_size = read_u32(bytes, 0x40);
        uint32_t type_ids_off = read_u32(bytes, 0x44);

        auto check_table = [&](uint64_t off, uint64_t count, uint64_t elem) {
            if (count == 0) return;
            if (off + count * elem > bytes.size()) throw MalformedDexError("truncated id table");
        };
        check_table(string_ids_off, string_ids_size, 4);
        check_table(type_ids_off, type_ids_size, 4);

        DexFile dex;
        dex.strings_.reserve(string_ids_size);
        for (uint32_t i = 0; i < string_ids_size; ++i) {
            uint32_t data_off = read_u32(bytes, string_ids_off + i * 4u);
            if (data_off >= bytes.size()) throw MalformedDexError("string data offset out of range");
            size_t pos = data_off;
            read_uleb128(bytes, pos); // utf16 length; payload is NUL-terminated
            dex.strings_.push_back(decode_mutf8(bytes, pos));
        }
        dex.type_descriptors_.reserve(type_ids_size);
        for (uint32_t i = 0; i < type_ids_size; ++i) {
            uint32_t descriptor_idx = read_u32(bytes, type_ids_off + i * 4u);
            if (descriptor_idx >= dex.strings_.size()) {
                throw MalformedDexError("type descriptor index out of range");
            }
            dex.type_descriptors_.push_back(dex.strings_[descriptor_idx]);
        }
        return dex;
    }

    const std::vector<std::string>& strings() const { return strings_; }
    const std::vector<std::string>& type_descriptors() const { return type_descriptors_; }

private:
    std::vector<std::string> strings_;
    std::vector<std::string> type_descriptors_;
};

/// Converts a reference-type descriptor "Lcom/foo/Bar;" to dotted form
/// "com.foo.Bar". Returns empty for primitives and array descriptors.
inline std::string descriptor_to_dotted(std::string_view descriptor) {
    if (descriptor.size() < 3 || descriptor.front() != 'L' || descriptor.back() != ';') return {};
    std::string out(descriptor.substr(1, descriptor.size() - 2));
    for (char& c : out) {
        if (c == '/') c = '.';
    }
    return out;
}

} // namespace mhaudit

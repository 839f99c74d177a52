// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <zlib.h>

namespace testsupport {

// ---------------------------------------------------------------------------
// Hand-assembled DEX images. The builder lays out header, string_ids,
// type_ids and string data exactly per the published format, so the parser
// under test gets realistic input without any shared code path.

class DexBuilder {
public:
    DexBuilder& add_type(std::string descriptor) {
        type_descriptors_.push_back(std::move(descriptor));
        return *this;
    }

    DexBuilder& add_string(std::string s) {
        extra_strings_.push_back(std::move(s));
        return *this;
    }

    std::vector<uint8_t> build() const {
        // String table must be sorted by code point; ASCII byte order suffices.
        std::set<std::string> pool(extra_strings_.begin(), extra_strings_.end());
        pool.insert(type_descriptors_.begin(), type_descriptors_.end());
        std::vector<std::string> strings(pool.begin(), pool.end());

        auto string_index = [&strings](const std::string& s) -> uint32_t {
            auto it = std::lower_bound(strings.begin(), strings.end(), s);
            return static_cast<uint32_t>(it - strings.begin());
        };

        const uint32_t header_size = 0x70;
        const uint32_t string_ids_off = header_size;
        const uint32_t string_count = static_cast<uint32_t>(strings.size());
        const uint32_t type_ids_off = string_ids_off + string_count * 4;
        const uint32_t type_count = static_cast<uint32_t>(type_descriptors_.size());
        uint32_t data_off = type_ids_off + type_count * 4;

        // String data: uleb128 utf16 length + payload + NUL (ASCII only here).
        std::vector<uint32_t> data_offsets;
        std::vector<uint8_t> data;
        for (const std::string& s : strings) {
            data_offsets.push_back(data_off + static_cast<uint32_t>(data.size()));
            uint32_t len = static_cast<uint32_t>(s.size());
            while (len >= 0x80) {
                data.push_back(static_cast<uint8_t>((len & 0x7f) | 0x80));
                len >>= 7;
            }
            data.push_back(static_cast<uint8_t>(len));
            data.insert(data.end(), s.begin(), s.end());
            data.push_back(0);
        }
        uint32_t file_size = data_off + static_cast<uint32_t>(data.size());

        std::vector<uint8_t> out(file_size, 0);
        auto put_u32 = [&out](size_t off, uint32_t v) {
            out[off] = static_cast<uint8_t>(v & 0xff);
            out[off + 1] = static_cast<uint8_t>((v >> 8) & 0xff);
            out[off + 2] = static_cast<uint8_t>((v >> 16) & 0xff);
            out[off + 3] = static_cast<uint8_t>((v >> 24) & 0xff);
        };

        const char magic[8] = {'d', 'e', 'x', '\n', '0', '3', '5', '\0'};
        std::copy(magic, magic + 8, out.begin());
        put_u32(0x20, file_size);
        put_u32(0x24, header_size);
        put_u32(0x28, 0x12345678); // little-endian tag
        put_u32(0x38, string_count);
        put_u32(0x3C, string_count ? string_ids_off : 0);
        put_u32(0x40, type_count);
        put_u32(0x44, type_count ? type_ids_off : 0);
        put_u32(0x68, static_cast<uint32_t>(data.size()));
        put_u32(0x6C, data_off);

        for (uint32_t i = 0; i < string_count; ++i) {
            put_u32(string_ids_off + i * 4, data_offsets[i]);
        }
        for (uint32_t i = 0; i < type_count; ++i) {
            put_u32(type_ids_off + i * 4, string_index(type_descriptors_[i]));
        }
        std::copy(data.begin(), data.end(), out.begin() + data_off);

        uint32_t checksum = static_cast<uint32_t>(
            ::adler32(1L, reinterpret_cast<const Bytef*>(out.data()) + 12, file_size - 12));
        put_u32(8, checksum);
        return out;
    }

private:
    std::vector<std::string> type_descriptors_;
    std::vector<std::string> extra_strings_;
};

// ---------------------------------------------------------------------------
// Independent string-table reader. Deliberately avoids DexFile: it walks the
// string table only (never type_ids) and filters for class-descriptor shape,
// giving a second route to the expected class set.

inline std::set<std::string> string_table_class_names(const std::vector<uint8_t>& dex) {
    auto u32 = [&dex](size_t off) -> uint32_t {
        return static_cast<uint32_t>(dex[off]) | (static_cast<uint32_t>(dex[off + 1]) << 8) |
               (static_cast<uint32_t>(dex[off + 2]) << 16) |
               (static_cast<uint32_t>(dex[off + 3]) << 24);
    };
    std::set<std::string> names;
    uint32_t count = u32(0x38);
    uint32_t table = u32(0x3C);
    for (uint32_t i = 0; i < count; ++i) {
        size_t pos = u32(table + i * 4);
        while (dex[pos] & 0x80) ++pos; // skip uleb128 length
        ++pos;
        std::string s;
        while (dex[pos] != 0) s.push_back(static_cast<char>(dex[pos++]));
        if (s.size() < 3 || s.front() != 'L' || s.back() != ';') continue;
        std::string dotted = s.substr(1, s.size() - 2);
        bool valid = true;
        for (char& c : dotted) {
            if (c == '/') c = '.';
            else if (c == ';' || c == '[') valid = false;
        }
        if (valid) names.insert(dotted);
    }
    return names;
}

// ---------------------------------------------------------------------------
// Scratch directories under the build tree.

inline std::filesystem::path fresh_dir(const std::string& name) {
    static std::mt19937_64 rng{std::random_device{}()};
    auto base = std::filesystem::temp_directory_path() / "mhaudit-tests";
    std::filesystem::create_directories(base);
    auto dir = base / (name + "-" + std::to_string(rng()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testsupport

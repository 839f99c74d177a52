// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mhaudit/errors.hpp"
#include "mhaudit/util/compress.hpp"

namespace mhaudit {

// Minimal ZIP central-directory reader, sufficient for pulling classes*.dex
// members out of an APK. Stored and deflated entries are supported; zip64
// archives are rejected.

struct ZipEntry {
    std::string name;
    uint16_t method = 0; // 0 = stored, 8 = deflate
    uint32_t compressed_size = 0;
    uint32_t uncompressed_size = 0;
    uint32_t local_header_offset = 0;
};

namespace zipdetail {

inline uint16_t read_u16(std::span<const uint8_t> b, size_t off) {
    return static_cast<uint16_t>(b[off] | (b[off + 1] << 8));
}

inline uint32_t read_u32(std::span<const uint8_t> b, size_t off) {
    return static_cast<uint32_t>(b[off]) | (static_cast<uint32_t>(b[off + 1]) << 8) |
           (static_cast<uint32_t>(b[off + 2]) << 16) | (static_cast<uint32_t>(b[off + 3]) << 24);
}

constexpr uint32_t kEocdSignature = 0x06054b50;
constexpr uint32_t kCentralSignature = 0x02014b50;
constexpr uint32_t kLocalSignature = 0x04034b50;

} // namespace zipdetail

inline bool looks_like_zip(std::span<const uint8_t> bytes) {
    return bytes.size() >= 4 && bytes[0] == 'P' && bytes[1] == 'K' &&
           (bytes[2] == 0x03 || bytes[2] == 0x05) && (bytes[3] == 0x04 || bytes[3] == 0x06);
}

class ZipReader {
public:
    static ZipReader open(std::span<const uint8_t> bytes) {
        using namespace zipdetail;
        if (bytes.size() < 22) throw UnreadableArtifactError("archive too small for zip");

        // EOCD sits within the final 64KiB + 22 bytes (max comment length).
        size_t scan_start = bytes.size() >= (65535 + 22) ? bytes.size() - 65535 - 22 : 0;
        size_t eocd = SIZE_MAX;
        for (size_t i = bytes.size() - 22 + 1; i-- > scan_start;) {
            if (read_u32(bytes, i) == kEocdSignature) {
                eocd = i;
                break;
            }
        }
        if (eocd == SIZE_MAX) throw UnreadableArtifactError("zip end-of-central-directory not found");

        uint16_t entry_count = read_u16(bytes, eocd + 10);
        uint32_t cd_size = read_u32(bytes, eocd + 12);
        uint32_t cd_offset = read_u32(bytes, eocd + 16);
        if (cd_offset == 0xFFFFFFFF || entry_count == 0xFFFF) {
            throw UnreadableArtifactError("zip64 archives are not supported");
        }
        if (static_cast<uint64_t>(cd_offset) + cd_size > bytes.size()) {
            throw UnreadableArtifactError("zip central directory out of range");
        }

        ZipReader reader;
        reader.bytes_ = bytes;
        size_t pos = cd_offset;
        for (uint16_t i = 0; i < entry_count; ++i) {
            if (pos + 46 > bytes.size() || read_u32(bytes, pos) != kCentralSignature) {
                throw UnreadableArtifactError("corrupt zip central directory entry");
            }
            ZipEntry e;
            e.method = read_u16(bytes, pos + 10);
            e.compressed_size = read_u32(bytes, pos + 20);
            e.uncompressed_size = read_u32(bytes, pos + 24);
            uint16_t name_len = read_u16(bytes, pos + 28);
            uint16_t extra_len = read_u16(bytes, pos + 30);
            uint16_t comment_len = read_u16(bytes, pos + 32);
            e.local_header_offset = read_u32(bytes, pos + 42);
            if (pos + 46 + name_len > bytes.size()) {
                throw UnreadableArtifactError("corrupt zip entry name");
            }
            e.name.assign(reinterpret_cast<const char*>(bytes.data() + pos + 46), name_len);
            reader.entries_.push_back(std::move(e));
            pos += 46u + name_len + extra_len + comment_len;
        }
        return reader;
    }

    const std::vector<ZipEntry>& entries() const { return entries_; }

    std::vector<uint8_t> read(const ZipEntry& entry) const {
        using namespace zipdetail;
        size_t pos = entry.local_header_offset;
        if (pos + 30 > bytes_.size() || read_u32(bytes_, pos) != kLocalSignature) {
            throw UnreadableArtifactError("corrupt zip local header for " + entry.name);
        }
        uint16_t name_len = read_u16(bytes_, pos + 26);
        uint16_t extra_len = read_u16(bytes_, pos + 28);
        size_t data_off = pos + 30u + name_len + extra_len;
        if (data_off + entry.compressed_size > bytes_.size()) {
            throw UnreadableArtifactError("zip entry data out of range: " + entry.name);
        }
        std::string_view raw(reinterpret_cast<const char*>(bytes_.data() + data_off),
                             entry.compressed_size);
        if (entry.method == 0) {
            return {raw.begin(), raw.end()};
        }
        if (entry.method == 8) {
            auto inflated = util::inflate_raw(raw);
            if (!inflated || inflated->size() != entry.uncompressed_size) {
                throw UnreadableArtifactError("zip inflate failed for " + entry.name);
            }
            return {inflated->begin(), inflated->end()};
        }
        throw UnreadableArtifactError("unsupported zip compression method for " + entry.name);
    }

private:
    std::span<const uint8_t> bytes_;
    std::vector<ZipEntry> entries_;
};

// ---------------------------------------------------------------------------
// Writer (used by fixture tooling; stored and deflated entries only).

class ZipWriter {
public:
    void add(const std::string& name, std::span<const uint8_t> data, bool deflate = false) {
        Member m;
        m.name = name;
        m.uncompressed_size = static_cast<uint32_t>(data.size());
        m.crc32 = static_cast<uint32_t>(
            ::crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
        if (deflate) {
            std::string packed = util::deflate_raw(
                std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
            m.method = 8;
            m.data.assign(packed.begin(), packed.end());
        } else {
            m.method = 0;
            m.data.assign(data.begin(), data.end());
        }
        members_.push_back(std::move(m));
    }

    std::vector<uint8_t> finish() const {
        std::vector<uint8_t> out;
        std::vector<uint32_t> offsets;
        for (const Member& m : members_) {
            offsets.push_back(static_cast<uint32_t>(out.size()));
            push_u32(out, zipdetail::kLocalSignature);
            push_u16(out, 20);       // version needed
            push_u16(out, 0);        // flags
            push_u16(out, m.method);
            push_u16(out, 0);        // mod time
            push_u16(out, 0);        // mod date
            push_u32(out, m.crc32);
            push_u32(out, static_cast<uint32_t>(m.data.size()));
            push_u32(out, m.uncompressed_size);
            push_u16(out, static_cast<uint16_t>(m.name.size()));
            push_u16(out, 0); // extra len
            out.insert(out.end(), m.name.begin(), m.name.end());
            out.insert(out.end(), m.data.begin(), m.data.end());
        }
        uint32_t cd_start = static_cast<uint32_t>(out.size());
        for (size_t i = 0; i < members_.size(); ++i) {
            const Member& m = members_[i];
            push_u32(out, zipdetail::kCentralSignature);
            push_u16(out, 20); // version made by
            push_u16(out, 20); // version needed
            push_u16(out, 0);
            push_u16(out, m.method);
            push_u16(out, 0);
            push_u16(out, 0);
            push_u32(out, m.crc32);
            push_u32(out, static_cast<uint32_t>(m.data.size()));
            push_u32(out, m.uncompressed_size);
            push_u16(out, static_cast<uint16_t>(m.name.size()));
            push_u16(out, 0);
            push_u16(out, 0);
            push_u16(out, 0);
            push_u16(out, 0);
            push_u32(out, 0);
            push_u32(out, offsets[i]);
            out.insert(out.end(), m.name.begin(), m.name.end());
        }
        uint32_t cd_size = static_cast<uint32_t>(out.size()) - cd_start;
        push_u32(out, zipdetail::kEocdSignature);
        push_u16(out, 0);
        push_u16(out, 0);
        push_u16(out, static_cast<uint16_t>(members_.size()));
        push_u16(out, static_cast<uint16_t>(members_.size()));
        push_u32(out, cd_size);
        push_u32(out, cd_start);
        push_u16(out, 0); // comment length
        return out;
    }

private:
    struct Member {
        std::string name;
        uint16_t method = 0;
        uint32_t crc32 = 0;
        uint32_t uncompressed_size = 0;
        std::vector<uint8_t> data;
    };

    static void push_u16(std::vector<uint8_t>& out, uint16_t v) {
        out.push_back(static_cast<uint8_t>(v & 0xff));
        out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    }
    static void push_u32(std::vector<uint8_t>& out, uint32_t v) {
        out.push_back(static_cast<uint8_t>(v & 0xff));
        out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
        out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
        out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
    }

    std::vector<Member> members_;
};

} // namespace mhaudit

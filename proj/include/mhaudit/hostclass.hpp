// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>

#include "mhaudit/errors.hpp"
#include "mhaudit/util/encoding.hpp"
#include "mhaudit/util/fileio.hpp"
#include "mhaudit/util/strings.hpp"

namespace mhaudit {

enum class HostLabel { NonTracker = 0, Tracker = 1 };

inline std::string_view to_id(HostLabel l) {
    return l == HostLabel::Tracker ? "tracker" : "non_tracker";
}

enum class HostMatchMode { Exact = 0, Suffix = 1 };

inline std::string_view to_id(HostMatchMode m) {
    return m == HostMatchMode::Exact ? "exact" : "suffix";
}

inline HostMatchMode parse_host_match_mode(std::string_view id) {
    if (id == "exact") return HostMatchMode::Exact;
    if (id == "suffix") return HostMatchMode::Suffix;
    throw ConfigError("unknown host match mode: " + std::string(id));
}

/// Parsed hosts-file blocklist. Immutable after parse.
struct HostsList {
    std::set<std::string> entries;
    std::string source_digest;
    int malformed_lines = 0;

    bool contains(std::string_view host) const { return entries.count(std::string(host)) > 0; }
};

namespace detail {

inline bool is_loopback_name(std::string_view host) {
    return host == "localhost" || host == "localhost.localdomain" || host == "broadcasthost" ||
           host == "local" || host == "ip6-localhost" || host == "ip6-loopback";
}

inline bool plausible_hostname_token(std::string_view token) {
    if (token.empty()) return false;
    for (char c : token) {
        if (c == '/' || c == ':' || std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

inline bool plausible_ip_token(std::string_view token) {
    if (token.empty()) return false;
    for (char c : token) {
        bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F') ||
                  c == '.' || c == ':' || c == '%';
        if (!ok) return false;
    }
    return true;
}

} // namespace detail

/// Parses hosts-file syntax: "<ip> <hostname> [hostname...]" lines, '#'
/// comments, blank lines. Hostnames are lowercased; loopback names dropped.
/// Malformed lines are counted and skipped, never fatal.
inline HostsList parse_hosts_list(std::string_view text) {
    HostsList list;
    list.source_digest = util::sha256_hex(text);
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line = (eol == std::string_view::npos) ? text.substr(pos)
                                                                : text.substr(pos, eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;

        if (size_t hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = util::trim(line);
        if (line.empty()) continue;

        auto tokens = util::split_whitespace(line);
        if (tokens.size() < 2 || !detail::plausible_ip_token(tokens[0])) {
            ++list.malformed_lines;
            continue;
        }
        bool line_ok = true;
        for (size_t i = 1; i < tokens.size(); ++i) {
            if (!detail::plausible_hostname_token(tokens[i])) {
                line_ok = false;
                break;
            }
        }
        if (!line_ok) {
            ++list.malformed_lines;
            continue;
        }
        for (size_t i = 1; i < tokens.size(); ++i) {
            std::string host = util::to_lower(tokens[i]);
            if (detail::is_loopback_name(host)) continue;
            list.entries.insert(std::move(host));
        }
    }
    return list;
}

inline HostsList load_hosts_list(const std::filesystem::path& file) {
    return parse_hosts_list(util::read_file(file));
}

inline std::string normalize_hostname(std::string_view hostname) {
    std::string_view trimmed = util::trim(hostname);
    if (trimmed.empty()) throw InvalidHostnameError("empty hostname");
    for (char c : trimmed) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            throw InvalidHostnameError("hostname contains whitespace: " + std::string(hostname));
        }
    }
    if (trimmed.size() != hostname.size()) {
        throw InvalidHostnameError("hostname contains whitespace: " + std::string(hostname));
    }
    return util::to_lower(trimmed);
}

/// Labels a hostname against the blocklist. Exact mode requires list
/// membership; Suffix mode also accepts any parent domain reached by
/// stripping leading labels. Unlisted hosts are NonTracker; there is no
/// unknown state.
inline HostLabel classify_host(const HostsList& list, std::string_view hostname, HostMatchMode mode) {
    std::string host = normalize_hostname(hostname);
    if (list.contains(host)) return HostLabel::Tracker;
    if (mode == HostMatchMode::Suffix) {
        std::string_view rest = host;
        while (true) {
            size_t dot = rest.find('.');
            if (dot == std::string_view::npos) break;
            rest = rest.substr(dot + 1);
            if (!rest.empty() && list.contains(rest)) return HostLabel::Tracker;
        }
    }
    return HostLabel::NonTracker;
}

// ---------------------------------------------------------------------------
// Registrable domains

/// Public-suffix list used when grouping hosts into registrable domains.
class PublicSuffixList {
public:
    static PublicSuffixList none() { return PublicSuffixList{}; }

    static PublicSuffixList from_suffixes(std::set<std::string> suffixes) {
        PublicSuffixList psl;
        psl.suffixes_ = std::move(suffixes);
        return psl;
    }

    /// Loads the standard file format: one suffix per line, '//' comments.
    /// Wildcard and exception rules are kept verbatim but only plain suffixes
    /// participate in matching.
    static PublicSuffixList load(const std::filesystem::path& file) {
        PublicSuffixList psl;
        std::string text = util::read_file(file);
        size_t pos = 0;
        while (pos <= text.size()) {
            size_t eol = text.find('\n', pos);
            std::string_view line = (eol == std::string_view::npos)
                                        ? std::string_view(text).substr(pos)
                                        : std::string_view(text).substr(pos, eol - pos);
            pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
            if (size_t c = line.find("//"); c != std::string_view::npos) line = line.substr(0, c);
            line = util::trim(line);
            if (line.empty() || line.front() == '*' || line.front() == '!') continue;
            psl.suffixes_.insert(util::to_lower(line));
        }
        return psl;
    }

    /// Compact fallback snapshot of common multi-part public suffixes.
    static const PublicSuffixList& embedded_snapshot() {
        static const PublicSuffixList psl = from_suffixes({
            "co.uk",  "org.uk", "ac.uk",  "gov.uk", "me.uk",  "net.uk", "ltd.uk", "plc.uk",
            "co.jp",  "ne.jp",  "or.jp",  "ac.jp",  "ad.jp",  "go.jp",
            "co.kr",  "or.kr",  "go.kr",  "ac.kr",
            "com.au", "net.au", "org.au", "edu.au", "gov.au",
            "co.nz",  "net.nz", "org.nz", "govt.nz",
            "co.za",  "org.za", "web.za",
            "com.br", "net.br", "org.br", "gov.br",
            "com.cn", "net.cn", "org.cn", "gov.cn",
            "com.mx", "org.mx", "com.ar", "com.tr", "com.tw", "com.hk", "com.sg", "com.my",
            "co.in",  "net.in", "org.in", "co.id",  "com.vn", "com.ph", "co.th",  "com.sa",
            "co.il",  "org.il", "com.ua", "com.pl", "co.at",  "or.at",
        });
        return psl;
    }

    bool contains(std::string_view suffix) const { return suffixes_.count(std::string(suffix)) > 0; }
    bool empty() const { return suffixes_.empty(); }
    size_t size() const { return suffixes_.size(); }

private:
    std::set<std::string> suffixes_;
};

namespace detail {

inline bool is_ipv4_literal(std::string_view host) {
    int parts = 0;
    size_t start = 0;
    while (start <= host.size()) {
        size_t dot = host.find('.', start);
        std::string_view part = (dot == std::string_view::npos) ? host.substr(start)
                                                                : host.substr(start, dot - start);
        if (part.empty() || part.size() > 3 || !util::is_digits(part)) return false;
        int v = 0;
        for (char c : part) v = v * 10 + (c - '0');
        if (v > 255) return false;
        ++parts;
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return parts == 4;
}

inline bool is_ip_literal(std::string_view host) {
    return host.find(':') != std::string_view::npos || is_ipv4_literal(host);
}

} // namespace detail

/// Collapses a hostname to its registrable domain: the longest matching
/// public suffix plus one label, or the last two labels when no suffix
/// matches. IP literals pass through unchanged.
inline std::string registrable_domain(std::string_view hostname,
                                      const PublicSuffixList& psl = PublicSuffixList::embedded_snapshot()) {
    std::string host = normalize_hostname(hostname);
    if (detail::is_ip_literal(host)) return host;

    std::vector<size_t> label_starts{0};
    for (size_t i = 0; i < host.size(); ++i) {
        if (host[i] == '.') label_starts.push_back(i + 1);
    }
    if (label_starts.size() == 1) return host;

    // Longest proper suffix present in the PSL; the registrable domain is
    // that suffix plus the preceding label.
    for (size_t i = 1; i < label_starts.size(); ++i) {
        std::string_view suffix = std::string_view(host).substr(label_starts[i]);
        if (psl.contains(suffix)) {
            return host.substr(label_starts[i - 1]);
        }
    }
    // Two-label fallback.
    return host.substr(label_starts[label_starts.size() - 2]);
}

} // namespace mhaudit

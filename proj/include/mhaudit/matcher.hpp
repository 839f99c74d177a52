// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mhaudit/errors.hpp"
#include "mhaudit/persona.hpp"
#include "mhaudit/taxonomy.hpp"
#include "mhaudit/util/encoding.hpp"
#include "mhaudit/util/strings.hpp"

namespace mhaudit {

enum class VariantKind {
    Plain = 0,
    PercentEncoded,
    Base64,
    Md5Hex,
    Sha1Hex,
    Sha256Hex,
    KeyedNumeric,
};

constexpr std::array<VariantKind, 7> kVariantKinds{
    VariantKind::Plain,  VariantKind::PercentEncoded, VariantKind::Base64, VariantKind::Md5Hex,
    VariantKind::Sha1Hex, VariantKind::Sha256Hex,     VariantKind::KeyedNumeric,
};

inline std::string_view to_id(VariantKind v) {
    switch (v) {
    case VariantKind::Plain: return "plain";
    case VariantKind::PercentEncoded: return "percent_encoded";
    case VariantKind::Base64: return "base64";
    case VariantKind::Md5Hex: return "md5_hex";
    case VariantKind::Sha1Hex: return "sha1_hex";
    case VariantKind::Sha256Hex: return "sha256_hex";
    case VariantKind::KeyedNumeric: return "keyed_numeric";
    }
    return "plain";
}

inline VariantKind parse_variant_kind(std::string_view id) {
    for (VariantKind v : kVariantKinds) {
        if (id == to_id(v)) return v;
    }
    throw ConfigError("unknown variant kind: " + std::string(id));
}

/// One compiled search pattern. Case-insensitive matching is used for
/// alphabetic plain/percent needles; encoded and hashed needles match
/// exactly.
struct Matcher {
    std::string data_type_id;
    VariantKind variant = VariantKind::Plain;
    std::string needle;
    bool case_insensitive = false;
    std::vector<std::string> key_hints; // KeyedNumeric only, lowercased
};

struct MatcherSet {
    std::vector<Matcher> matchers;
    int numeric_window = 32;
};

namespace matchdetail {

/// The canonical encodings searched for a single non-numeric value.
inline std::vector<std::pair<VariantKind, std::string>> encoded_forms(const std::string& value) {
    std::vector<std::pair<VariantKind, std::string>> forms;
    forms.emplace_back(VariantKind::Plain, value);

    std::string pct = util::percent_encode(value);
    if (pct != value) forms.emplace_back(VariantKind::PercentEncoded, pct);

    std::set<std::string> b64;
    for (bool url_safe : {false, true}) {
        for (bool padded : {true, false}) {
            b64.insert(util::base64_encode(value, url_safe, padded));
        }
    }
    for (const std::string& needle : b64) forms.emplace_back(VariantKind::Base64, needle);

    // Hash variants are derived from the lowercase canonical value and
    // searched in both hex spellings.
    std::string canonical = util::to_lower(value);
    for (auto [variant, hex] :
         {std::pair{VariantKind::Md5Hex, util::md5_hex(canonical)},
          std::pair{VariantKind::Sha1Hex, util::sha1_hex(canonical)},
          std::pair{VariantKind::Sha256Hex, util::sha256_hex(canonical)}}) {
        forms.emplace_back(variant, hex);
        forms.emplace_back(variant, util::to_upper(hex));
    }
    return forms;
}

} // namespace matchdetail

/// Expands every persona value into its searchable variants. Non-numeric
/// values produce plain, percent-encoded, base64 (both alphabets, padded and
/// unpadded) and MD5/SHA-1/SHA-256 hex needles; numeric values produce a
/// single key-gated numeric matcher instead.
inline MatcherSet compile_persona(const Persona& persona, const Taxonomy& taxonomy,
                                  int numeric_window = 32) {
    persona.validate(taxonomy);
    MatcherSet set;
    set.numeric_window = numeric_window;
    std::set<std::tuple<std::string, VariantKind, std::string>> seen;

    for (const PersonaAttribute& attr : persona.attributes) {
        for (const std::string& value : attr.values) {
            if (attr.numeric) {
                Matcher m;
                m.data_type_id = attr.data_type_id;
                m.variant = VariantKind::KeyedNumeric;
                m.needle = value;
                for (const std::string& hint : attr.key_hints) {
                    m.key_hints.push_back(util::to_lower(hint));
                }
                if (seen.emplace(m.data_type_id, m.variant, m.needle).second) {
                    set.matchers.push_back(std::move(m));
                }
                continue;
            }
            for (auto& [variant, needle] : matchdetail::encoded_forms(value)) {
                Matcher m;
                m.data_type_id = attr.data_type_id;
                m.variant = variant;
                m.needle = needle;
                m.case_insensitive = (variant == VariantKind::Plain ||
                                      variant == VariantKind::PercentEncoded) &&
                                     util::has_alpha(needle);
                if (seen.emplace(m.data_type_id, m.variant, m.needle).second) {
                    set.matchers.push_back(std::move(m));
                }
            }
        }
    }
    if (set.matchers.empty()) throw EmptyPersonaError("persona compiled to zero matchers");
    return set;
}

} // namespace mhaudit

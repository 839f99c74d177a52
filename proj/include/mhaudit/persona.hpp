// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhaudit/errors.hpp"
#include "mhaudit/taxonomy.hpp"
#include "mhaudit/util/fileio.hpp"

namespace mhaudit {

/// One persona attribute: the known values injected during app interaction.
/// Numeric attributes additionally carry the key names under which apps are
/// expected to transmit them, since bare small numbers are unsearchable.
struct PersonaAttribute {
    std::string data_type_id;
    std::vector<std::string> values;
    bool numeric = false;
    std::vector<std::string> key_hints;
};

struct Persona {
    std::vector<PersonaAttribute> attributes;

    void validate(const Taxonomy& taxonomy) const {
        if (attributes.empty()) throw EmptyPersonaError("persona has no attributes");
        for (const PersonaAttribute& a : attributes) {
            taxonomy.lookup(a.data_type_id); // throws UnknownDataType
            if (a.values.empty()) {
                throw ConfigError("persona attribute " + a.data_type_id + " has no values");
            }
            if (a.numeric && a.key_hints.empty()) {
                throw ConfigError("numeric persona attribute " + a.data_type_id +
                                  " needs at least one key hint");
            }
        }
    }

    const PersonaAttribute* find(std::string_view data_type_id) const {
        for (const PersonaAttribute& a : attributes) {
            if (a.data_type_id == data_type_id) return &a;
        }
        return nullptr;
    }

    static Persona from_json(const nlohmann::json& doc) {
        if (!doc.is_array()) throw ConfigError("persona document must be a JSON array");
        Persona p;
        for (const auto& item : doc) {
            PersonaAttribute a;
            a.data_type_id = item.value("type", "");
            if (item.contains("values")) {
                for (const auto& v : item["values"]) a.values.push_back(v.get<std::string>());
            }
            a.numeric = item.value("numeric", false);
            if (item.contains("key_hints")) {
                for (const auto& h : item["key_hints"]) a.key_hints.push_back(h.get<std::string>());
            }
            p.attributes.push_back(std::move(a));
        }
        return p;
    }

    static Persona load(const std::filesystem::path& file) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(util::read_file(file));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("persona parse error in " + file.string() + ": " + e.what());
        }
        return from_json(doc);
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json doc = nlohmann::ordered_json::array();
        for (const PersonaAttribute& a : attributes) {
            doc.push_back({{"type", a.data_type_id},
                           {"values", a.values},
                           {"numeric", a.numeric},
                           {"key_hints", a.key_hints}});
        }
        return doc;
    }

    /// Built-in synthetic persona covering every default taxonomy type.
    /// Values are chosen so that no value is a substring of another,
    /// keeping planted-leak bookkeeping unambiguous.
    static const Persona& default_persona() {
        static const Persona p = [] {
            Persona persona;
            auto add = [&persona](std::string type, std::vector<std::string> values, bool numeric = false,
                                  std::vector<std::string> hints = {}) {
                persona.attributes.push_back(
                    {std::move(type), std::move(values), numeric, std::move(hints)});
            };
            add("advertising_id", {"38400000-8cf0-11bd-b23e-10b96e40000d"});
            add("android_id", {"9774d56d682e549c"});
            add("imei", {"356938035643809"});
            add("mac_address", {"02:00:5e:ab:cd:ef"});
            add("gsf_id", {"3a67f1e84c29b0d5"});
            add("hardware_serial", {"R58M12ABCDE"});
            add("gps_latitude", {"52.5167"}, true, {"lat", "latitude"});
            add("gps_longitude", {"13.3833"}, true, {"lon", "lng", "longitude"});
            add("city", {"Berlin"});
            add("first_name", {"Erika"});
            add("last_name", {"Mustermann"});
            add("email_address", {"e.muster@example.com"});
            add("phone_number", {"+493025550172"});
            add("date_of_birth", {"1986-03-14"});
            add("body_weight", {"82"}, true, {"weight", "weight_kg"});
            add("body_height", {"171"}, true, {"height", "height_cm"});
            add("body_mass_index", {"28.1"}, true, {"bmi"});
            add("waist_circumference", {"89"}, true, {"waist"});
            add("body_fat_percentage", {"31.5"}, true, {"body_fat", "fat_pct"});
            add("step_count", {"8421"}, true, {"steps", "step_count"});
            add("fitness_goal", {"lose weight"});
            add("eating_habits", {"vegetarian"});
            add("calorie_intake", {"1840"}, true, {"calories", "kcal"});
            add("workout_type", {"jogging"});
            add("workout_duration", {"45"}, true, {"duration", "duration_min"});
            add("sleep_duration", {"7.5"}, true, {"sleep", "sleep_hours"});
            add("heart_rate", {"67"}, true, {"heart_rate", "pulse", "bpm"});
            add("blood_pressure", {"118/79"});
            add("blood_glucose", {"5.4"}, true, {"glucose", "blood_glucose"});
            add("medical_condition", {"migraine", "diabetes"});
            add("medication", {"ibuprofen"});
            add("menstrual_cycle", {"29"}, true, {"cycle", "cycle_length"});
            add("period_start_date", {"2024-01-05"});
            add("ovulation_date", {"2024-01-19"});
            add("pregnancy_status", {"not pregnant"});
            return persona;
        }();
        return p;
    }
};

} // namespace mhaudit

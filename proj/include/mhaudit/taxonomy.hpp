// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhaudit/errors.hpp"
#include "mhaudit/util/fileio.hpp"

namespace mhaudit {

// ---------------------------------------------------------------------------
// Specificity

/// Sensitivity rank of a data category. The order is total:
/// Standard < Nonstandard < Medical.
enum class Specificity { Standard = 0, Nonstandard = 1, Medical = 2 };

constexpr std::array<Specificity, 3> kSpecificities{Specificity::Standard, Specificity::Nonstandard,
                                                    Specificity::Medical};

inline std::string_view to_id(Specificity s) {
    switch (s) {
    case Specificity::Standard: return "standard";
    case Specificity::Nonstandard: return "nonstandard";
    case Specificity::Medical: return "medical";
    }
    return "standard";
}

inline std::string_view display_name(Specificity s) {
    switch (s) {
    case Specificity::Standard: return "Standard";
    case Specificity::Nonstandard: return "Nonstandard";
    case Specificity::Medical: return "Medical";
    }
    return "Standard";
}

inline Specificity parse_specificity(std::string_view id) {
    for (Specificity s : kSpecificities) {
        if (id == to_id(s)) return s;
    }
    throw ConfigError("unknown specificity: " + std::string(id));
}

// ---------------------------------------------------------------------------
// DataCategory

enum class DataCategory {
    DeviceIds = 0,
    Location,
    UserInfo,
    BodyMeasurements,
    FitnessInfo,
    FemaleHealthInfo,
    MedicalInfo,
};

constexpr std::array<DataCategory, 7> kDataCategories{
    DataCategory::DeviceIds,       DataCategory::Location,    DataCategory::UserInfo,
    DataCategory::BodyMeasurements, DataCategory::FitnessInfo, DataCategory::FemaleHealthInfo,
    DataCategory::MedicalInfo,
};

constexpr Specificity specificity_of(DataCategory c) {
    switch (c) {
    case DataCategory::DeviceIds:
    case DataCategory::Location:
    case DataCategory::UserInfo: return Specificity::Standard;
    case DataCategory::BodyMeasurements:
    case DataCategory::FitnessInfo: return Specificity::Nonstandard;
    case DataCategory::FemaleHealthInfo:
    case DataCategory::MedicalInfo: return Specificity::Medical;
    }
    return Specificity::Standard;
}

inline std::string_view to_id(DataCategory c) {
    switch (c) {
    case DataCategory::DeviceIds: return "device_ids";
    case DataCategory::Location: return "location";
    case DataCategory::UserInfo: return "user_info";
    case DataCategory::BodyMeasurements: return "body_measurements";
    case DataCategory::FitnessInfo: return "fitness_info";
    case DataCategory::FemaleHealthInfo: return "female_health_info";
    case DataCategory::MedicalInfo: return "medical_info";
    }
    return "device_ids";
}

inline std::string_view display_name(DataCategory c) {
    switch (c) {
    case DataCategory::DeviceIds: return "Device IDs";
    case DataCategory::Location: return "Location";
    case DataCategory::UserInfo: return "User Info";
    case DataCategory::BodyMeasurements: return "Body measurements";
    case DataCategory::FitnessInfo: return "Fitness info";
    case DataCategory::FemaleHealthInfo: return "Female health info";
    case DataCategory::MedicalInfo: return "Medical info";
    }
    return "Device IDs";
}

inline DataCategory parse_data_category(std::string_view id) {
    for (DataCategory c : kDataCategories) {
        if (id == to_id(c)) return c;
    }
    throw MalformedTaxonomyError("unknown data category: " + std::string(id));
}

// ---------------------------------------------------------------------------
// LabelCategory

/// Privacy-label category. FitnessInfo and HealthInfo are the two
/// health-related subcategories; every store category outside the audit's
/// reach is folded into Other with its original name retained.
enum class LabelKind {
    DeviceOrOtherIds = 0,
    Location,
    PersonalInfo,
    FitnessInfo,
    HealthInfo,
    Other,
};

constexpr std::array<LabelKind, 5> kRelevantLabels{
    LabelKind::DeviceOrOtherIds, LabelKind::Location, LabelKind::PersonalInfo,
    LabelKind::FitnessInfo,      LabelKind::HealthInfo,
};

inline std::string_view to_id(LabelKind k) {
    switch (k) {
    case LabelKind::DeviceOrOtherIds: return "device_or_other_ids";
    case LabelKind::Location: return "location";
    case LabelKind::PersonalInfo: return "personal_info";
    case LabelKind::FitnessInfo: return "fitness_info";
    case LabelKind::HealthInfo: return "health_info";
    case LabelKind::Other: return "other";
    }
    return "other";
}

inline std::string_view display_name(LabelKind k) {
    switch (k) {
    case LabelKind::DeviceOrOtherIds: return "Device and other IDs";
    case LabelKind::Location: return "Location";
    case LabelKind::PersonalInfo: return "Personal info";
    case LabelKind::FitnessInfo: return "Fitness info";
    case LabelKind::HealthInfo: return "Health info";
    case LabelKind::Other: return "Other";
    }
    return "Other";
}

struct LabelCategory {
    LabelKind kind = LabelKind::Other;
    std::string other_name; // set only when kind == Other

    LabelCategory() = default;
    LabelCategory(LabelKind k) : kind(k) {} // NOLINT(google-explicit-constructor)
    static LabelCategory other(std::string name) {
        LabelCategory c;
        c.kind = LabelKind::Other;
        c.other_name = std::move(name);
        return c;
    }

    friend auto operator<=>(const LabelCategory&, const LabelCategory&) = default;
};

/// Maps a label-id string to a category; unrecognised names become Other.
inline LabelCategory parse_label_category(std::string_view id) {
    for (LabelKind k : kRelevantLabels) {
        if (id == to_id(k)) return LabelCategory(k);
    }
    return LabelCategory::other(std::string(id));
}

// ---------------------------------------------------------------------------
// FeatureCategory

/// The 14 primary-feature categories used for scope assessment.
enum class FeatureCategory {
    ScreenOverlay = 0,
    HealthEducation,
    StepCounter,
    WorkoutTracker,
    CardioTracker,
    DietTracker,
    Wearable,
    MentalWellbeing,
    Pharmacy,
    PhysicianFinder,
    FemaleHealth,
    Diagnostic,
    HealthMonitor,
    Telemedicine,
};

constexpr std::array<FeatureCategory, 14> kFeatureCategories{
    FeatureCategory::ScreenOverlay,  FeatureCategory::HealthEducation, FeatureCategory::StepCounter,
    FeatureCategory::WorkoutTracker, FeatureCategory::CardioTracker,   FeatureCategory::DietTracker,
    FeatureCategory::Wearable,       FeatureCategory::MentalWellbeing, FeatureCategory::Pharmacy,
    FeatureCategory::PhysicianFinder, FeatureCategory::FemaleHealth,   FeatureCategory::Diagnostic,
    FeatureCategory::HealthMonitor,  FeatureCategory::Telemedicine,
};

inline std::string_view to_id(FeatureCategory c) {
    switch (c) {
    case FeatureCategory::ScreenOverlay: return "screen_overlay";
    case FeatureCategory::HealthEducation: return "health_education";
    case FeatureCategory::StepCounter: return "step_counter";
    case FeatureCategory::WorkoutTracker: return "workout_tracker";
    case FeatureCategory::CardioTracker: return "cardio_tracker";
    case FeatureCategory::DietTracker: return "diet_tracker";
    case FeatureCategory::Wearable: return "wearable";
    case FeatureCategory::MentalWellbeing: return "mental_wellbeing";
    case FeatureCategory::Pharmacy: return "pharmacy";
    case FeatureCategory::PhysicianFinder: return "physician_finder";
    case FeatureCategory::FemaleHealth: return "female_health";
    case FeatureCategory::Diagnostic: return "diagnostic";
    case FeatureCategory::HealthMonitor: return "health_monitor";
    case FeatureCategory::Telemedicine: return "telemedicine";
    }
    return "health_monitor";
}

inline std::string_view display_name(FeatureCategory c) {
    switch (c) {
    case FeatureCategory::ScreenOverlay: return "Screen Overlay";
    case FeatureCategory::HealthEducation: return "Health Education";
    case FeatureCategory::StepCounter: return "Step Counter";
    case FeatureCategory::WorkoutTracker: return "Workout Tracker";
    case FeatureCategory::CardioTracker: return "Cardio Tracker";
    case FeatureCategory::DietTracker: return "Diet Tracker";
    case FeatureCategory::Wearable: return "Wearable";
    case FeatureCategory::MentalWellbeing: return "Mental Wellbeing";
    case FeatureCategory::Pharmacy: return "Pharmacy";
    case FeatureCategory::PhysicianFinder: return "Physician Finder";
    case FeatureCategory::FemaleHealth: return "Female Health";
    case FeatureCategory::Diagnostic: return "Diagnostic";
    case FeatureCategory::HealthMonitor: return "Health Monitor";
    case FeatureCategory::Telemedicine: return "Telemedicine";
    }
    return "Health Monitor";
}

inline FeatureCategory parse_feature_category(std::string_view id) {
    for (FeatureCategory c : kFeatureCategories) {
        if (id == to_id(c)) return c;
    }
    throw ConfigError("unknown feature category: " + std::string(id));
}

// ---------------------------------------------------------------------------
// Taxonomy

struct TaxonomyEntry {
    std::string id;
    DataCategory category = DataCategory::DeviceIds;
    LabelKind label = LabelKind::DeviceOrOtherIds;
    std::string display_name;
};

/// Consistency rule between a data category and its privacy label:
/// Standard categories map to one of the three standard labels, Nonstandard
/// to FitnessInfo and Medical to HealthInfo.
inline bool label_consistent(DataCategory category, LabelKind label) {
    switch (specificity_of(category)) {
    case Specificity::Standard:
        return label == LabelKind::DeviceOrOtherIds || label == LabelKind::Location ||
               label == LabelKind::PersonalInfo;
    case Specificity::Nonstandard: return label == LabelKind::FitnessInfo;
    case Specificity::Medical: return label == LabelKind::HealthInfo;
    }
    return false;
}

/// Immutable registry of auditable data types. Safe to share across threads
/// once constructed.
class Taxonomy {
public:
    struct LookupResult {
        DataCategory category;
        Specificity specificity;
        LabelKind label;
    };

    static Taxonomy from_entries(std::vector<TaxonomyEntry> entries) {
        Taxonomy t;
        t.entries_ = std::move(entries);
        for (size_t i = 0; i < t.entries_.size(); ++i) {
            const TaxonomyEntry& e = t.entries_[i];
            if (e.id.empty()) throw MalformedTaxonomyError("taxonomy entry with empty id");
            if (!t.index_.emplace(e.id, i).second) {
                throw MalformedTaxonomyError("duplicate data type id: " + e.id);
            }
            if (!label_consistent(e.category, e.label)) {
                throw MalformedTaxonomyError("inconsistent category/label pairing for: " + e.id);
            }
        }
        return t;
    }

    static Taxonomy from_json(const nlohmann::json& doc) {
        if (!doc.is_array()) throw MalformedTaxonomyError("taxonomy document must be a JSON array");
        std::vector<TaxonomyEntry> entries;
        entries.reserve(doc.size());
        for (const auto& item : doc) {
            if (!item.is_object()) throw MalformedTaxonomyError("taxonomy entry must be an object");
            TaxonomyEntry e;
            e.id = item.value("id", "");
            e.category = parse_data_category(item.value("category", ""));
            LabelCategory label = parse_label_category(item.value("label", ""));
            if (label.kind == LabelKind::Other) {
                throw MalformedTaxonomyError("taxonomy entry " + e.id + " uses non-audit label: " +
                                             label.other_name);
            }
            e.label = label.kind;
            e.display_name = item.value("name", e.id);
            entries.push_back(std::move(e));
        }
        return from_entries(std::move(entries));
    }

    static Taxonomy load(const std::filesystem::path& file) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(util::read_file(file));
        } catch (const nlohmann::json::exception& e) {
            throw MalformedTaxonomyError("taxonomy parse error in " + file.string() + ": " + e.what());
        }
        return from_json(doc);
    }

    LookupResult lookup(std::string_view data_type_id) const {
        auto it = index_.find(std::string(data_type_id));
        if (it == index_.end()) {
            throw UnknownDataTypeError("unknown data type: " + std::string(data_type_id));
        }
        const TaxonomyEntry& e = entries_[it->second];
        return LookupResult{e.category, specificity_of(e.category), e.label};
    }

    bool contains(std::string_view data_type_id) const {
        return index_.find(std::string(data_type_id)) != index_.end();
    }

    const std::vector<TaxonomyEntry>& entries() const { return entries_; }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json doc = nlohmann::ordered_json::array();
        for (const TaxonomyEntry& e : entries_) {
            doc.push_back({{"id", e.id},
                           {"category", std::string(to_id(e.category))},
                           {"label", std::string(to_id(e.label))},
                           {"name", e.display_name}});
        }
        return doc;
    }

    /// The built-in data-type registry: 14 standard PII types plus 21 health
    /// types. Fully overridable by supplying a taxonomy file.
    static const Taxonomy& default_taxonomy() {
        static const Taxonomy t = from_entries(default_entries());
        return t;
    }

    static std::vector<TaxonomyEntry> default_entries() {
        using DC = DataCategory;
        using LK = LabelKind;
        return {
            // Standard PII: device identifiers.
            {"advertising_id", DC::DeviceIds, LK::DeviceOrOtherIds, "Advertising ID"},
            {"android_id", DC::DeviceIds, LK::DeviceOrOtherIds, "Android ID"},
            {"imei", DC::DeviceIds, LK::DeviceOrOtherIds, "IMEI"},
            {"mac_address", DC::DeviceIds, LK::DeviceOrOtherIds, "MAC address"},
            {"gsf_id", DC::DeviceIds, LK::DeviceOrOtherIds, "GSF ID"},
            {"hardware_serial", DC::DeviceIds, LK::DeviceOrOtherIds, "Hardware serial"},
            // Standard PII: location.
            {"gps_latitude", DC::Location, LK::Location, "GPS latitude"},
            {"gps_longitude", DC::Location, LK::Location, "GPS longitude"},
            {"city", DC::Location, LK::Location, "City"},
            // Standard PII: user identity and account data.
            {"first_name", DC::UserInfo, LK::PersonalInfo, "First name"},
            {"last_name", DC::UserInfo, LK::PersonalInfo, "Last name"},
            {"email_address", DC::UserInfo, LK::PersonalInfo, "Email address"},
            {"phone_number", DC::UserInfo, LK::PersonalInfo, "Phone number"},
            {"date_of_birth", DC::UserInfo, LK::PersonalInfo, "Date of birth"},
            // Nonstandard PHI: body measurements.
            {"body_weight", DC::BodyMeasurements, LK::FitnessInfo, "Body weight"},
            {"body_height", DC::BodyMeasurements, LK::FitnessInfo, "Body height"},
            {"body_mass_index", DC::BodyMeasurements, LK::FitnessInfo, "Body mass index"},
            {"waist_circumference", DC::BodyMeasurements, LK::FitnessInfo, "Waist circumference"},
            {"body_fat_percentage", DC::BodyMeasurements, LK::FitnessInfo, "Body fat percentage"},
            // Nonstandard PHI: fitness activity.
            {"step_count", DC::FitnessInfo, LK::FitnessInfo, "Step count"},
            {"fitness_goal", DC::FitnessInfo, LK::FitnessInfo, "Fitness goal"},
            {"eating_habits", DC::FitnessInfo, LK::FitnessInfo, "Eating habits"},
            {"calorie_intake", DC::FitnessInfo, LK::FitnessInfo, "Calorie intake"},
            {"workout_type", DC::FitnessInfo, LK::FitnessInfo, "Workout type"},
            {"workout_duration", DC::FitnessInfo, LK::FitnessInfo, "Workout duration"},
            {"sleep_duration", DC::FitnessInfo, LK::FitnessInfo, "Sleep duration"},
            // Medical PHI: female health.
            {"menstrual_cycle", DC::FemaleHealthInfo, LK::HealthInfo, "Menstrual cycle length"},
            {"period_start_date", DC::FemaleHealthInfo, LK::HealthInfo, "Period start date"},
            {"ovulation_date", DC::FemaleHealthInfo, LK::HealthInfo, "Ovulation date"},
            {"pregnancy_status", DC::FemaleHealthInfo, LK::HealthInfo, "Pregnancy status"},
            // Medical PHI: clinical measurements and conditions.
            {"heart_rate", DC::MedicalInfo, LK::HealthInfo, "Heart rate"},
            {"blood_pressure", DC::MedicalInfo, LK::HealthInfo, "Blood pressure"},
            {"blood_glucose", DC::MedicalInfo, LK::HealthInfo, "Blood glucose"},
            {"medical_condition", DC::MedicalInfo, LK::HealthInfo, "Medical condition"},
            {"medication", DC::MedicalInfo, LK::HealthInfo, "Medication"},
        };
    }

private:
    std::vector<TaxonomyEntry> entries_;
    std::map<std::string, size_t> index_;
};

} // namespace mhaudit

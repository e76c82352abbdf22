#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dermrank {

inline constexpr std::string_view kSchemaVersion = "1";

// ---------------------------------------------------------------------------
// Expert judgements and their numeric encodings
// ---------------------------------------------------------------------------

enum class Judgement : std::uint8_t { Yes, Unlikely, No };

/// A judgement as stored in a disease record. `exclusive` only has meaning
/// for No: an exclusive No removes the disease when the symptom is observed,
/// a non-exclusive No merely penalizes it.
struct JudgementEntry {
    Judgement judgement = Judgement::No;
    bool exclusive = false;

    static constexpr JudgementEntry yes() { return {Judgement::Yes, false}; }
    static constexpr JudgementEntry unlikely() { return {Judgement::Unlikely, false}; }
    static constexpr JudgementEntry no() { return {Judgement::No, false}; }
    static constexpr JudgementEntry exclusive_no() { return {Judgement::No, true}; }

    friend bool operator==(const JudgementEntry&, const JudgementEntry&) = default;
};

/// The closed set of likelihood constants a judgement can encode to.
/// Storage is the level; arithmetic uses value().
class Likelihood {
public:
    enum class Level : std::uint8_t { Yes, Unlikely, No, ExclusiveNo };

    constexpr explicit Likelihood(Level level) : level_(level) {}

    [[nodiscard]] constexpr Level level() const { return level_; }
    [[nodiscard]] double value() const;

    /// Accepts exactly one of the four table constants.
    static std::optional<Likelihood> from_value(double value);

    friend bool operator==(const Likelihood&, const Likelihood&) = default;

private:
    Level level_;
};

[[nodiscard]] Likelihood judgement_to_likelihood(const JudgementEntry& entry);

enum class FrequencyLevel : std::uint8_t {
    Exceptional,
    Rare,
    Uncommon,
    LessCommon,
    Common,
    VeryCommon,
};

inline constexpr std::array<FrequencyLevel, 6> kAllFrequencyLevels = {
    FrequencyLevel::Exceptional, FrequencyLevel::Rare,   FrequencyLevel::Uncommon,
    FrequencyLevel::LessCommon,  FrequencyLevel::Common, FrequencyLevel::VeryCommon,
};

/// Order-of-magnitude prevalence used as the prior of a disease.
[[nodiscard]] double frequency_to_prior(FrequencyLevel level);

enum class Sex : std::uint8_t { Male, Female, Unspecified };

/// male:female prevalence ratio; 2:1 means twice as common among men,
/// 0:1 means the disease only occurs among women.
struct SexRatio {
    double male = 1.0;
    double female = 1.0;

    [[nodiscard]] bool valid() const;

    friend bool operator==(const SexRatio&, const SexRatio&) = default;
};

// ---------------------------------------------------------------------------
// Knowledge base
// ---------------------------------------------------------------------------

enum class Selection : std::uint8_t { Single, Multi };

enum class ExclusivenessPolicy : std::uint8_t { Always, Never, PerDisease };

struct Symptom {
    std::string id;
    std::string name;

    friend bool operator==(const Symptom&, const Symptom&) = default;
};

/// A group of symptoms scored together.
struct CategorySpec {
    std::string id;
    std::string name;
    Selection selection = Selection::Multi;
    bool simplified = false;  // yes/no only; Unlikely is not allowed
    ExclusivenessPolicy exclusiveness = ExclusivenessPolicy::Never;
    int step = 1;  // wizard step, 1..7; unused by ranking
    std::vector<Symptom> symptoms;

    friend bool operator==(const CategorySpec&, const CategorySpec&) = default;
};

inline constexpr int kFirstWizardStep = 1;
inline constexpr int kLastWizardStep = 7;

struct Disease {
    std::string id;
    std::string name;
    bool severe = false;
    FrequencyLevel frequency = FrequencyLevel::Common;
    SexRatio sex_ratio;
    std::map<std::string, JudgementEntry, std::less<>> judgements;

    [[nodiscard]] const JudgementEntry* judgement(std::string_view symptom_id) const;

    friend bool operator==(const Disease&, const Disease&) = default;
};

/// Position of a symptom inside the KB.
struct SymptomRef {
    std::size_t category = 0;  // index into categories()
    std::size_t position = 0;  // index into that category's symptoms
    std::size_t global = 0;    // index in declaration order over all categories
};

/// Categories, symptoms and disease records. Immutable once constructed; the
/// constructor builds lookup indexes and a dense judgement matrix. It accepts
/// structurally inconsistent input (duplicates, sparse records) so that
/// validate_kb() can report on it: first declaration wins for lookups.
class KnowledgeBase {
public:
    KnowledgeBase(std::string schema_version, std::vector<CategorySpec> categories,
                  std::vector<Disease> diseases);

    [[nodiscard]] const std::string& schema_version() const { return schema_version_; }
    [[nodiscard]] std::span<const CategorySpec> categories() const { return categories_; }
    [[nodiscard]] std::span<const Disease> diseases() const { return diseases_; }
    [[nodiscard]] std::size_t symptom_count() const { return symptom_count_; }

    [[nodiscard]] std::optional<std::size_t> category_index(std::string_view id) const;
    [[nodiscard]] std::optional<std::size_t> disease_index(std::string_view id) const;
    [[nodiscard]] std::optional<SymptomRef> find_symptom(std::string_view id) const;

    [[nodiscard]] const CategorySpec* find_category(std::string_view id) const;
    [[nodiscard]] const Disease* find_disease(std::string_view id) const;

    /// Global index of the first symptom of a category.
    [[nodiscard]] std::size_t category_offset(std::size_t category) const {
        return category_offsets_[category];
    }

    /// Dense lookup; nullptr where the record has no entry for the symptom.
    [[nodiscard]] const JudgementEntry* judgement(std::size_t disease, std::size_t symptom_global) const;

    friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
        return a.schema_version_ == b.schema_version_ && a.categories_ == b.categories_ &&
               a.diseases_ == b.diseases_;
    }

private:
    std::string schema_version_;
    std::vector<CategorySpec> categories_;
    std::vector<Disease> diseases_;

    std::size_t symptom_count_ = 0;
    std::vector<std::size_t> category_offsets_;
    std::map<std::string, std::size_t, std::less<>> category_by_id_;
    std::map<std::string, std::size_t, std::less<>> disease_by_id_;
    std::map<std::string, SymptomRef, std::less<>> symptom_by_id_;
    std::vector<std::optional<JudgementEntry>> matrix_;  // disease-major
};

// ---------------------------------------------------------------------------
// Patient case
// ---------------------------------------------------------------------------

/// The query: observed symptoms per category. Categories without an
/// observation are absent; an empty case is legal.
struct PatientCase {
    Sex sex = Sex::Unspecified;
    std::map<std::string, std::set<std::string>, std::less<>> observations;

    friend bool operator==(const PatientCase&, const PatientCase&) = default;
};

// ---------------------------------------------------------------------------
// Wire names
// ---------------------------------------------------------------------------

std::string_view to_string(FrequencyLevel level);
std::string_view to_string(Sex sex);
std::string_view to_string(Selection selection);
std::string_view to_string(ExclusivenessPolicy policy);
/// "yes" | "unlikely" | "no" | "no_exclusive"
std::string_view to_string(const JudgementEntry& entry);

std::optional<FrequencyLevel> frequency_from_string(std::string_view text);
std::optional<Sex> sex_from_string(std::string_view text);
std::optional<Selection> selection_from_string(std::string_view text);
std::optional<ExclusivenessPolicy> exclusiveness_from_string(std::string_view text);
std::optional<JudgementEntry> judgement_from_string(std::string_view text);

}  // namespace dermrank

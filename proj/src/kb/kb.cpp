#include "dermrank/kb.hpp"

#include <cmath>
#include <utility>

namespace dermrank {

namespace {

// Likelihood constants for the three judgements, with No split by whether
// it excludes the disease.
constexpr double kYesLikelihood = 1.0;
constexpr double kUnlikelyLikelihood = 0.02;
#ifdef DERMRANK_MUTATION_CANARY
// Deliberately wrong; built only into the canary binary that checks the
// oracle comparison catches a corrupted constant.
constexpr double kNoLikelihood = 0.01;
#else
constexpr double kNoLikelihood = 0.001;
#endif
constexpr double kExclusiveNoLikelihood = 0.0;

}  // namespace

double Likelihood::value() const {
    switch (level_) {
        case Level::Yes:
            return kYesLikelihood;
        case Level::Unlikely:
            return kUnlikelyLikelihood;
        case Level::No:
            return kNoLikelihood;
        case Level::ExclusiveNo:
            return kExclusiveNoLikelihood;
    }
    return kExclusiveNoLikelihood;
}

std::optional<Likelihood> Likelihood::from_value(double value) {
    for (auto level : {Level::Yes, Level::Unlikely, Level::No, Level::ExclusiveNo}) {
        if (Likelihood(level).value() == value) {
            return Likelihood(level);
        }
    }
    return std::nullopt;
}

Likelihood judgement_to_likelihood(const JudgementEntry& entry) {
    switch (entry.judgement) {
        case Judgement::Yes:
            return Likelihood(Likelihood::Level::Yes);
        case Judgement::Unlikely:
            return Likelihood(Likelihood::Level::Unlikely);
        case Judgement::No:
            break;
    }
    return Likelihood(entry.exclusive ? Likelihood::Level::ExclusiveNo : Likelihood::Level::No);
}

double frequency_to_prior(FrequencyLevel level) {
    switch (level) {
        case FrequencyLevel::Exceptional:
            return 1e-7;
        case FrequencyLevel::Rare:
            return 1e-6;
        case FrequencyLevel::Uncommon:
            return 1e-5;
        case FrequencyLevel::LessCommon:
            return 1e-4;
        case FrequencyLevel::Common:
            return 1e-3;
        case FrequencyLevel::VeryCommon:
            return 1e-2;
    }
    return 1e-7;
}

bool SexRatio::valid() const {
    return male >= 0.0 && female >= 0.0 && male + female > 0.0 && std::isfinite(male + female);
}

const JudgementEntry* Disease::judgement(std::string_view symptom_id) const {
    auto it = judgements.find(symptom_id);
    return it == judgements.end() ? nullptr : &it->second;
}

KnowledgeBase::KnowledgeBase(std::string schema_version, std::vector<CategorySpec> categories,
                             std::vector<Disease> diseases)
    : schema_version_(std::move(schema_version)),
      categories_(std::move(categories)),
      diseases_(std::move(diseases)) {
    category_offsets_.reserve(categories_.size());
    for (std::size_t c = 0; c < categories_.size(); ++c) {
        category_offsets_.push_back(symptom_count_);
        category_by_id_.emplace(categories_[c].id, c);
        const auto& symptoms = categories_[c].symptoms;
        for (std::size_t p = 0; p < symptoms.size(); ++p) {
            symptom_by_id_.emplace(symptoms[p].id, SymptomRef{c, p, symptom_count_ + p});
        }
        symptom_count_ += symptoms.size();
    }

    matrix_.resize(diseases_.size() * symptom_count_);
    for (std::size_t d = 0; d < diseases_.size(); ++d) {
        disease_by_id_.emplace(diseases_[d].id, d);
        std::size_t global = 0;
        for (const auto& category : categories_) {
            for (const auto& symptom : category.symptoms) {
                if (const auto* entry = diseases_[d].judgement(symptom.id)) {
                    matrix_[d * symptom_count_ + global] = *entry;
                }
                ++global;
            }
        }
    }
}

std::optional<std::size_t> KnowledgeBase::category_index(std::string_view id) const {
    auto it = category_by_id_.find(id);
    if (it == category_by_id_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> KnowledgeBase::disease_index(std::string_view id) const {
    auto it = disease_by_id_.find(id);
    if (it == disease_by_id_.end()) return std::nullopt;
    return it->second;
}

std::optional<SymptomRef> KnowledgeBase::find_symptom(std::string_view id) const {
    auto it = symptom_by_id_.find(id);
    if (it == symptom_by_id_.end()) return std::nullopt;
    return it->second;
}

const CategorySpec* KnowledgeBase::find_category(std::string_view id) const {
    auto index = category_index(id);
    return index ? &categories_[*index] : nullptr;
}

const Disease* KnowledgeBase::find_disease(std::string_view id) const {
    auto index = disease_index(id);
    return index ? &diseases_[*index] : nullptr;
}

const JudgementEntry* KnowledgeBase::judgement(std::size_t disease, std::size_t symptom_global) const {
    const auto& slot = matrix_[disease * symptom_count_ + symptom_global];
    return slot ? &*slot : nullptr;
}

// ---------------------------------------------------------------------------

std::string_view to_string(FrequencyLevel level) {
    switch (level) {
        case FrequencyLevel::Exceptional:
            return "exceptional";
        case FrequencyLevel::Rare:
            return "rare";
        case FrequencyLevel::Uncommon:
            return "uncommon";
        case FrequencyLevel::LessCommon:
            return "less_common";
        case FrequencyLevel::Common:
            return "common";
        case FrequencyLevel::VeryCommon:
            return "very_common";
    }
    return "exceptional";
}

std::string_view to_string(Sex sex) {
    switch (sex) {
        case Sex::Male:
            return "male";
        case Sex::Female:
            return "female";
        case Sex::Unspecified:
            return "unspecified";
    }
    return "unspecified";
}

std::string_view to_string(Selection selection) {
    return selection == Selection::Single ? "single" : "multi";
}

std::string_view to_string(ExclusivenessPolicy policy) {
    switch (policy) {
        case ExclusivenessPolicy::Always:
            return "always";
        case ExclusivenessPolicy::Never:
            return "never";
        case ExclusivenessPolicy::PerDisease:
            return "per_disease";
    }
    return "never";
}

std::string_view to_string(const JudgementEntry& entry) {
    switch (entry.judgement) {
        case Judgement::Yes:
            return "yes";
        case Judgement::Unlikely:
            return "unlikely";
        case Judgement::No:
            break;
    }
    return entry.exclusive ? "no_exclusive" : "no";
}

std::optional<FrequencyLevel> frequency_from_string(std::string_view text) {
    for (auto level : kAllFrequencyLevels) {
        if (to_string(level) == text) return level;
    }
    return std::nullopt;
}

std::optional<Sex> sex_from_string(std::string_view text) {
    for (auto sex : {Sex::Male, Sex::Female, Sex::Unspecified}) {
        if (to_string(sex) == text) return sex;
    }
    return std::nullopt;
}

std::optional<Selection> selection_from_string(std::string_view text) {
    if (text == "single") return Selection::Single;
    if (text == "multi") return Selection::Multi;
    return std::nullopt;
}

std::optional<ExclusivenessPolicy> exclusiveness_from_string(std::string_view text) {
    for (auto policy :
         {ExclusivenessPolicy::Always, ExclusivenessPolicy::Never, ExclusivenessPolicy::PerDisease}) {
        if (to_string(policy) == text) return policy;
    }
    return std::nullopt;
}

std::optional<JudgementEntry> judgement_from_string(std::string_view text) {
    for (auto entry : {JudgementEntry::yes(), JudgementEntry::unlikely(), JudgementEntry::no(),
                       JudgementEntry::exclusive_no()}) {
        if (to_string(entry) == text) return entry;
    }
    return std::nullopt;
}

}  // namespace dermrank

#include "dermrank/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dermrank {

double RankingConfig::weight(std::string_view category_id) const {
    auto it = category_weights.find(category_id);
    return it == category_weights.end() ? 1.0 : it->second;
}

std::vector<Diagnostic> RankingConfig::validate(const KnowledgeBase& kb) const {
    std::vector<Diagnostic> out;
    for (const auto& [category, weight] : category_weights) {
        if (!kb.find_category(category)) {
            out.push_back(Diagnostic::error(codes::kInvalidConfig, Location::category(category),
                                            "weight given for unknown category"));
        }
        if (!std::isfinite(weight) || weight <= 0.0) {
            out.push_back(Diagnostic::error(codes::kInvalidConfig, Location::category(category),
                                            "category weight must be finite and > 0"));
        }
    }
    if (std::isnan(similarity_threshold) || similarity_threshold == std::numeric_limits<double>::infinity()) {
        out.push_back(Diagnostic::error(codes::kInvalidConfig, Location::document("similarity_threshold"),
                                        "similarity threshold must be a number below +inf"));
    }
    if (std::isnan(rank_threshold) || rank_threshold == std::numeric_limits<double>::infinity()) {
        out.push_back(Diagnostic::error(codes::kInvalidConfig, Location::document("rank_threshold"),
                                        "rank threshold must be a number below +inf"));
    }
    if (max_results < 1) {
        out.push_back(Diagnostic::error(codes::kInvalidConfig, Location::document("max_results"),
                                        "max_results must be at least 1"));
    }
    return out;
}

namespace {

/// An observed category resolved against the KB.
struct Observation {
    std::size_t category = 0;
    std::vector<std::size_t> positions;  // ascending
    double weight = 1.0;
};

/// Observations in KB category order.
std::vector<Observation> resolve(const KnowledgeBase& kb, const PatientCase& patient_case,
                                 const RankingConfig* config) {
    std::vector<Observation> observations;
    observations.reserve(patient_case.observations.size());
    for (const auto& [category_id, symptoms] : patient_case.observations) {
        const auto category = kb.category_index(category_id);
        if (!category) throw ContractViolation("case references unknown category \"" + category_id + "\"");
        if (symptoms.empty()) continue;
        Observation observation{*category, {}, config ? config->weight(category_id) : 1.0};
        for (const auto& symptom_id : symptoms) {
            const auto ref = kb.find_symptom(symptom_id);
            if (!ref || ref->category != *category) {
                throw ContractViolation("symptom \"" + symptom_id + "\" is not part of category \"" + category_id +
                                        "\"");
            }
            observation.positions.push_back(ref->position);
        }
        std::sort(observation.positions.begin(), observation.positions.end());
        observations.push_back(std::move(observation));
    }
    std::sort(observations.begin(), observations.end(),
              [](const Observation& a, const Observation& b) { return a.category < b.category; });
    return observations;
}

double likelihood_at(const KnowledgeBase& kb, std::size_t disease, std::size_t global) {
    const auto* entry = kb.judgement(disease, global);
    if (!entry) throw ContractViolation("sparse judgement matrix reached the engine");
    return judgement_to_likelihood(*entry).value();
}

std::optional<ExclusionReport> first_exclusion(const KnowledgeBase& kb, std::size_t disease,
                                               std::span<const Observation> observations, Sex sex) {
    for (const auto& observation : observations) {
        const auto& category = kb.categories()[observation.category];
        const auto offset = kb.category_offset(observation.category);
        for (auto position : observation.positions) {
            const auto* entry = kb.judgement(disease, offset + position);
            if (entry && entry->judgement == Judgement::No && entry->exclusive) {
                return ExclusionReport{kb.diseases()[disease].id, category.symptoms[position].id, category.id,
                                       ExclusionReport::Cause::Symptom};
            }
        }
    }
    if (sex != Sex::Unspecified && sex_factor(sex, kb.diseases()[disease].sex_ratio) == 0.0) {
        return ExclusionReport{kb.diseases()[disease].id, std::string(to_string(sex)),
                               std::string(kSexExclusionCategory), ExclusionReport::Cause::Sex};
    }
    return std::nullopt;
}

double weighted_log_similarity(const KnowledgeBase& kb, std::size_t disease,
                               std::span<const Observation> observations, std::vector<double>& buffer) {
    double total = 0.0;
    for (const auto& observation : observations) {
        const auto& category = kb.categories()[observation.category];
        const auto offset = kb.category_offset(observation.category);
        buffer.resize(category.symptoms.size());
        for (std::size_t p = 0; p < buffer.size(); ++p) buffer[p] = likelihood_at(kb, disease, offset + p);
        total += observation.weight * log_category_score(buffer, observation.positions);
    }
    return total;
}

struct NormalizedCategory {
    double mean_log_observed = 0.0;  // mean of ln(L(t)/reference)
    double relative_sum = 0.0;       // sum of L(s)/reference
};

// Both parts are taken relative to the category's largest likelihood, so a
// category whose likelihoods are all equal yields exactly 0 and n.
NormalizedCategory normalize(std::span<const double> likelihoods, std::span<const std::size_t> observed) {
    if (observed.empty()) throw ContractViolation("category score needs at least one observed symptom");
    for (auto position : observed) {
        if (position >= likelihoods.size()) throw ContractViolation("observed position outside the category");
        if (!(likelihoods[position] > 0.0)) {
            throw ContractViolation("observed symptom has likelihood 0; exclusion must run before scoring");
        }
    }
    const double reference = *std::max_element(likelihoods.begin(), likelihoods.end());
    if (!std::isfinite(reference)) throw ContractViolation("likelihoods must be finite");

    NormalizedCategory out;
    for (auto position : observed) out.mean_log_observed += std::log(likelihoods[position] / reference);
    out.mean_log_observed /= static_cast<double>(observed.size());
    for (double likelihood : likelihoods) {
        if (likelihood < 0.0) throw ContractViolation("likelihoods must be nonnegative");
        out.relative_sum += likelihood / reference;
    }
    return out;
}

}  // namespace

double log_category_score(std::span<const double> likelihoods, std::span<const std::size_t> observed) {
    const auto parts = normalize(likelihoods, observed);
    return parts.mean_log_observed - std::log(parts.relative_sum);
}

double category_score(std::span<const double> likelihoods, std::span<const std::size_t> observed) {
    const auto parts = normalize(likelihoods, observed);
    return std::exp(parts.mean_log_observed) / parts.relative_sum;
}

double category_score(const CategorySpec& category, const std::set<std::string>& observed, const Disease& disease) {
    std::vector<double> likelihoods;
    std::vector<std::size_t> positions;
    likelihoods.reserve(category.symptoms.size());
    for (std::size_t p = 0; p < category.symptoms.size(); ++p) {
        const auto& symptom = category.symptoms[p];
        const auto* entry = disease.judgement(symptom.id);
        if (!entry) throw ContractViolation("disease \"" + disease.id + "\" has no judgement for \"" + symptom.id + "\"");
        likelihoods.push_back(judgement_to_likelihood(*entry).value());
        if (observed.contains(symptom.id)) positions.push_back(p);
    }
    if (positions.size() != observed.size()) {
        throw ContractViolation("observed symptoms must belong to category \"" + category.id + "\"");
    }
    return category_score(likelihoods, positions);
}

double sex_factor(Sex sex, const SexRatio& ratio) {
    switch (sex) {
        case Sex::Male:
            return ratio.male / (ratio.male + ratio.female);
        case Sex::Female:
            return ratio.female / (ratio.male + ratio.female);
        case Sex::Unspecified:
            break;
    }
    return 1.0;
}

ExclusionResult exclude_diseases(const KnowledgeBase& kb, const PatientCase& patient_case) {
    const auto observations = resolve(kb, patient_case, nullptr);
    ExclusionResult result;
    for (std::size_t d = 0; d < kb.diseases().size(); ++d) {
        if (auto report = first_exclusion(kb, d, observations, patient_case.sex)) {
            result.reports.push_back(std::move(*report));
        } else {
            result.survivors.push_back(kb.diseases()[d].id);
        }
    }
    return result;
}

double log_similarity(const KnowledgeBase& kb, const PatientCase& patient_case, const Disease& disease,
                      const RankingConfig& config) {
    const auto index = kb.disease_index(disease.id);
    if (!index) throw ContractViolation("disease \"" + disease.id + "\" is not part of the knowledge base");
    const auto observations = resolve(kb, patient_case, &config);
    std::vector<double> buffer;
    return weighted_log_similarity(kb, *index, observations, buffer);
}

std::vector<RankedDisease> rank_all(const KnowledgeBase& kb, const PatientCase& patient_case,
                                    const RankingConfig& config) {
    const auto observations = resolve(kb, patient_case, &config);

    std::vector<RankedDisease> survivors;
    std::vector<RankedDisease> excluded;
    std::vector<double> buffer;
    for (std::size_t d = 0; d < kb.diseases().size(); ++d) {
        const auto& disease = kb.diseases()[d];
        RankedDisease row;
        row.disease = disease.id;
        row.name = disease.name;
        row.severe = disease.severe;
        if (auto report = first_exclusion(kb, d, observations, patient_case.sex)) {
            row.excluded = true;
            row.exclusion = std::move(report);
            excluded.push_back(std::move(row));
            continue;
        }
        const double similarity = weighted_log_similarity(kb, d, observations, buffer);
        row.log_similarity = similarity;
        row.log_rank = similarity + std::log(frequency_to_prior(disease.frequency)) +
                       std::log(sex_factor(patient_case.sex, disease.sex_ratio));
        survivors.push_back(std::move(row));
    }

    std::sort(survivors.begin(), survivors.end(), [](const RankedDisease& a, const RankedDisease& b) {
        if (*a.log_rank != *b.log_rank) return *a.log_rank > *b.log_rank;
        if (*a.log_similarity != *b.log_similarity) return *a.log_similarity > *b.log_similarity;
        return a.disease < b.disease;
    });
    std::sort(excluded.begin(), excluded.end(),
              [](const RankedDisease& a, const RankedDisease& b) { return a.disease < b.disease; });

    survivors.insert(survivors.end(), std::make_move_iterator(excluded.begin()),
                     std::make_move_iterator(excluded.end()));
    return survivors;
}

std::vector<RankedDisease> select_diagnoses(std::span<const RankedDisease> ranked, const RankingConfig& config) {
    std::vector<RankedDisease> selected;
    for (const auto& row : ranked) {
        if (selected.size() >= config.max_results) break;
        if (row.excluded || !row.log_similarity || !row.log_rank) continue;
        if (*row.log_similarity < config.similarity_threshold || *row.log_rank < config.rank_threshold) continue;
        auto copy = row;
        copy.selected = true;
        selected.push_back(std::move(copy));
    }
    return selected;
}

}  // namespace dermrank

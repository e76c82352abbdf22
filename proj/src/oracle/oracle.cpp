#include "dermrank/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace dermrank::oracle {

namespace {

// Written out again on purpose: the oracle must not read the engine's tables.
double table_likelihood(const JudgementEntry& entry) {
    if (entry.judgement == Judgement::Yes) return 1.0;
    if (entry.judgement == Judgement::Unlikely) return 0.02;
    return entry.exclusive ? 0.0 : 0.001;
}

double table_prior(FrequencyLevel level) {
    switch (level) {
        case FrequencyLevel::Exceptional: return 0.0000001;
        case FrequencyLevel::Rare: return 0.000001;
        case FrequencyLevel::Uncommon: return 0.00001;
        case FrequencyLevel::LessCommon: return 0.0001;
        case FrequencyLevel::Common: return 0.001;
        case FrequencyLevel::VeryCommon: return 0.01;
    }
    return 0.0;
}

double sex_share(Sex sex, const SexRatio& ratio) {
    if (sex == Sex::Male) return ratio.male / (ratio.male + ratio.female);
    if (sex == Sex::Female) return ratio.female / (ratio.male + ratio.female);
    return 1.0;
}

double likelihood_of(const Disease& disease, const std::string& symptom) {
    auto it = disease.judgements.find(symptom);
    if (it == disease.judgements.end()) {
        throw std::invalid_argument("disease " + disease.id + " has no judgement for " + symptom);
    }
    return table_likelihood(it->second);
}

void guard(double value, const std::string& what) {
    if (value < kUnderflowFloor) {
        throw OracleUnderflow(what + " fell below 1e-300; reduce the number of observed categories");
    }
}

}  // namespace

std::vector<OracleEntry> oracle_rank_all(const KnowledgeBase& kb, const PatientCase& patient_case,
                                         const RankingConfig& config) {
    std::vector<OracleEntry> entries;
    for (const auto& disease : kb.diseases()) {
        bool excluded = false;
        for (const auto& [category, symptoms] : patient_case.observations) {
            for (const auto& symptom : symptoms) {
                if (likelihood_of(disease, symptom) == 0.0) excluded = true;
            }
        }
        if (patient_case.sex != Sex::Unspecified && sex_share(patient_case.sex, disease.sex_ratio) == 0.0) {
            excluded = true;
        }
        if (excluded) continue;

        double similarity = 1.0;
        for (const auto& [category_id, symptoms] : patient_case.observations) {
            const CategorySpec* category = kb.find_category(category_id);
            if (!category) throw std::invalid_argument("unknown category " + category_id);

            double product = 1.0;
            for (const auto& symptom : symptoms) {
                product *= likelihood_of(disease, symptom);
                guard(product, "product of observed likelihoods");
            }
            const double root = std::pow(product, 1.0 / static_cast<double>(symptoms.size()));

            double sum = 0.0;
            for (const auto& symptom : category->symptoms) sum += likelihood_of(disease, symptom.id);

            const double score = root / sum;
            similarity *= std::pow(score, config.weight(category_id));
            guard(similarity, "similarity");
        }

        const double value = similarity * table_prior(disease.frequency) * sex_share(patient_case.sex, disease.sex_ratio);
        guard(value, "rank value");
        entries.push_back({disease.id, similarity, value});
    }

    std::sort(entries.begin(), entries.end(), [](const OracleEntry& a, const OracleEntry& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.disease < b.disease;
    });
    return entries;
}

OrderingReport compare_orderings(std::span<const RankedDisease> engine_output, std::span<const OracleEntry> oracle_output) {
    std::vector<const RankedDisease*> survivors;
    for (const auto& row : engine_output) {
        if (!row.excluded) survivors.push_back(&row);
    }

    std::set<std::string> engine_ids;
    std::set<std::string> oracle_ids;
    for (const auto* row : survivors) engine_ids.insert(row->disease);
    for (const auto& entry : oracle_output) oracle_ids.insert(entry.disease);
    if (survivors.size() != oracle_output.size() || engine_ids != oracle_ids) {
        throw LengthMismatch("engine has " + std::to_string(survivors.size()) + " survivors, oracle has " +
                             std::to_string(oracle_output.size()) + " (or the sets differ)");
    }

    // Tie groups along the oracle order: neighbours closer than the tolerance
    // in log space share a group.
    std::vector<std::size_t> group(oracle_output.size(), 0);
    std::map<std::string, std::size_t> group_of;
    std::map<std::string, double> value_of;
    for (std::size_t i = 0; i < oracle_output.size(); ++i) {
        if (i > 0) {
            const double gap = std::abs(std::log(oracle_output[i].value) - std::log(oracle_output[i - 1].value));
            group[i] = gap < kTieTolerance ? group[i - 1] : group[i - 1] + 1;
        }
        group_of[oracle_output[i].disease] = group[i];
        value_of[oracle_output[i].disease] = oracle_output[i].value;
    }

    OrderingReport report;
    for (std::size_t i = 0; i < survivors.size(); ++i) {
        const auto& row = *survivors[i];
        if (report.agree && group_of[row.disease] != group[i]) {
            report.agree = false;
            report.first_divergence = Divergence{i, row.disease, oracle_output[i].disease};
        }
        const double expected = value_of[row.disease];
        const double actual = row.log_rank ? std::exp(*row.log_rank) : 0.0;
        report.max_relative_value_error =
            std::max(report.max_relative_value_error, std::abs(actual - expected) / expected);
    }
    return report;
}

}  // namespace dermrank::oracle

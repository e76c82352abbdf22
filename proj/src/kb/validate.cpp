#include "dermrank/validate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace dermrank {

namespace {

std::string quoted(std::string_view text) {
    return "\"" + std::string(text) + "\"";
}

void check_entry(const CategorySpec& category, const Symptom& symptom, const Disease& disease,
                 const JudgementEntry& entry, std::vector<Diagnostic>& out) {
    const auto where = Location::disease(disease.id);
    const auto subject = "symptom " + quoted(symptom.id) + " of category " + quoted(category.id);

    if (entry.exclusive && entry.judgement != Judgement::No) {
        out.push_back(Diagnostic::error(codes::kExclusiveWithoutNo, where,
                                        subject + ": only a \"no\" judgement can be exclusive"));
    }
    if (category.simplified && entry.judgement == Judgement::Unlikely) {
        out.push_back(Diagnostic::error(codes::kUnlikelyInSimplified, where,
                                        subject + ": \"unlikely\" is not allowed in a simplified category"));
    }
    if (entry.judgement == Judgement::No) {
        if (category.exclusiveness == ExclusivenessPolicy::Always && !entry.exclusive) {
            out.push_back(Diagnostic::error(codes::kExclusivePolicyViolation, where,
                                            subject + ": category is always exclusive, expected \"no_exclusive\""));
        } else if (category.exclusiveness == ExclusivenessPolicy::Never && entry.exclusive) {
            out.push_back(Diagnostic::error(codes::kExclusivePolicyViolation, where,
                                            subject + ": category is never exclusive, expected \"no\""));
        }
    }
}

}  // namespace

std::vector<Diagnostic> validate_categories(std::span<const CategorySpec> categories) {
    std::vector<Diagnostic> out;
    if (categories.empty()) {
        out.push_back(Diagnostic::error(codes::kEmptyKnowledgeBase, Location::document("/categories"),
                                        "at least one category is required"));
    }

    std::set<std::string, std::less<>> category_ids;
    std::set<std::string, std::less<>> symptom_ids;
    for (const auto& category : categories) {
        const auto where = Location::category(category.id);
        if (category.id.empty()) {
            out.push_back(Diagnostic::error(codes::kIllegalValue, where, "category id is empty"));
        } else if (!category_ids.insert(category.id).second) {
            out.push_back(Diagnostic::error(codes::kDuplicateId, where,
                                            "duplicate category id " + quoted(category.id)));
        }
        if (category.step < kFirstWizardStep || category.step > kLastWizardStep) {
            out.push_back(Diagnostic::error(codes::kInvalidStep, where,
                                            "step " + std::to_string(category.step) + " is outside 1..7"));
        }
        if (category.symptoms.empty()) {
            out.push_back(Diagnostic::error(codes::kEmptyCategory, where, "category has no symptoms"));
        }
        for (const auto& symptom : category.symptoms) {
            if (symptom.id.empty()) {
                out.push_back(Diagnostic::error(codes::kIllegalValue, where, "symptom id is empty"));
            } else if (!symptom_ids.insert(symptom.id).second) {
                out.push_back(Diagnostic::error(codes::kDuplicateId, Location::symptom(symptom.id),
                                                "duplicate symptom id " + quoted(symptom.id)));
            }
        }
    }
    return out;
}

std::vector<Diagnostic> validate_kb(const KnowledgeBase& kb) {
    std::vector<Diagnostic> out;
    if (kb.schema_version() != kSchemaVersion) {
        out.push_back(Diagnostic::error(codes::kSchemaVersion, Location::document("/schema_version"),
                                        "unsupported schema_version " + quoted(kb.schema_version())));
    }
    auto category_findings = validate_categories(kb.categories());
    out.insert(out.end(), category_findings.begin(), category_findings.end());

    if (kb.diseases().empty()) {
        out.push_back(Diagnostic::error(codes::kEmptyKnowledgeBase, Location::document("/diseases"),
                                        "at least one disease is required"));
    }

    std::set<std::string, std::less<>> disease_ids;
    for (const auto& disease : kb.diseases()) {
        const auto where = Location::disease(disease.id);
        if (disease.id.empty()) {
            out.push_back(Diagnostic::error(codes::kIllegalValue, where, "disease id is empty"));
        } else if (!disease_ids.insert(disease.id).second) {
            out.push_back(Diagnostic::error(codes::kDuplicateId, where, "duplicate disease id " + quoted(disease.id)));
        }

        const auto& ratio = disease.sex_ratio;
        if (!(ratio.male >= 0.0) || !(ratio.female >= 0.0) || !std::isfinite(ratio.male) ||
            !std::isfinite(ratio.female)) {
            out.push_back(Diagnostic::error(codes::kInvalidSexRatio, where,
                                            "sex ratio components must be finite and nonnegative"));
        } else if (ratio.male + ratio.female <= 0.0) {
            out.push_back(Diagnostic::error(codes::kZeroSexRatio, where, "sex ratio 0:0 excludes everyone"));
        }

        for (const auto& [symptom_id, entry] : disease.judgements) {
            if (!kb.find_symptom(symptom_id)) {
                out.push_back(Diagnostic::error(codes::kUnknownSymptom, where,
                                                "judgement for unknown symptom " + quoted(symptom_id)));
            }
        }

        std::vector<std::string> missing;
        bool all_no = true;
        for (const auto& category : kb.categories()) {
            bool all_exclusive_no = !category.symptoms.empty();
            for (const auto& symptom : category.symptoms) {
                const auto* entry = disease.judgement(symptom.id);
                if (!entry) {
                    missing.push_back(symptom.id);
                    all_exclusive_no = false;
                    continue;
                }
                check_entry(category, symptom, disease, *entry, out);
                all_no = all_no && entry->judgement == Judgement::No;
                all_exclusive_no = all_exclusive_no && entry->judgement == Judgement::No && entry->exclusive;
            }
            if (all_exclusive_no) {
                out.push_back(Diagnostic::warning(
                    codes::kAlwaysExcludedByCategory, where,
                    "every symptom of category " + quoted(category.id) +
                        " is exclusive \"no\"; any selection there excludes the disease"));
            }
        }
        if (!missing.empty()) {
            std::string message = "sparse judgement matrix: " + std::to_string(missing.size()) +
                                  " symptom(s) without a judgement, e.g. " + quoted(missing.front());
            out.push_back(Diagnostic::error(codes::kSparseJudgementMatrix, where, std::move(message)));
        } else if (all_no && kb.symptom_count() > 0) {
            out.push_back(Diagnostic::warning(codes::kAllJudgementsNo, where,
                                              "every judgement is \"no\"; the disease can never match"));
        }
    }
    return out;
}

std::vector<Diagnostic> validate_case(const PatientCase& patient_case, const KnowledgeBase& kb) {
    std::vector<Diagnostic> out;
    for (const auto& [category_id, symptoms] : patient_case.observations) {
        const auto category_index = kb.category_index(category_id);
        if (!category_index) {
            out.push_back(Diagnostic::error(codes::kUnknownCategory, Location::category(category_id),
                                            "unknown category " + quoted(category_id)));
            continue;
        }
        const auto& category = kb.categories()[*category_index];
        if (symptoms.empty()) {
            out.push_back(Diagnostic::error(codes::kIllegalValue, Location::category(category_id),
                                            "observation set is empty; omit the category instead"));
        }
        for (const auto& symptom_id : symptoms) {
            const auto ref = kb.find_symptom(symptom_id);
            if (!ref) {
                out.push_back(Diagnostic::error(codes::kUnknownSymptom, Location::symptom(symptom_id),
                                                "unknown symptom " + quoted(symptom_id)));
            } else if (ref->category != *category_index) {
                out.push_back(Diagnostic::error(
                    codes::kSymptomCategoryMismatch, Location::symptom(symptom_id),
                    "symptom " + quoted(symptom_id) + " belongs to category " +
                        quoted(kb.categories()[ref->category].id) + ", not " + quoted(category_id)));
            }
        }
        if (category.selection == Selection::Single && symptoms.size() > 1) {
            out.push_back(Diagnostic::error(codes::kMutualExclusion, Location::category(category_id),
                                            "category " + quoted(category_id) +
                                                " allows one selection, got " + std::to_string(symptoms.size())));
        }
    }
    return out;
}

}  // namespace dermrank

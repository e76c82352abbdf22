#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dermrank/diagnostic.hpp"
#include "dermrank/kb.hpp"

namespace dermrank {

/// Probability mass of the four judgement outcomes before category rules
/// are applied. Simplified categories move the Unlikely mass to No; policy
/// Always turns every No exclusive, policy Never turns every No non-exclusive.
struct JudgementMix {
    double yes = 0.20;
    double unlikely = 0.15;
    double no = 0.55;
    double exclusive_no = 0.10;
};

struct SynthOptions {
    JudgementMix mix;
    double severe_fraction = 0.10;
    /// Force at least one Yes per category in every disease record.
    bool yes_in_every_category = true;
};

/// The 21-category, 130-symptom layout used when no template is given.
/// Seven wizard steps: demographics, number and arrangement, morphology,
/// location, color, timing, additional signs.
std::vector<CategorySpec> default_category_template();

/// Deterministic for a fixed (n_diseases, template, seed, options). Disease
/// ids are "d1".."dN". Fails with the template's diagnostics if it is invalid.
Parsed<KnowledgeBase> generate_synthetic_kb(std::size_t n_diseases,
                                            std::span<const CategorySpec> category_template,
                                            std::uint64_t seed, const SynthOptions& options = {});

struct CaseOptions {
    /// How many categories to fill (fewer when the target has Yes in fewer).
    std::size_t max_observed_categories = 12;
    /// Upper bound on selections drawn in a multi-choice category.
    std::size_t max_multi_selections = 3;
};

/// A virtual patient for `target_disease`: observations drawn from the
/// target's Yes symptoms, each then replaced with probability `noise` by a
/// uniformly random symptom of the same category. The sex is drawn among the
/// values the target's sex ratio allows.
///
/// Errors: UNKNOWN_DISEASE, ILLEGAL_VALUE (noise outside [0,1]), NO_SIGNAL
/// (the target has no Yes symptom anywhere).
Parsed<PatientCase> generate_synthetic_case(const KnowledgeBase& kb, std::string_view target_disease,
                                            double noise, std::uint64_t seed,
                                            const CaseOptions& options = {});

}  // namespace dermrank

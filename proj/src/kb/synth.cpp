#include "dermrank/synth.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <initializer_list>
#include <random>
#include <string>

#include "dermrank/validate.hpp"

namespace dermrank {

namespace {

// std::mt19937_64 output is fixed by the standard; the distributions in
// <random> are not, so draws are mapped by hand to keep files identical
// across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::size_t index(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t draw = engine_();
        while (draw >= limit) draw = engine_();
        return static_cast<std::size_t>(draw % bound);
    }

    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

std::string humanize(std::string_view id) {
    std::string out;
    for (char c : id) {
        if (c == '_') {
            out.push_back(' ');
        } else if (std::isupper(static_cast<unsigned char>(c)) && !out.empty()) {
            out.push_back(' ');
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            out.push_back(c);
        }
    }
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

CategorySpec make_category(std::string id, int step, Selection selection, bool simplified,
                           ExclusivenessPolicy policy, std::initializer_list<std::string_view> symptoms) {
    CategorySpec category;
    category.name = humanize(id);
    category.id = std::move(id);
    category.step = step;
    category.selection = selection;
    category.simplified = simplified;
    category.exclusiveness = policy;
    for (auto symptom : symptoms) category.symptoms.push_back({std::string(symptom), humanize(symptom)});
    return category;
}

JudgementEntry draw_entry(Rng& rng, const JudgementMix& mix, double total, const CategorySpec& category) {
    const double u = rng.uniform01() * total;
    JudgementEntry entry;
    if (u < mix.yes) {
        entry = JudgementEntry::yes();
    } else if (u < mix.yes + mix.unlikely) {
        entry = category.simplified ? JudgementEntry::no() : JudgementEntry::unlikely();
    } else if (u < mix.yes + mix.unlikely + mix.no) {
        entry = JudgementEntry::no();
    } else {
        entry = JudgementEntry::exclusive_no();
    }
    if (entry.judgement == Judgement::No) {
        if (category.exclusiveness == ExclusivenessPolicy::Always) entry.exclusive = true;
        if (category.exclusiveness == ExclusivenessPolicy::Never) entry.exclusive = false;
    }
    return entry;
}

SexRatio draw_sex_ratio(Rng& rng) {
    const double u = rng.uniform01();
    if (u < 0.80) return {1.0, 1.0};
    if (u < 0.88) return {2.0, 1.0};
    if (u < 0.96) return {1.0, 2.0};
    if (u < 0.98) return {1.0, 0.0};
    return {0.0, 1.0};
}

bool valid_mix(const JudgementMix& mix) {
    const std::array<double, 4> parts = {mix.yes, mix.unlikely, mix.no, mix.exclusive_no};
    double total = 0.0;
    for (double p : parts) {
        if (!std::isfinite(p) || p < 0.0) return false;
        total += p;
    }
    return total > 0.0;
}

}  // namespace

std::vector<CategorySpec> default_category_template() {
    using enum Selection;
    using enum ExclusivenessPolicy;
    return {
        // 1: basic information (8)
        make_category("age_group", 1, Single, true, Never, {"infant", "child", "adolescent", "adult", "elder"}),
        make_category("skin_type", 1, Single, true, Never, {"light", "intermediate", "dark"}),
        // 2: number and arrangement (22)
        make_category("number", 2, Single, false, Always, {"single", "multiple"}),
        make_category("distribution", 2, Single, false, Never, {"localized", "widespread"}),
        make_category("arrangement", 2, Multi, false, Never,
                      {"linear", "annular", "grouped", "zosteriform", "reticular", "symmetric", "asymmetric",
                       "follicular", "dermatomal", "serpiginous"}),
        make_category("configuration", 2, Multi, false, Never,
                      {"discrete", "confluent", "satellite", "herpetiform", "koebnerized", "acral",
                       "intertriginous", "flexural"}),
        // 3: morphology (37)
        make_category("primary_lesion", 3, Multi, false, Never,
                      {"macule", "patch", "papule", "plaque", "nodule", "vesicle", "bulla", "pustule", "wheal",
                       "cyst", "tumor"}),
        make_category("secondary_lesion", 3, Multi, false, Never,
                      {"scale", "crust", "erosion", "ulcer", "fissure", "atrophy", "scar", "lichenification",
                       "excoriation"}),
        make_category("form", 3, Multi, false, Never, {"domeShaped", "flatTopped", "umbilicated"}),
        make_category("shape", 3, Multi, false, Never, {"round", "oval", "arciform", "polygonal", "irregular"}),
        make_category("surface", 3, Multi, false, Never, {"smooth", "rough", "verrucous", "keratotic"}),
        make_category("consistency", 3, Single, false, Never, {"soft", "firm", "indurated"}),
        make_category("border", 3, Single, false, Never, {"well_defined", "ill_defined"}),
        // 4: location (17)
        make_category("location", 4, Multi, true, PerDisease,
                      {"scalp", "face", "ear", "neck", "chest", "abdomen", "back", "arm", "forearm", "hand", "palm",
                       "genital", "buttock", "thigh", "lower_leg", "foot", "mucosa"}),
        // 5: color (16)
        make_category("color_count", 5, Single, false, Never, {"single_color", "multiple_colors"}),
        make_category("color", 5, Multi, false, Never,
                      {"white", "yellow", "orange", "red", "pink", "purple", "violet", "blue", "gray", "light_brown",
                       "dark_brown", "black", "skin_colored", "translucent"}),
        // 6: timing (11)
        make_category("onset", 6, Single, false, Never, {"acute", "subacute", "chronic"}),
        make_category("course", 6, Multi, false, Never, {"recurrent", "progressive", "stable", "regressing", "seasonal"}),
        make_category("duration", 6, Single, false, Never, {"days", "weeks", "months"}),
        // 7: additional signs (19)
        make_category("general_appearance", 7, Single, false, Never, {"well_appearing", "ill_appearing"}),
        make_category("additional_signs", 7, Multi, false, Never,
                      {"pruritus", "pain", "burning", "tenderness", "bleeding", "oozing", "fever", "malaise",
                       "lymphadenopathy", "arthralgia", "photosensitivity", "dermographism", "nikolsky_sign",
                       "darier_sign", "auspitz_sign", "nail_involvement", "hair_loss"}),
    };
}

Parsed<KnowledgeBase> generate_synthetic_kb(std::size_t n_diseases, std::span<const CategorySpec> category_template,
                                            std::uint64_t seed, const SynthOptions& options) {
    Parsed<KnowledgeBase> result;
    result.diagnostics = validate_categories(category_template);
    if (n_diseases == 0) {
        result.diagnostics.push_back(Diagnostic::error(codes::kIllegalValue, Location::document("n_diseases"),
                                                       "at least one disease is required"));
    }
    if (!valid_mix(options.mix)) {
        result.diagnostics.push_back(Diagnostic::error(codes::kIllegalValue, Location::document("mix"),
                                                       "judgement mix must be nonnegative with positive total"));
    }
    if (!(options.severe_fraction >= 0.0 && options.severe_fraction <= 1.0)) {
        result.diagnostics.push_back(Diagnostic::error(codes::kIllegalValue, Location::document("severe_fraction"),
                                                       "severe fraction must lie in [0, 1]"));
    }
    if (has_errors(result.diagnostics)) return result;

    const auto& mix = options.mix;
    const double total = mix.yes + mix.unlikely + mix.no + mix.exclusive_no;
    Rng rng(seed);

    std::vector<Disease> diseases;
    diseases.reserve(n_diseases);
    for (std::size_t i = 1; i <= n_diseases; ++i) {
        Disease disease;
        disease.id = "d" + std::to_string(i);
        disease.name = "Synthetic disease " + std::to_string(i);
        disease.severe = rng.uniform01() < options.severe_fraction;
        disease.frequency = kAllFrequencyLevels[rng.index(kAllFrequencyLevels.size())];
        disease.sex_ratio = draw_sex_ratio(rng);

        for (const auto& category : category_template) {
            bool any_yes = false;
            for (const auto& symptom : category.symptoms) {
                auto entry = draw_entry(rng, mix, total, category);
                any_yes = any_yes || entry.judgement == Judgement::Yes;
                disease.judgements[symptom.id] = entry;
            }
            if (options.yes_in_every_category && !any_yes) {
                const auto& symptom = category.symptoms[rng.index(category.symptoms.size())];
                disease.judgements[symptom.id] = JudgementEntry::yes();
            }
        }
        diseases.push_back(std::move(disease));
    }

    KnowledgeBase kb(std::string(kSchemaVersion),
                     std::vector<CategorySpec>(category_template.begin(), category_template.end()),
                     std::move(diseases));
    auto findings = validate_kb(kb);
    const bool failed = has_errors(findings);
    result.diagnostics.insert(result.diagnostics.end(), findings.begin(), findings.end());
    if (!failed) result.value = std::move(kb);
    return result;
}

Parsed<PatientCase> generate_synthetic_case(const KnowledgeBase& kb, std::string_view target_disease, double noise,
                                            std::uint64_t seed, const CaseOptions& options) {
    Parsed<PatientCase> result;
    const auto target_index = kb.disease_index(target_disease);
    if (!target_index) {
        result.diagnostics.push_back(Diagnostic::error(codes::kUnknownDisease,
                                                       Location::disease(std::string(target_disease)),
                                                       "unknown target disease"));
        return result;
    }
    if (!(noise >= 0.0 && noise <= 1.0)) {
        result.diagnostics.push_back(Diagnostic::error(codes::kIllegalValue, Location::document("noise"),
                                                       "noise must lie in [0, 1]"));
        return result;
    }
    const auto& target = kb.diseases()[*target_index];

    // Positions of the target's Yes symptoms, per category.
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> eligible;
    for (std::size_t c = 0; c < kb.categories().size(); ++c) {
        std::vector<std::size_t> yes;
        const auto& symptoms = kb.categories()[c].symptoms;
        for (std::size_t p = 0; p < symptoms.size(); ++p) {
            const auto* entry = kb.judgement(*target_index, kb.category_offset(c) + p);
            if (entry && entry->judgement == Judgement::Yes) yes.push_back(p);
        }
        if (!yes.empty()) eligible.emplace_back(c, std::move(yes));
    }
    if (eligible.empty()) {
        result.diagnostics.push_back(Diagnostic::error(codes::kNoSignal, Location::disease(target.id),
                                                       "target disease has no \"yes\" symptom"));
        return result;
    }

    Rng rng(seed);
    rng.shuffle(eligible);
    eligible.resize(std::min(eligible.size(), options.max_observed_categories));

    PatientCase patient_case;
    for (auto& [c, yes] : eligible) {
        const auto& category = kb.categories()[c];
        std::size_t count = 1;
        if (category.selection == Selection::Multi) {
            const auto cap = std::max<std::size_t>(1, std::min(options.max_multi_selections, yes.size()));
            count = 1 + rng.index(cap);
        }
        rng.shuffle(yes);
        std::set<std::string> observed;
        for (std::size_t k = 0; k < count; ++k) {
            std::size_t position = yes[k];
            if (rng.uniform01() < noise) position = rng.index(category.symptoms.size());
            observed.insert(category.symptoms[position].id);
        }
        patient_case.observations.emplace(category.id, std::move(observed));
    }

    std::vector<Sex> sexes = {Sex::Unspecified};
    if (target.sex_ratio.male > 0.0) sexes.push_back(Sex::Male);
    if (target.sex_ratio.female > 0.0) sexes.push_back(Sex::Female);
    patient_case.sex = sexes[rng.index(sexes.size())];

    result.value = std::move(patient_case);
    return result;
}

}  // namespace dermrank

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dermrank/diagnostic.hpp"
#include "dermrank/kb.hpp"

namespace dermrank {

/// Raised when an operation is called outside its contract, e.g. scoring a
/// category where an observed symptom has likelihood 0 (exclusion must run
/// first). Indicates a programming error, not bad input.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct RankingConfig {
    /// Exponent per category id; categories not listed use 1.
    std::map<std::string, double, std::less<>> category_weights;
    /// Both thresholds are natural logs.
    double similarity_threshold = std::log(1e-12);
    double rank_threshold = std::log(1e-18);
    std::size_t max_results = 20;

    [[nodiscard]] double weight(std::string_view category_id) const;

    /// Weights must be finite and > 0 and name KB categories; thresholds must
    /// not be NaN; max_results >= 1. Reported as INVALID_CONFIG errors.
    [[nodiscard]] std::vector<Diagnostic> validate(const KnowledgeBase& kb) const;
};

// ---------------------------------------------------------------------------
// Phase 1: exclusion
// ---------------------------------------------------------------------------

struct ExclusionReport {
    enum class Cause { Symptom, Sex };

    std::string disease;
    std::string triggering_symptom;  // "male"/"female" for Cause::Sex
    std::string category;            // kSexExclusionCategory for Cause::Sex
    Cause cause = Cause::Symptom;

    friend bool operator==(const ExclusionReport&, const ExclusionReport&) = default;
};

inline constexpr std::string_view kSexExclusionCategory = "sex";

struct ExclusionResult {
    std::vector<std::string> survivors;  // KB order
    std::vector<ExclusionReport> reports;  // KB order, one per excluded disease
};

/// A disease is excluded iff an observed symptom carries exclusive No for it,
/// or the patient's sex has a zero share in its sex ratio. The report names
/// the first trigger in KB declaration order; the sex is checked last.
ExclusionResult exclude_diseases(const KnowledgeBase& kb, const PatientCase& patient_case);

// ---------------------------------------------------------------------------
// Phase 2: scoring
// ---------------------------------------------------------------------------

/// Score of one category on raw likelihoods: the geometric mean of the
/// observed likelihoods over the sum of all likelihoods in the category.
/// `observed` holds positions into `likelihoods`; it must be nonempty and
/// every observed likelihood must be > 0.
[[nodiscard]] double category_score(std::span<const double> likelihoods,
                                    std::span<const std::size_t> observed);

/// Natural log of category_score(), computed without leaving log space.
[[nodiscard]] double log_category_score(std::span<const double> likelihoods,
                                        std::span<const std::size_t> observed);

/// Category score for a disease record; result lies in (0, 1].
[[nodiscard]] double category_score(const CategorySpec& category,
                                    const std::set<std::string>& observed, const Disease& disease);

/// Share of the patient's sex in the ratio; 1 when the sex is unspecified.
[[nodiscard]] double sex_factor(Sex sex, const SexRatio& ratio);

/// Sum over observed categories of weight * ln(category score). 0 for an
/// empty case. The disease must have survived exclusion.
[[nodiscard]] double log_similarity(const KnowledgeBase& kb, const PatientCase& patient_case,
                                    const Disease& disease, const RankingConfig& config = {});

struct RankedDisease {
    std::string disease;
    std::string name;
    bool severe = false;
    bool excluded = false;
    std::optional<ExclusionReport> exclusion;
    std::optional<double> log_similarity;  // unset when excluded
    std::optional<double> log_rank;        // unset when excluded
    bool selected = false;

    friend bool operator==(const RankedDisease&, const RankedDisease&) = default;
};

/// Runs exclusion and scoring over every disease. Survivors come first,
/// ordered by log_rank, then log_similarity (both descending), then id;
/// excluded diseases follow in id order.
std::vector<RankedDisease> rank_all(const KnowledgeBase& kb, const PatientCase& patient_case,
                                    const RankingConfig& config = {});

// ---------------------------------------------------------------------------
// Phase 3: selection
// ---------------------------------------------------------------------------

/// Survivors meeting both thresholds, at most max_results of them, in rank
/// order, with `selected` set. Scores stay on the records for machine use;
/// human-facing views must not display them.
std::vector<RankedDisease> select_diagnoses(std::span<const RankedDisease> ranked,
                                            const RankingConfig& config = {});

}  // namespace dermrank

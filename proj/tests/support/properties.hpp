#pragma once

#include <cstdint>
#include <string>

namespace dermrank::testing {

struct PropertyOutcome {
    std::string name;
    std::size_t instances = 0;
    std::size_t failures = 0;
    std::string first_failure;

    [[nodiscard]] bool passed() const { return instances > 0 && failures == 0; }
};

inline constexpr std::size_t kPropertyInstances = 1000;

/// No excluded disease is ever selected, and a disease is excluded exactly
/// when an observed symptom is an exclusive No for it or the patient's sex
/// has a zero share.
PropertyOutcome check_exclusion_soundness(std::uint64_t seed, std::size_t instances = kPropertyInstances);

/// Scaling one category's likelihoods by c > 0 moves its score by at most 1e-12.
PropertyOutcome check_scale_invariance(std::uint64_t seed, std::size_t instances = kPropertyInstances);

/// A category whose n likelihoods are equal scores exactly 1/n.
PropertyOutcome check_equal_likelihood(std::uint64_t seed, std::size_t instances = kPropertyInstances);

/// An empty case has log similarity exactly 0 for every survivor.
PropertyOutcome check_empty_case(std::uint64_t seed, std::size_t instances = kPropertyInstances);

/// Any case document with two or more selections in a SINGLE category is
/// rejected by parse_case with MUTUAL_EXCLUSION.
PropertyOutcome check_single_violations(std::uint64_t seed, std::size_t instances = kPropertyInstances);

}  // namespace dermrank::testing

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dermrank/kb.hpp"

namespace dermrank::testing {

std::filesystem::path fixture_path(const std::string& name);
std::string read_text(const std::filesystem::path& path);
KnowledgeBase load_fixture_kb(const std::string& name = "kb_small.json");

/// Test-side randomness. Unlike the product generator this one is free to
/// use the standard distributions; nothing derived from it is frozen.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : engine_(seed) {}

    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
    std::size_t between(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
    }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    bool chance(double p) { return uniform(0.0, 1.0) < p; }
    std::uint64_t seed() { return engine_(); }

    template <class T>
    const T& pick(const std::vector<T>& items) {
        return items[index(items.size())];
    }

private:
    std::mt19937_64 engine_;
};

/// 1..max_categories categories of 1..max_symptoms symptoms with random
/// selection mode, simplification, policy and step. Ids are "c<i>" and
/// "c<i>s<j>".
std::vector<CategorySpec> random_template(Gen& gen, std::size_t max_categories = 6, std::size_t max_symptoms = 6);

/// A synthetic KB over a random template.
KnowledgeBase random_kb(Gen& gen, std::size_t max_diseases = 12);

/// A case that is legal for the KB: random categories, random symptoms,
/// SINGLE categories get exactly one selection.
PatientCase random_case(Gen& gen, const KnowledgeBase& kb);

/// How often a synthetic case's target disease is found by similarity on a
/// 100-disease KB: at rank 1 for noise-0 cases, in the top 5 for noise-0.2
/// cases. One case per seed 1..100, targeting disease d<seed>.
struct RetrievalCounts {
    std::size_t rank1_at_noise0 = 0;
    std::size_t top5_at_noise02 = 0;
};
RetrievalCounts retrieval_proxy(std::uint64_t kb_seed);

/// Runs `argv` as a child process; returns its exit status and stdout.
struct ProcessResult {
    int exit_code = -1;
    std::string out;
};
ProcessResult run_process(const std::vector<std::string>& argv);

/// A TCP port that was free a moment ago.
int free_port();

}  // namespace dermrank::testing

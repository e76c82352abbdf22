#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dermrank/engine.hpp"
#include "dermrank/kb.hpp"

namespace dermrank::oracle {

/// Reference ranking in plain linear arithmetic. It shares no scoring code
/// with the engine (including the likelihood and prior tables), so a wrong
/// constant on either side shows up as a disagreement.
struct OracleEntry {
    std::string disease;
    double similarity = 0.0;  // product of weighted category scores
    double value = 0.0;       // similarity * prior * sex share
};

/// Thrown when an intermediate product falls below kUnderflowFloor; the
/// instance is too large for linear arithmetic.
class OracleUnderflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kUnderflowFloor = 1e-300;

/// Survivors only, ordered by value, then similarity (both descending), then id.
std::vector<OracleEntry> oracle_rank_all(const KnowledgeBase& kb, const PatientCase& patient_case,
                                         const RankingConfig& config = {});

struct Divergence {
    std::size_t position = 0;
    std::string engine_disease;
    std::string oracle_disease;
};

struct OrderingReport {
    bool agree = true;
    std::optional<Divergence> first_divergence;
    double max_relative_value_error = 0.0;
};

/// Raised when the engine's survivors and the oracle's entries are not the
/// same set of diseases.
class LengthMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two entries whose natural-log values differ by less than this are tied.
inline constexpr double kTieTolerance = 1e-12;

/// Compares survivor orderings position by position, accepting any
/// permutation inside a tie group, and measures the largest relative error
/// between exp(log_rank) and the oracle value.
OrderingReport compare_orderings(std::span<const RankedDisease> engine_output,
                                 std::span<const OracleEntry> oracle_output);

}  // namespace dermrank::oracle

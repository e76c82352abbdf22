#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dermrank {

enum class Severity { Error, Warning };

/// Where a finding applies: a KB entity, or a position in a source document
/// (a JSON pointer for schema findings, "line:col" for syntax errors).
struct Location {
    enum class Kind { Document, Category, Symptom, Disease };

    Kind kind = Kind::Document;
    std::string ref;

    static Location document(std::string ref) { return {Kind::Document, std::move(ref)}; }
    static Location category(std::string id) { return {Kind::Category, std::move(id)}; }
    static Location symptom(std::string id) { return {Kind::Symptom, std::move(id)}; }
    static Location disease(std::string id) { return {Kind::Disease, std::move(id)}; }

    friend bool operator==(const Location&, const Location&) = default;
};

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code;
    Location location;
    std::string message;

    static Diagnostic error(std::string_view code, Location where, std::string message) {
        return {Severity::Error, std::string(code), std::move(where), std::move(message)};
    }
    static Diagnostic warning(std::string_view code, Location where, std::string message) {
        return {Severity::Warning, std::string(code), std::move(where), std::move(message)};
    }

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Stable machine-readable diagnostic codes. Scripts match on these.
namespace codes {
// documents
inline constexpr std::string_view kSyntaxError = "SYNTAX_ERROR";
inline constexpr std::string_view kSchemaVersion = "SCHEMA_VERSION";
inline constexpr std::string_view kMissingField = "MISSING_FIELD";
inline constexpr std::string_view kWrongType = "WRONG_TYPE";
inline constexpr std::string_view kIllegalValue = "ILLEGAL_VALUE";
inline constexpr std::string_view kIllegalJudgement = "ILLEGAL_JUDGEMENT";
inline constexpr std::string_view kSparseJudgementMatrix = "SPARSE_JUDGEMENT_MATRIX";
inline constexpr std::string_view kUnknownSymptom = "UNKNOWN_SYMPTOM";
inline constexpr std::string_view kUnknownCategory = "UNKNOWN_CATEGORY";
inline constexpr std::string_view kEmptyKnowledgeBase = "EMPTY_KNOWLEDGE_BASE";
inline constexpr std::string_view kEmptyCategory = "EMPTY_CATEGORY";
inline constexpr std::string_view kInvalidStep = "INVALID_STEP";
inline constexpr std::string_view kInvalidSexRatio = "INVALID_SEX_RATIO";
// knowledge base semantics
inline constexpr std::string_view kUnlikelyInSimplified = "UNLIKELY_IN_SIMPLIFIED";
inline constexpr std::string_view kExclusivePolicyViolation = "EXCLUSIVE_POLICY_VIOLATION";
inline constexpr std::string_view kExclusiveWithoutNo = "EXCLUSIVE_WITHOUT_NO";
inline constexpr std::string_view kZeroSexRatio = "ZERO_SEX_RATIO";
inline constexpr std::string_view kDuplicateId = "DUPLICATE_ID";
inline constexpr std::string_view kAlwaysExcludedByCategory = "ALWAYS_EXCLUDED_BY_CATEGORY";
inline constexpr std::string_view kAllJudgementsNo = "ALL_JUDGEMENTS_NO";
// cases
inline constexpr std::string_view kMutualExclusion = "MUTUAL_EXCLUSION";
inline constexpr std::string_view kSymptomCategoryMismatch = "SYMPTOM_CATEGORY_MISMATCH";
// generation
inline constexpr std::string_view kNoSignal = "NO_SIGNAL";
inline constexpr std::string_view kUnknownDisease = "UNKNOWN_DISEASE";
// ranking configuration
inline constexpr std::string_view kInvalidConfig = "INVALID_CONFIG";
}  // namespace codes

[[nodiscard]] bool has_errors(std::span<const Diagnostic> diagnostics);

std::string_view to_string(Severity severity);
std::string_view to_string(Location::Kind kind);

/// One compact JSON object: {"severity","code","location":{"kind","ref"},"message"}.
std::string to_json_line(const Diagnostic& diagnostic);

/// A value that was parsed or built from untrusted input, or the reasons it
/// could not be. Warnings may accompany a value; errors never do.
template <class T>
struct Parsed {
    std::optional<T> value;
    std::vector<Diagnostic> diagnostics;

    [[nodiscard]] bool ok() const { return value.has_value(); }
    explicit operator bool() const { return ok(); }
};

}  // namespace dermrank

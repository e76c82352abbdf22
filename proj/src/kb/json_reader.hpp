#pragma once

// Internal helpers for walking untrusted JSON while collecting diagnostics.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dermrank/diagnostic.hpp"
#include "dermrank/kb.hpp"

namespace dermrank::detail {

using json = nlohmann::json;

inline constexpr std::string_view kUnknownField = "UNKNOWN_FIELD";

std::string pointer_append(const std::string& base, std::string_view key);
std::string pointer_append(const std::string& base, std::size_t index);

/// Parses text; on failure appends a SYNTAX_ERROR located at "line:col".
std::optional<json> parse_json(std::string_view text, std::vector<Diagnostic>& out);

class Reader {
public:
    explicit Reader(std::vector<Diagnostic>& out) : out_(out) {}

    void error(std::string_view code, const std::string& pointer, std::string message);
    void warning(std::string_view code, const std::string& pointer, std::string message);

    /// Field lookup; reports MISSING_FIELD when required and absent.
    const json* field(const json& object, std::string_view key, const std::string& path,
                      bool required = true);

    std::optional<std::string> string_field(const json& object, std::string_view key,
                                            const std::string& path, bool required = true);
    std::optional<bool> bool_field(const json& object, std::string_view key, const std::string& path,
                                   bool required = true);
    std::optional<double> number_field(const json& object, std::string_view key,
                                       const std::string& path, bool required = true);
    std::optional<int> int_field(const json& object, std::string_view key, const std::string& path,
                                 bool required = true);

    /// Warns about keys outside `known`.
    void unknown_fields(const json& object, std::initializer_list<std::string_view> known,
                        const std::string& path);

    bool expect_object(const json& value, const std::string& path);
    bool expect_array(const json& value, const std::string& path);

    [[nodiscard]] std::size_t error_count() const;

private:
    std::vector<Diagnostic>& out_;
};

/// Structural parse of one category object. Returns nullopt after reporting
/// when the object is unusable.
std::optional<CategorySpec> read_category(Reader& reader, const json& value, const std::string& path);

/// Builds a case from an already parsed JSON object and validates it.
Parsed<PatientCase> read_case(const json& document, const KnowledgeBase& kb);

}  // namespace dermrank::detail

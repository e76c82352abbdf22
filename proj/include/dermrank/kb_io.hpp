#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dermrank/diagnostic.hpp"
#include "dermrank/kb.hpp"

namespace dermrank {

/// Parses and fully validates a KB document. Never returns a KB that
/// validate_kb() would reject; warnings are passed through alongside it.
Parsed<KnowledgeBase> parse_kb(std::string_view document);

/// Reads a file and parses it. An unreadable file yields an IO_ERROR
/// diagnostic with an empty value.
Parsed<KnowledgeBase> load_kb(const std::filesystem::path& path);

/// Canonical pretty-printed form: categories in declaration order, each
/// disease's judgements in KB symptom order.
std::string serialize_kb(const KnowledgeBase& kb);

/// Parses a case document against a validated KB.
Parsed<PatientCase> parse_case(std::string_view document, const KnowledgeBase& kb);

std::string serialize_case(const PatientCase& patient_case);

/// A category template is the `categories` array of a KB document wrapped
/// as {"categories": [...]}. Used for synthetic generation.
Parsed<std::vector<CategorySpec>> parse_category_template(std::string_view document);

std::string serialize_category_template(std::span<const CategorySpec> categories);

inline constexpr std::string_view kIoErrorCode = "IO_ERROR";

}  // namespace dermrank

#pragma once

#include <span>
#include <vector>

#include "dermrank/diagnostic.hpp"
#include "dermrank/kb.hpp"

namespace dermrank {

/// Semantic checks over a structurally parsed KB. Returns every finding;
/// an empty list means the KB is clean.
///
/// Errors: duplicate ids, empty KB or category, steps outside 1..7, sparse or
/// unknown judgement entries, Unlikely in a simplified category, exclusive
/// flags that contradict the category policy or sit on a non-No judgement,
/// invalid or 0:0 sex ratios.
///
/// Warnings: a disease with exclusive No on every symptom of a single-choice
/// category (any selection there excludes it), and a disease answering No
/// to every symptom.
std::vector<Diagnostic> validate_kb(const KnowledgeBase& kb);

/// The category-level subset of validate_kb(), for templates.
std::vector<Diagnostic> validate_categories(std::span<const CategorySpec> categories);

/// Checks a case against a KB: known categories and symptoms, membership,
/// nonempty selections, and at most one selection in single-choice categories.
std::vector<Diagnostic> validate_case(const PatientCase& patient_case, const KnowledgeBase& kb);

}  // namespace dermrank

#pragma once

#include <span>
#include <string>

#include "json.hpp"

#include "dermrank/diagnostic.hpp"
#include "dermrank/engine.hpp"
#include "dermrank/kb.hpp"

namespace dermrank {

using ordered_json = nlohmann::ordered_json;

/// Machine form of a ranking row:
/// {disease_id, name, severe, excluded, selected, [log_similarity, log_rank],
///  [exclusion: {symptom_id, category_id}]}.
/// Score fields are written only when `with_scores` is set.
ordered_json ranked_to_json(const RankedDisease& row, bool with_scores);

ordered_json diagnostic_to_json(const Diagnostic& diagnostic);

ordered_json diagnostics_to_json(std::span<const Diagnostic> diagnostics);

}  // namespace dermrank

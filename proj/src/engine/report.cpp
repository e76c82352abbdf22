#include "dermrank/report.hpp"

namespace dermrank {

ordered_json ranked_to_json(const RankedDisease& row, bool with_scores) {
    ordered_json j;
    j["disease_id"] = row.disease;
    j["name"] = row.name;
    j["severe"] = row.severe;
    j["excluded"] = row.excluded;
    j["selected"] = row.selected;
    if (with_scores && row.log_similarity && row.log_rank) {
        j["log_similarity"] = *row.log_similarity;
        j["log_rank"] = *row.log_rank;
    }
    if (row.exclusion) {
        j["exclusion"] = {{"symptom_id", row.exclusion->triggering_symptom},
                          {"category_id", row.exclusion->category}};
    }
    return j;
}

}  // namespace dermrank

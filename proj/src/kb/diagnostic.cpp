#include "dermrank/diagnostic.hpp"

#include <algorithm>

#include "dermrank/report.hpp"

namespace dermrank {

bool has_errors(std::span<const Diagnostic> diagnostics) {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::string_view to_string(Severity severity) {
    return severity == Severity::Error ? "error" : "warning";
}

std::string_view to_string(Location::Kind kind) {
    switch (kind) {
        case Location::Kind::Document:
            return "document";
        case Location::Kind::Category:
            return "category";
        case Location::Kind::Symptom:
            return "symptom";
        case Location::Kind::Disease:
            return "disease";
    }
    return "document";
}

ordered_json diagnostic_to_json(const Diagnostic& diagnostic) {
    ordered_json j;
    j["severity"] = to_string(diagnostic.severity);
    j["code"] = diagnostic.code;
    j["location"] = {{"kind", to_string(diagnostic.location.kind)}, {"ref", diagnostic.location.ref}};
    j["message"] = diagnostic.message;
    return j;
}

ordered_json diagnostics_to_json(std::span<const Diagnostic> diagnostics) {
    auto array = ordered_json::array();
    for (const auto& d : diagnostics) array.push_back(diagnostic_to_json(d));
    return array;
}

std::string to_json_line(const Diagnostic& diagnostic) {
    return diagnostic_to_json(diagnostic).dump();
}

}  // namespace dermrank

#include "dermrank/kb_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dermrank/validate.hpp"
#include "kb/json_reader.hpp"

namespace dermrank {

namespace detail {

std::string pointer_append(const std::string& base, std::string_view key) {
    std::string out = base;
    out.push_back('/');
    for (char c : key) {
        if (c == '~') {
            out += "~0";
        } else if (c == '/') {
            out += "~1";
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string pointer_append(const std::string& base, std::size_t index) {
    return base + "/" + std::to_string(index);
}

std::optional<json> parse_json(std::string_view text, std::vector<Diagnostic>& out) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // e.byte is 1-based and points just past the offending character.
        std::size_t offset = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
        std::size_t line = 1 + static_cast<std::size_t>(
                                   std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
        auto line_start = text.rfind('\n', offset == 0 ? 0 : offset - 1);
        std::size_t column = line_start == std::string_view::npos ? offset + 1 : offset - line_start;
        out.push_back(Diagnostic::error(
            codes::kSyntaxError,
            Location::document(std::to_string(line) + ":" + std::to_string(column)), e.what()));
        return std::nullopt;
    }
}

void Reader::error(std::string_view code, const std::string& pointer, std::string message) {
    out_.push_back(Diagnostic::error(code, Location::document(pointer.empty() ? "/" : pointer),
                                     std::move(message)));
}

void Reader::warning(std::string_view code, const std::string& pointer, std::string message) {
    out_.push_back(Diagnostic::warning(code, Location::document(pointer.empty() ? "/" : pointer),
                                       std::move(message)));
}

const json* Reader::field(const json& object, std::string_view key, const std::string& path,
                          bool required) {
    auto it = object.find(key);
    if (it == object.end()) {
        if (required) {
            error(codes::kMissingField, path, "missing field \"" + std::string(key) + "\"");
        }
        return nullptr;
    }
    return &*it;
}

std::optional<std::string> Reader::string_field(const json& object, std::string_view key,
                                                const std::string& path, bool required) {
    const json* value = field(object, key, path, required);
    if (!value) return std::nullopt;
    if (!value->is_string()) {
        error(codes::kWrongType, pointer_append(path, key), "expected a string");
        return std::nullopt;
    }
    return value->get<std::string>();
}

std::optional<bool> Reader::bool_field(const json& object, std::string_view key, const std::string& path,
                                       bool required) {
    const json* value = field(object, key, path, required);
    if (!value) return std::nullopt;
    if (!value->is_boolean()) {
        error(codes::kWrongType, pointer_append(path, key), "expected a boolean");
        return std::nullopt;
    }
    return value->get<bool>();
}

std::optional<double> Reader::number_field(const json& object, std::string_view key,
                                           const std::string& path, bool required) {
    const json* value = field(object, key, path, required);
    if (!value) return std::nullopt;
    if (!value->is_number()) {
        error(codes::kWrongType, pointer_append(path, key), "expected a number");
        return std::nullopt;
    }
    return value->get<double>();
}

std::optional<int> Reader::int_field(const json& object, std::string_view key, const std::string& path,
                                     bool required) {
    const json* value = field(object, key, path, required);
    if (!value) return std::nullopt;
    if (!value->is_number_integer()) {
        error(codes::kWrongType, pointer_append(path, key), "expected an integer");
        return std::nullopt;
    }
    auto wide = value->get<std::int64_t>();
    if (wide < std::numeric_limits<int>::min() || wide > std::numeric_limits<int>::max()) {
        error(codes::kIllegalValue, pointer_append(path, key), "integer out of range");
        return std::nullopt;
    }
    return static_cast<int>(wide);
}

void Reader::unknown_fields(const json& object, std::initializer_list<std::string_view> known,
                            const std::string& path) {
    for (const auto& [key, value] : object.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            warning(kUnknownField, pointer_append(path, key), "unknown field \"" + key + "\" ignored");
        }
    }
}

bool Reader::expect_object(const json& value, const std::string& path) {
    if (value.is_object()) return true;
    error(codes::kWrongType, path, "expected an object");
    return false;
}

bool Reader::expect_array(const json& value, const std::string& path) {
    if (value.is_array()) return true;
    error(codes::kWrongType, path, "expected an array");
    return false;
}

std::size_t Reader::error_count() const {
    return static_cast<std::size_t>(std::count_if(out_.begin(), out_.end(), [](const Diagnostic& d) {
        return d.severity == Severity::Error;
    }));
}

std::optional<CategorySpec> read_category(Reader& reader, const json& value, const std::string& path) {
    if (!reader.expect_object(value, path)) return std::nullopt;
    const auto errors_before = reader.error_count();
    reader.unknown_fields(value, {"id", "name", "selection", "simplified", "exclusiveness_policy", "step", "symptoms"},
                          path);

    CategorySpec category;
    if (auto id = reader.string_field(value, "id", path)) category.id = *id;
    if (auto name = reader.string_field(value, "name", path)) category.name = *name;
    if (auto text = reader.string_field(value, "selection", path)) {
        if (auto selection = selection_from_string(*text)) {
            category.selection = *selection;
        } else {
            reader.error(codes::kIllegalValue, pointer_append(path, "selection"),
                         "selection must be \"single\" or \"multi\"");
        }
    }
    if (auto simplified = reader.bool_field(value, "simplified", path)) category.simplified = *simplified;
    if (auto text = reader.string_field(value, "exclusiveness_policy", path)) {
        if (auto policy = exclusiveness_from_string(*text)) {
            category.exclusiveness = *policy;
        } else {
            reader.error(codes::kIllegalValue, pointer_append(path, "exclusiveness_policy"),
                         "exclusiveness_policy must be \"always\", \"never\" or \"per_disease\"");
        }
    }
    if (auto step = reader.int_field(value, "step", path)) category.step = *step;

    if (const json* symptoms = reader.field(value, "symptoms", path)) {
        const auto symptoms_path = pointer_append(path, "symptoms");
        if (reader.expect_array(*symptoms, symptoms_path)) {
            for (std::size_t i = 0; i < symptoms->size(); ++i) {
                const auto& item = (*symptoms)[i];
                const auto item_path = pointer_append(symptoms_path, i);
                if (!reader.expect_object(item, item_path)) continue;
                reader.unknown_fields(item, {"id", "name"}, item_path);
                auto id = reader.string_field(item, "id", item_path);
                auto name = reader.string_field(item, "name", item_path);
                if (id && name) category.symptoms.push_back({*id, *name});
            }
        }
    }

    if (reader.error_count() != errors_before) return std::nullopt;
    return category;
}


std::optional<Disease> read_disease(Reader& reader, const json& value, const std::string& path) {
    if (!reader.expect_object(value, path)) return std::nullopt;
    const auto errors_before = reader.error_count();
    reader.unknown_fields(value, {"id", "name", "severe", "frequency", "sex_ratio", "judgements"}, path);

    Disease disease;
    if (auto id = reader.string_field(value, "id", path)) disease.id = *id;
    if (auto name = reader.string_field(value, "name", path)) disease.name = *name;
    if (auto severe = reader.bool_field(value, "severe", path)) disease.severe = *severe;
    if (auto text = reader.string_field(value, "frequency", path)) {
        if (auto level = frequency_from_string(*text)) {
            disease.frequency = *level;
        } else {
            reader.error(codes::kIllegalValue, pointer_append(path, "frequency"),
                         "unknown frequency level \"" + *text + "\"");
        }
    }
    if (const json* ratio = reader.field(value, "sex_ratio", path, false)) {
        const auto ratio_path = pointer_append(path, "sex_ratio");
        if (reader.expect_object(*ratio, ratio_path)) {
            reader.unknown_fields(*ratio, {"male", "female"}, ratio_path);
            auto male = reader.number_field(*ratio, "male", ratio_path);
            auto female = reader.number_field(*ratio, "female", ratio_path);
            if (male && female) disease.sex_ratio = {*male, *female};
        }
    }
    if (const json* judgements = reader.field(value, "judgements", path)) {
        const auto judgements_path = pointer_append(path, "judgements");
        if (reader.expect_object(*judgements, judgements_path)) {
            for (const auto& [symptom, judgement] : judgements->items()) {
                std::optional<JudgementEntry> entry;
                if (judgement.is_string()) entry = judgement_from_string(judgement.get<std::string>());
                if (!entry) {
                    reader.error(codes::kIllegalJudgement, pointer_append(judgements_path, symptom),
                                 "illegal judgement " + judgement.dump() +
                                     "; expected \"yes\", \"unlikely\", \"no\" or \"no_exclusive\"");
                    continue;
                }
                disease.judgements.emplace(symptom, *entry);
            }
        }
    }

    if (reader.error_count() != errors_before) return std::nullopt;
    return disease;
}


Parsed<PatientCase> read_case(const json& document, const KnowledgeBase& kb) {
    Parsed<PatientCase> result;
    Reader reader(result.diagnostics);
    if (!reader.expect_object(document, "")) return result;
    reader.unknown_fields(document, {"sex", "observations"}, "");

    PatientCase patient_case;
    if (auto text = reader.string_field(document, "sex", "", false)) {
        if (auto sex = sex_from_string(*text)) {
            patient_case.sex = *sex;
        } else {
            reader.error(codes::kIllegalValue, "/sex", "sex must be \"male\", \"female\" or \"unspecified\"");
        }
    }
    if (const json* observations = reader.field(document, "observations", "", false)) {
        if (reader.expect_object(*observations, "/observations")) {
            for (const auto& [category, symptoms] : observations->items()) {
                const auto path = pointer_append("/observations", category);
                if (!reader.expect_array(symptoms, path)) continue;
                std::set<std::string> selected;
                for (std::size_t i = 0; i < symptoms.size(); ++i) {
                    if (!symptoms[i].is_string()) {
                        reader.error(codes::kWrongType, pointer_append(path, i), "expected a symptom id");
                        continue;
                    }
                    selected.insert(symptoms[i].get<std::string>());
                }
                // An empty selection is the same as leaving the category out.
                if (!selected.empty()) patient_case.observations.emplace(category, std::move(selected));
            }
        }
    }
    // Whatever was readable is still validated so that one pass reports everything.
    const bool malformed = reader.error_count() > 0;
    auto findings = validate_case(patient_case, kb);
    const bool failed = malformed || has_errors(findings);
    result.diagnostics.insert(result.diagnostics.end(), findings.begin(), findings.end());
    if (!failed) result.value = std::move(patient_case);
    return result;
}

}  // namespace detail

using detail::json;
using detail::pointer_append;
using detail::Reader;

Parsed<KnowledgeBase> parse_kb(std::string_view document) {
    Parsed<KnowledgeBase> result;
    auto root = detail::parse_json(document, result.diagnostics);
    if (!root) return result;

    Reader reader(result.diagnostics);
    if (!reader.expect_object(*root, "")) return result;
    reader.unknown_fields(*root, {"schema_version", "categories", "diseases"}, "");

    std::string version;
    if (auto text = reader.string_field(*root, "schema_version", "")) {
        version = *text;
        if (version != kSchemaVersion) {
            reader.error(codes::kSchemaVersion, "/schema_version",
                         "unsupported schema_version \"" + version + "\"; expected \"" +
                             std::string(kSchemaVersion) + "\"");
        }
    }

    std::vector<CategorySpec> categories;
    if (const json* array = reader.field(*root, "categories", "")) {
        if (reader.expect_array(*array, "/categories")) {
            for (std::size_t i = 0; i < array->size(); ++i) {
                if (auto category = detail::read_category(reader, (*array)[i], pointer_append("/categories", i))) {
                    categories.push_back(std::move(*category));
                }
            }
        }
    }

    std::vector<Disease> diseases;
    if (const json* array = reader.field(*root, "diseases", "")) {
        if (reader.expect_array(*array, "/diseases")) {
            for (std::size_t i = 0; i < array->size(); ++i) {
                if (auto disease = detail::read_disease(reader, (*array)[i], pointer_append("/diseases", i))) {
                    diseases.push_back(std::move(*disease));
                }
            }
        }
    }

    if (reader.error_count() > 0) return result;

    KnowledgeBase kb(std::move(version), std::move(categories), std::move(diseases));
    auto findings = validate_kb(kb);
    const bool failed = has_errors(findings);
    result.diagnostics.insert(result.diagnostics.end(), findings.begin(), findings.end());
    if (!failed) result.value = std::move(kb);
    return result;
}

Parsed<KnowledgeBase> load_kb(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        Parsed<KnowledgeBase> result;
        result.diagnostics.push_back(Diagnostic::error(kIoErrorCode, Location::document(path.string()),
                                                       "cannot read knowledge base file"));
        return result;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_kb(buffer.str());
}

namespace {

nlohmann::ordered_json category_to_json(const CategorySpec& category) {
    nlohmann::ordered_json j;
    j["id"] = category.id;
    j["name"] = category.name;
    j["selection"] = to_string(category.selection);
    j["simplified"] = category.simplified;
    j["exclusiveness_policy"] = to_string(category.exclusiveness);
    j["step"] = category.step;
    auto symptoms = nlohmann::ordered_json::array();
    for (const auto& symptom : category.symptoms) {
        symptoms.push_back({{"id", symptom.id}, {"name", symptom.name}});
    }
    j["symptoms"] = std::move(symptoms);
    return j;
}

}  // namespace

std::string serialize_kb(const KnowledgeBase& kb) {
    nlohmann::ordered_json root;
    root["schema_version"] = kb.schema_version();
    auto categories = nlohmann::ordered_json::array();
    for (const auto& category : kb.categories()) categories.push_back(category_to_json(category));
    root["categories"] = std::move(categories);

    auto diseases = nlohmann::ordered_json::array();
    for (const auto& disease : kb.diseases()) {
        nlohmann::ordered_json j;
        j["id"] = disease.id;
        j["name"] = disease.name;
        j["severe"] = disease.severe;
        j["frequency"] = to_string(disease.frequency);
        j["sex_ratio"] = {{"male", disease.sex_ratio.male}, {"female", disease.sex_ratio.female}};
        auto judgements = nlohmann::ordered_json::object();
        for (const auto& category : kb.categories()) {
            for (const auto& symptom : category.symptoms) {
                if (const auto* entry = disease.judgement(symptom.id)) {
                    judgements[symptom.id] = to_string(*entry);
                }
            }
        }
        j["judgements"] = std::move(judgements);
        diseases.push_back(std::move(j));
    }
    root["diseases"] = std::move(diseases);
    return root.dump(2) + "\n";
}

Parsed<PatientCase> parse_case(std::string_view document, const KnowledgeBase& kb) {
    Parsed<PatientCase> result;
    auto root = detail::parse_json(document, result.diagnostics);
    if (!root) return result;
    return detail::read_case(*root, kb);
}

std::string serialize_case(const PatientCase& patient_case) {
    nlohmann::ordered_json root;
    root["sex"] = to_string(patient_case.sex);
    auto observations = nlohmann::ordered_json::object();
    for (const auto& [category, symptoms] : patient_case.observations) {
        observations[category] = symptoms;
    }
    root["observations"] = std::move(observations);
    return root.dump(2) + "\n";
}

Parsed<std::vector<CategorySpec>> parse_category_template(std::string_view document) {
    Parsed<std::vector<CategorySpec>> result;
    auto root = detail::parse_json(document, result.diagnostics);
    if (!root) return result;

    Reader reader(result.diagnostics);
    if (!reader.expect_object(*root, "")) return result;
    reader.unknown_fields(*root, {"categories"}, "");

    std::vector<CategorySpec> categories;
    if (const json* array = reader.field(*root, "categories", "")) {
        if (reader.expect_array(*array, "/categories")) {
            for (std::size_t i = 0; i < array->size(); ++i) {
                if (auto category = detail::read_category(reader, (*array)[i], pointer_append("/categories", i))) {
                    categories.push_back(std::move(*category));
                }
            }
        }
    }
    if (reader.error_count() > 0) return result;

    auto findings = validate_categories(categories);
    const bool failed = has_errors(findings);
    result.diagnostics.insert(result.diagnostics.end(), findings.begin(), findings.end());
    if (!failed) result.value = std::move(categories);
    return result;
}

std::string serialize_category_template(std::span<const CategorySpec> categories) {
    nlohmann::ordered_json root;
    auto array = nlohmann::ordered_json::array();
    for (const auto& category : categories) array.push_back(category_to_json(category));
    root["categories"] = std::move(array);
    return root.dump(2) + "\n";
}

}  // namespace dermrank

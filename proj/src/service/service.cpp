#include "dermrank/service.hpp"

#include <charconv>
#include <cmath>

#include "httplib.h"
#include "json.hpp"

#include "dermrank/kb_io.hpp"
#include "dermrank/report.hpp"
#include "kb/json_reader.hpp"

namespace dermrank {

namespace {

using json = nlohmann::json;

constexpr std::string_view kKbUnavailable = "KB_UNAVAILABLE";

HttpResponse diagnostics_response(int status, std::span<const Diagnostic> diagnostics) {
    ordered_json body;
    body["diagnostics"] = diagnostics_to_json(diagnostics);
    return {status, body.dump()};
}

HttpResponse unavailable() {
    const Diagnostic diagnostic = Diagnostic::error(kKbUnavailable, Location::document("/"),
                                                    "knowledge base is not loaded");
    return diagnostics_response(503, std::span(&diagnostic, 1));
}

/// Applies a partial RankingConfig from a request onto the defaults. Any
/// problem is returned as INVALID_CONFIG.
std::vector<Diagnostic> apply_overrides(const json& overrides, RankingConfig& config) {
    std::vector<Diagnostic> out;
    auto fail = [&](std::string pointer, std::string message) {
        out.push_back(Diagnostic::error(codes::kInvalidConfig, Location::document("/config" + pointer),
                                        std::move(message)));
    };
    if (!overrides.is_object()) {
        fail("", "config must be an object");
        return out;
    }
    for (const auto& [key, value] : overrides.items()) {
        if (key == "category_weights") {
            if (!value.is_object()) {
                fail("/category_weights", "expected an object of category id to weight");
                continue;
            }
            for (const auto& [category, weight] : value.items()) {
                if (!weight.is_number()) {
                    fail("/category_weights/" + category, "weight must be a number");
                    continue;
                }
                config.category_weights[category] = weight.get<double>();
            }
        } else if (key == "similarity_threshold" || key == "rank_threshold") {
            if (!value.is_number()) {
                fail("/" + key, "threshold must be a number (natural log)");
                continue;
            }
            (key == "similarity_threshold" ? config.similarity_threshold : config.rank_threshold) =
                value.get<double>();
        } else if (key == "max_results") {
            if (!value.is_number_integer() || value.get<std::int64_t>() < 1) {
                fail("/max_results", "max_results must be an integer >= 1");
                continue;
            }
            config.max_results = value.get<std::size_t>();
        } else {
            fail("/" + key, "unknown config field \"" + key + "\"");
        }
    }
    return out;
}

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)) {}

std::vector<Diagnostic> Service::load() {
    auto parsed = load_kb(config_.kb_path);
    if (parsed.ok()) install(std::make_shared<const KnowledgeBase>(std::move(*parsed.value)));
    return std::move(parsed.diagnostics);
}

void Service::install(std::shared_ptr<const KnowledgeBase> kb) {
    std::lock_guard lock(kb_mutex_);
    kb_ = std::move(kb);
}

std::shared_ptr<const KnowledgeBase> Service::snapshot() const {
    std::lock_guard lock(kb_mutex_);
    return kb_;
}

HttpResponse Service::get_schema() const {
    const auto kb = snapshot();
    if (!kb) return unavailable();

    ordered_json body;
    body["schema_version"] = kb->schema_version();
    body["sexes"] = {"male", "female", "unspecified"};
    auto steps = ordered_json::array();
    for (int step = kFirstWizardStep; step <= kLastWizardStep; ++step) {
        auto categories = ordered_json::array();
        for (const auto& category : kb->categories()) {
            if (category.step != step) continue;
            auto symptoms = ordered_json::array();
            for (const auto& symptom : category.symptoms) {
                symptoms.push_back({{"id", symptom.id}, {"name", symptom.name}});
            }
            categories.push_back({{"id", category.id},
                                  {"name", category.name},
                                  {"selection", to_string(category.selection)},
                                  {"simplified", category.simplified},
                                  {"symptoms", std::move(symptoms)}});
        }
        steps.push_back({{"step", step}, {"categories", std::move(categories)}});
    }
    body["steps"] = std::move(steps);
    return {200, body.dump()};
}

HttpResponse Service::post_rank(std::string_view request_body) const {
    const auto kb = snapshot();
    if (!kb) return unavailable();

    std::vector<Diagnostic> diagnostics;
    auto document = detail::parse_json(request_body, diagnostics);
    if (!document) return diagnostics_response(400, diagnostics);

    RankingConfig config = config_.default_ranking;
    if (document->is_object() && document->contains("config")) {
        auto problems = apply_overrides((*document)["config"], config);
        document->erase("config");
        if (!problems.empty()) return diagnostics_response(422, problems);
    }

    auto parsed = detail::read_case(*document, *kb);
    if (!parsed.ok()) return diagnostics_response(400, parsed.diagnostics);

    if (auto problems = config.validate(*kb); !problems.empty()) return diagnostics_response(422, problems);

    const auto ranked = rank_all(*kb, *parsed.value, config);
    const auto selected = select_diagnoses(ranked, config);
    const auto excluded = std::count_if(ranked.begin(), ranked.end(), [](const RankedDisease& r) { return r.excluded; });

    ordered_json body;
    auto diagnoses = ordered_json::array();
    for (const auto& row : selected) {
        ordered_json item;
        item["disease_id"] = row.disease;
        item["name"] = row.name;
        item["severe"] = row.severe;
        if (config_.expose_scores) {
            item["log_similarity"] = *row.log_similarity;
            item["log_rank"] = *row.log_rank;
        }
        diagnoses.push_back(std::move(item));
    }
    body["diagnoses"] = std::move(diagnoses);
    body["excluded_count"] = excluded;
    return {200, body.dump()};
}

HttpResponse Service::get_disease(std::string_view id) const {
    const auto kb = snapshot();
    if (!kb) return unavailable();

    const Disease* disease = kb->find_disease(id);
    if (!disease) {
        const auto diagnostic = Diagnostic::error(codes::kUnknownDisease, Location::disease(std::string(id)),
                                                  "no disease with this id");
        return diagnostics_response(404, std::span(&diagnostic, 1));
    }

    ordered_json body;
    body["id"] = disease->id;
    body["name"] = disease->name;
    body["severe"] = disease->severe;
    body["frequency"] = to_string(disease->frequency);
    body["sex_ratio"] = {{"male", disease->sex_ratio.male}, {"female", disease->sex_ratio.female}};
    auto judgements = ordered_json::object();
    for (const auto& category : kb->categories()) {
        for (const auto& symptom : category.symptoms) {
            const auto* entry = disease->judgement(symptom.id);
            if (!entry) continue;
            judgements[symptom.id] = entry->judgement == Judgement::No && entry->exclusive ? "no (exclusive)"
                                                                                         : std::string(to_string(*entry));
        }
    }
    body["judgements"] = std::move(judgements);
    return {200, body.dump()};
}

void Service::mount(httplib::Server& server) const {
    auto send = [](httplib::Response& res, const HttpResponse& response) {
        res.status = response.status;
        res.set_content(response.body, "application/json");
    };
    server.Get("/api/v1/schema", [this, send](const httplib::Request&, httplib::Response& res) {
        send(res, get_schema());
    });
    server.Post("/api/v1/rank", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, post_rank(req.body));
    });
    server.Get(R"(/api/v1/diseases/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, get_disease(req.matches[1].str()));
    });
    if (!config_.ui_dir.empty()) server.set_mount_point("/", config_.ui_dir.string());
}

bool parse_listen_address(std::string_view text, std::string& host, int& port) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0) return false;
    const auto port_text = text.substr(colon + 1);
    int value = 0;
    auto [end, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), value);
    if (ec != std::errc() || end != port_text.data() + port_text.size() || value < 0 || value > 65535) return false;
    host = std::string(text.substr(0, colon));
    port = value;
    return true;
}

}  // namespace dermrank

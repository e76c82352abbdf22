#include "dermrank/cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <pthread.h>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "httplib.h"

#include "dermrank/engine.hpp"
#include "dermrank/kb_io.hpp"
#include "dermrank/oracle.hpp"
#include "dermrank/report.hpp"
#include "dermrank/service.hpp"
#include "dermrank/synth.hpp"

namespace dermrank::cli {

namespace {

constexpr double kCheckRelativeTolerance = 1e-9;

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void print_diagnostics(std::ostream& out, std::span<const Diagnostic> diagnostics) {
    for (const auto& d : diagnostics) out << to_json_line(d) << '\n';
}

bool is_io_failure(std::span<const Diagnostic> diagnostics) {
    return diagnostics.size() == 1 && diagnostics.front().code == kIoErrorCode;
}

/// Loads a KB for a command. On failure prints the reason and sets `status`.
std::optional<KnowledgeBase> open_kb(const std::string& path, std::ostream& out, std::ostream& err, int& status) {
    if (path.empty()) {
        err << "no knowledge base given (use --kb or DERMRANK_KB)\n";
        status = kUsageOrIo;
        return std::nullopt;
    }
    auto parsed = load_kb(path);
    if (parsed.ok()) return std::move(parsed.value);
    if (is_io_failure(parsed.diagnostics)) {
        err << "cannot read " << path << '\n';
        status = kUsageOrIo;
    } else {
        print_diagnostics(out, parsed.diagnostics);
        status = kValidationErrors;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

struct RankOptions {
    std::string kb_path;
    std::string case_path;
    std::size_t top = 0;
    std::optional<double> similarity_threshold;
    std::optional<double> rank_threshold;
    std::vector<std::string> weights;
    bool show_scores = false;
    bool all = false;
    std::string format = "json";
};

int cmd_rank(const RankOptions& options, std::ostream& out, std::ostream& err) {
    int status = kSuccess;
    auto kb = open_kb(options.kb_path, out, err, status);
    if (!kb) return status;

    auto case_text = read_file(options.case_path);
    if (!case_text) {
        err << "cannot read " << options.case_path << '\n';
        return kUsageOrIo;
    }
    auto parsed = parse_case(*case_text, *kb);
    if (!parsed.ok()) {
        print_diagnostics(out, parsed.diagnostics);
        return kValidationErrors;
    }

    RankingConfig config;
    if (options.top > 0) config.max_results = options.top;
    if (options.similarity_threshold) config.similarity_threshold = *options.similarity_threshold;
    if (options.rank_threshold) config.rank_threshold = *options.rank_threshold;
    for (const auto& spec : options.weights) {
        const auto eq = spec.find('=');
        double weight = 0.0;
        std::istringstream value(eq == std::string::npos ? std::string() : spec.substr(eq + 1));
        if (eq == std::string::npos || !(value >> weight) || !value.eof()) {
            err << "--weight expects CATEGORY=WEIGHT, got \"" << spec << "\"\n";
            return kUsageOrIo;
        }
        config.category_weights[spec.substr(0, eq)] = weight;
    }
    if (auto problems = config.validate(*kb); !problems.empty()) {
        print_diagnostics(err, problems);
        return kUsageOrIo;
    }

    auto ranked = rank_all(*kb, *parsed.value, config);
    const auto selected = select_diagnoses(ranked, config);
    std::vector<RankedDisease> rows;
    if (options.all) {
        std::set<std::string> chosen;
        for (const auto& row : selected) chosen.insert(row.disease);
        for (auto& row : ranked) row.selected = chosen.contains(row.disease);
        rows = std::move(ranked);
    } else {
        rows = selected;
    }

    if (options.format == "text") {
        std::size_t position = 0;
        for (const auto& row : rows) {
            std::string line = fmt::format("{:>3}  {:1} {:<40} {}", ++position, row.severe ? "!" : "", row.name,
                                           row.disease);
            if (row.excluded) {
                line += fmt::format("  excluded by {}", row.exclusion->triggering_symptom);
            } else if (options.show_scores) {
                line += fmt::format("  log_similarity={:.6f} log_rank={:.6f}", *row.log_similarity, *row.log_rank);
            }
            out << line << '\n';
        }
    } else {
        for (const auto& row : rows) out << ranked_to_json(row, options.show_scores).dump() << '\n';
    }
    return kSuccess;
}

// ---------------------------------------------------------------------------

struct GenerateOptions {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string template_path;
    std::string out_path = "-";
};

int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err) {
    if (options.n == 0) {
        err << "--n must be at least 1\n";
        return kUsageOrIo;
    }
    std::vector<CategorySpec> categories = default_category_template();
    if (!options.template_path.empty()) {
        auto text = read_file(options.template_path);
        if (!text) {
            err << "cannot read " << options.template_path << '\n';
            return kUsageOrIo;
        }
        auto parsed = parse_category_template(*text);
        if (!parsed.ok()) {
            print_diagnostics(out, parsed.diagnostics);
            return kValidationErrors;
        }
        categories = std::move(*parsed.value);
    }

    auto kb = generate_synthetic_kb(options.n, categories, options.seed);
    if (!kb.ok()) {
        print_diagnostics(out, kb.diagnostics);
        return kValidationErrors;
    }
    const auto document = serialize_kb(*kb.value);
    if (options.out_path == "-") {
        out << document;
        return kSuccess;
    }
    std::ofstream file(options.out_path, std::ios::binary | std::ios::trunc);
    if (!(file << document)) {
        err << "cannot write " << options.out_path << '\n';
        return kUsageOrIo;
    }
    return kSuccess;
}

// ---------------------------------------------------------------------------

struct CheckOptions {
    std::string kb_path;
    std::size_t cases = 100;
    std::uint64_t seed = 1;
    double noise = 0.2;
    std::size_t max_categories = 12;
};

int cmd_check(const CheckOptions& options, std::ostream& out, std::ostream& err) {
    if (options.cases == 0) {
        err << "--cases must be at least 1\n";
        return kUsageOrIo;
    }
    int status = kSuccess;
    auto kb = open_kb(options.kb_path, out, err, status);
    if (!kb) return status;

    const auto diseases = kb->diseases();
    std::size_t agreed = 0;
    double max_error = 0.0;
    ordered_json first_failure;

    for (std::size_t i = 0; i < options.cases; ++i) {
        const std::uint64_t case_seed = options.seed + i;
        std::optional<PatientCase> patient_case;
        std::string target;
        // The seed picks the target; skip targets without any Yes symptom.
        for (std::size_t attempt = 0; attempt < diseases.size() && !patient_case; ++attempt) {
            target = diseases[(case_seed + attempt) % diseases.size()].id;
            auto generated = generate_synthetic_case(*kb, target, options.noise, case_seed,
                                                     {.max_observed_categories = options.max_categories});
            if (generated.ok()) patient_case = std::move(generated.value);
        }
        if (!patient_case) {
            err << "no disease in the knowledge base has a \"yes\" judgement; nothing to check\n";
            return kUsageOrIo;
        }

        const auto ranked = rank_all(*kb, *patient_case);
        std::vector<oracle::OracleEntry> reference;
        try {
            reference = oracle::oracle_rank_all(*kb, *patient_case);
        } catch (const oracle::OracleUnderflow& e) {
            err << "oracle underflow on case seed " << case_seed << ": " << e.what()
                << "\nreduce --max-categories or use a smaller knowledge base\n";
            return kUsageOrIo;
        }

        ordered_json failure;
        try {
            const auto report = oracle::compare_orderings(ranked, reference);
            max_error = std::max(max_error, report.max_relative_value_error);
            if (!report.agree) {
                failure = {{"seed", case_seed},
                           {"target", target},
                           {"reason", "ordering"},
                           {"position", report.first_divergence->position},
                           {"engine", report.first_divergence->engine_disease},
                           {"oracle", report.first_divergence->oracle_disease}};
            } else if (!(report.max_relative_value_error <= kCheckRelativeTolerance)) {
                failure = {{"seed", case_seed},
                           {"target", target},
                           {"reason", "value"},
                           {"relative_error", report.max_relative_value_error}};
            }
        } catch (const oracle::LengthMismatch& e) {
            failure = {{"seed", case_seed}, {"target", target}, {"reason", "survivors"}, {"detail", e.what()}};
        }
        if (failure.is_null()) {
            ++agreed;
        } else if (first_failure.is_null()) {
            first_failure = std::move(failure);
        }
    }

    ordered_json summary;
    summary["cases"] = options.cases;
    summary["agree"] = agreed;
    summary["disagree"] = options.cases - agreed;
    summary["max_relative_error"] = max_error;
    summary["tolerance"] = kCheckRelativeTolerance;
    if (!first_failure.is_null()) summary["first_failure"] = first_failure;
    out << summary.dump() << '\n';
    return agreed == options.cases ? kSuccess : kOracleDisagreement;
}

// ---------------------------------------------------------------------------

struct ServeOptions {
    std::string kb_path;
    std::string listen = "127.0.0.1:8080";
    bool expose_scores = false;
    std::string ui_dir;
};

int cmd_serve(const ServeOptions& options, std::ostream& out, std::ostream& err) {
    ServiceConfig config;
    if (!parse_listen_address(options.listen, config.host, config.port)) {
        err << "--listen expects HOST:PORT, got \"" << options.listen << "\"\n";
        return kUsageOrIo;
    }
    if (options.kb_path.empty()) {
        err << "no knowledge base given (use --kb or DERMRANK_KB)\n";
        return kUsageOrIo;
    }
    config.kb_path = options.kb_path;
    config.expose_scores = options.expose_scores;
    config.ui_dir = options.ui_dir;

    Service service(config);
    if (auto diagnostics = service.load(); !service.snapshot()) {
        print_diagnostics(err, diagnostics);
        return kUsageOrIo;
    }

    httplib::Server server;
    // Without SO_REUSEPORT, so a second instance on the same port fails to bind.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    service.mount(server);
    if (!server.bind_to_port(config.host, config.port)) {
        err << "cannot bind " << options.listen << '\n';
        return kUsageOrIo;
    }

    // SIGHUP reloads the KB; SIGINT/SIGTERM stop the server. Signals are
    // blocked here so that every server thread inherits the mask and only the
    // waiter below receives them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGHUP);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    std::thread waiter([&] {
        for (;;) {
            int received = 0;
            if (sigwait(&signals, &received) != 0) continue;
            if (received == SIGHUP) {
                auto diagnostics = service.load();
                print_diagnostics(err, diagnostics);
                err << (has_errors(diagnostics) ? "reload failed; keeping the current knowledge base\n"
                                                : "knowledge base reloaded\n");
                continue;
            }
            server.stop();
            return;
        }
    });

    out << "serving on http://" << config.host << ':' << config.port << '\n' << std::flush;
    const bool clean = server.listen_after_bind();
    if (waiter.joinable()) {
        if (clean) {
            waiter.join();
        } else {
            pthread_kill(waiter.native_handle(), SIGTERM);
            waiter.join();
        }
    }
    pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
    return clean ? kSuccess : kUsageOrIo;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ranks candidate diagnoses against a dermatology knowledge base."};
    app.name("dermrank");
    app.require_subcommand(1);

    std::string validate_kb;
    auto* validate = app.add_subcommand("validate", "check a knowledge base and print diagnostics as JSON lines");
    validate->add_option("kb,--kb", validate_kb, "knowledge base file")->envname("DERMRANK_KB");

    RankOptions rank_options;
    auto* rank = app.add_subcommand("rank", "rank diseases for a patient case");
    rank->add_option("--kb", rank_options.kb_path, "knowledge base file")->envname("DERMRANK_KB");
    rank->add_option("case,--case", rank_options.case_path, "case file")->required();
    rank->add_option("--top", rank_options.top, "maximum number of diagnoses")->check(CLI::PositiveNumber);
    rank->add_option("--similarity-threshold", rank_options.similarity_threshold, "natural-log similarity threshold");
    rank->add_option("--rank-threshold", rank_options.rank_threshold, "natural-log rank threshold");
    rank->add_option("--weight", rank_options.weights, "category weight, CATEGORY=WEIGHT (repeatable)");
    rank->add_flag("--show-scores", rank_options.show_scores, "include log_similarity and log_rank");
    rank->add_flag("--all", rank_options.all, "list every disease, including excluded and unselected ones");
    rank->add_option("--format", rank_options.format, "json or text")->check(CLI::IsMember({"json", "text"}));

    GenerateOptions generate_options;
    auto* generate = app.add_subcommand("generate", "write a synthetic knowledge base");
    generate->add_option("--n", generate_options.n, "number of diseases")->required();
    generate->add_option("--seed", generate_options.seed, "random seed");
    generate->add_option("--template", generate_options.template_path, "category template file");
    generate->add_option("--out", generate_options.out_path, "output file, - for stdout");

    CheckOptions check_options;
    auto* check = app.add_subcommand("check", "compare the engine against the reference oracle on seeded cases");
    check->add_option("--kb", check_options.kb_path, "knowledge base file")->envname("DERMRANK_KB");
    check->add_option("--cases", check_options.cases, "number of generated cases");
    check->add_option("--seed", check_options.seed, "first case seed");
    check->add_option("--noise", check_options.noise, "observation noise")->check(CLI::Range(0.0, 1.0));
    check->add_option("--max-categories", check_options.max_categories, "observed categories per case")
        ->check(CLI::PositiveNumber);

    ServeOptions serve_options;
    auto* serve = app.add_subcommand("serve", "serve the HTTP API");
    serve->add_option("--kb", serve_options.kb_path, "knowledge base file")->envname("DERMRANK_KB");
    serve->add_option("--listen", serve_options.listen, "HOST:PORT")->envname("DERMRANK_LISTEN");
    serve->add_flag("--expose-scores", serve_options.expose_scores, "include scores in rank responses")
        ->envname("DERMRANK_EXPOSE_SCORES");
    serve->add_option("--ui-dir", serve_options.ui_dir, "static UI bundle served under /")->envname("DERMRANK_UI_DIR");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageOrIo;
    }

    if (validate->parsed()) {
        if (validate_kb.empty()) {
            err << "no knowledge base given (use --kb or DERMRANK_KB)\n";
            return kUsageOrIo;
        }
        auto parsed = load_kb(validate_kb);
        if (is_io_failure(parsed.diagnostics)) {
            err << "cannot read " << validate_kb << '\n';
            return kUsageOrIo;
        }
        print_diagnostics(out, parsed.diagnostics);
        return parsed.ok() ? kSuccess : kValidationErrors;
    }
    if (rank->parsed()) return cmd_rank(rank_options, out, err);
    if (generate->parsed()) return cmd_generate(generate_options, out, err);
    if (check->parsed()) return cmd_check(check_options, out, err);
    if (serve->parsed()) return cmd_serve(serve_options, out, err);
    return kUsageOrIo;
}

}  // namespace dermrank::cli

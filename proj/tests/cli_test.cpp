#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "httplib.h"
#include "json.hpp"

#include "dermrank/cli.hpp"
#include "support.hpp"

namespace dermrank {
namespace {

using nlohmann::json;
using testing::fixture_path;

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;

    [[nodiscard]] std::vector<std::string> lines() const {
        std::vector<std::string> result;
        std::istringstream in(out);
        for (std::string line; std::getline(in, line);) result.push_back(line);
        return result;
    }
};

RunResult run(std::vector<std::string> args) {
    args.insert(args.begin(), "dermrank");
    std::vector<char*> argv;
    for (auto& arg : args) argv.push_back(arg.data());
    std::ostringstream out;
    std::ostringstream err;
    RunResult result;
    result.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    result.out = out.str();
    result.err = err.str();
    return result;
}

std::string fixture(const std::string& name) { return fixture_path(name).string(); }

class TempDir {
public:
    TempDir() : path_(std::filesystem::temp_directory_path() / ("dermrank_cli_" + std::to_string(::getpid()))) {
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }

    [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

TEST(CliUsage, ExitCodes) {
    EXPECT_EQ(run({}).code, cli::kUsageOrIo);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kUsageOrIo);
    EXPECT_EQ(run({"--help"}).code, cli::kSuccess);
    EXPECT_EQ(run({"rank", "--help"}).code, cli::kSuccess);
}

TEST(CliValidate, ValidFixtureIsSilent) {
    const auto result = run({"validate", fixture("kb_small.json")});
    EXPECT_EQ(result.code, cli::kSuccess);
    EXPECT_TRUE(result.out.empty());
    EXPECT_EQ(run({"validate", "--kb", fixture("kb_small.json")}).code, cli::kSuccess);
}

TEST(CliValidate, UnlikelyInSimplifiedCategory) {
    const auto result = run({"validate", fixture("kb_unlikely_simplified.json")});
    EXPECT_EQ(result.code, cli::kValidationErrors);
    const auto lines = result.lines();
    ASSERT_EQ(lines.size(), 1u);
    const auto diagnostic = json::parse(lines[0]);
    EXPECT_EQ(diagnostic["severity"], "error");
    EXPECT_EQ(diagnostic["code"], "UNLIKELY_IN_SIMPLIFIED");
}

TEST(CliValidate, MissingFile) {
    EXPECT_EQ(run({"validate", fixture("nope.json")}).code, cli::kUsageOrIo);
    ::unsetenv("DERMRANK_KB");
    EXPECT_EQ(run({"validate"}).code, cli::kUsageOrIo);
}

TEST(CliValidate, KbFromEnvironment) {
    ::setenv("DERMRANK_KB", fixture("kb_sparse.json").c_str(), 1);
    const auto result = run({"validate"});
    ::unsetenv("DERMRANK_KB");
    EXPECT_EQ(result.code, cli::kValidationErrors);
    EXPECT_NE(result.out.find("SPARSE_JUDGEMENT_MATRIX"), std::string::npos);
}

TEST(CliRank, HeadedByBestMatch) {
    const auto result = run({"rank", "--kb", fixture("kb_small.json"), "--case", fixture("case_molluscum.json")});
    ASSERT_EQ(result.code, cli::kSuccess) << result.err;
    const auto lines = result.lines();
    ASSERT_FALSE(lines.empty());
    const auto first = json::parse(lines[0]);
    EXPECT_EQ(first["disease_id"], "molluscum_contagiosum");
    EXPECT_EQ(first["selected"], true);
    EXPECT_EQ(result.out.find("log_"), std::string::npos);
}

TEST(CliRank, TopOneIsOneLine) {
    const auto result =
        run({"rank", "--kb", fixture("kb_small.json"), "--case", fixture("case_afx.json"), "--top", "1"});
    ASSERT_EQ(result.code, cli::kSuccess);
    EXPECT_EQ(result.lines().size(), 1u);
}

TEST(CliRank, UnknownSymptomIsAValidationError) {
    const auto result = run({"rank", "--kb", fixture("kb_small.json"), "--case", fixture("case_unknown_symptom.json")});
    EXPECT_EQ(result.code, cli::kValidationErrors);
    EXPECT_NE(result.out.find("UNKNOWN_SYMPTOM"), std::string::npos);
}

TEST(CliRank, ShowScores) {
    const auto result = run({"rank", "--kb", fixture("kb_small.json"), "--case", fixture("case_afx.json"),
                             "--show-scores"});
    ASSERT_EQ(result.code, cli::kSuccess);
    for (const auto& line : result.lines()) {
        const auto row = json::parse(line);
        EXPECT_TRUE(row.contains("log_similarity"));
        EXPECT_TRUE(row.contains("log_rank"));
    }
}

TEST(CliRank, AllIncludesExcludedRows) {
    const auto result = run({"rank", "--kb", fixture("kb_small.json"), "--case", fixture("case_afx.json"), "--all"});
    ASSERT_EQ(result.code, cli::kSuccess);
    const auto lines = result.lines();
    ASSERT_EQ(lines.size(), 6u);
    const auto last = json::parse(lines.back());
    EXPECT_EQ(last["excluded"], true);
    EXPECT_EQ(last["selected"], false);
    EXPECT_EQ(last["exclusion"]["symptom_id"], "single");
}

TEST(CliRank, ThresholdsAndWeights) {
    const auto base = std::vector<std::string>{"rank", "--kb", fixture("kb_small.json"), "--case", fixture("case_afx.json")};
    auto strict = base;
    strict.insert(strict.end(), {"--rank-threshold", "0"});
    const auto none = run(strict);
    EXPECT_EQ(none.code, cli::kSuccess);
    EXPECT_TRUE(none.out.empty());

    auto weighted = base;
    weighted.insert(weighted.end(), {"--weight", "form=2", "--weight", "color=0.5", "--similarity-threshold", "-100"});
    EXPECT_EQ(run(weighted).code, cli::kSuccess);

    auto malformed = base;
    malformed.insert(malformed.end(), {"--weight", "form"});
    EXPECT_EQ(run(malformed).code, cli::kUsageOrIo);

    auto unknown = base;
    unknown.insert(unknown.end(), {"--weight", "texture=1"});
    EXPECT_EQ(run(unknown).code, cli::kUsageOrIo);

    auto zero = base;
    zero.insert(zero.end(), {"--weight", "form=0"});
    EXPECT_EQ(run(zero).code, cli::kUsageOrIo);
}

TEST(CliRank, TextFormat) {
    const auto result = run({"rank", "--kb", fixture("kb_small.json"), "--case", fixture("case_molluscum.json"),
                             "--format", "text"});
    ASSERT_EQ(result.code, cli::kSuccess);
    const auto lines = result.lines();
    ASSERT_FALSE(lines.empty());
    EXPECT_NE(lines[0].find("Molluscum contagiosum"), std::string::npos);
    EXPECT_EQ(result.out.find("log_"), std::string::npos);
}

TEST(CliRank, IoErrors) {
    EXPECT_EQ(run({"rank", "--kb", fixture("kb_small.json"), "--case", fixture("nope.json")}).code, cli::kUsageOrIo);
    EXPECT_EQ(run({"rank", "--kb", fixture("nope.json"), "--case", fixture("case_afx.json")}).code, cli::kUsageOrIo);
    EXPECT_EQ(run({"rank", "--kb", fixture("kb_small.json")}).code, cli::kUsageOrIo);
    EXPECT_EQ(run({"rank", "--kb", fixture("kb_sparse.json"), "--case", fixture("case_afx.json")}).code,
              cli::kValidationErrors);
}

TEST(CliGenerate, SameSeedSameFile) {
    TempDir dir;
    ASSERT_EQ(run({"generate", "--n", "5", "--seed", "42", "--out", dir.file("a.json")}).code, cli::kSuccess);
    ASSERT_EQ(run({"generate", "--n", "5", "--seed", "42", "--out", dir.file("b.json")}).code, cli::kSuccess);
    EXPECT_EQ(testing::read_text(dir.file("a.json")), testing::read_text(dir.file("b.json")));
    EXPECT_EQ(run({"generate", "--n", "5", "--seed", "42"}).out, testing::read_text(dir.file("a.json")));
}

TEST(CliGenerate, FullScaleValidates) {
    TempDir dir;
    ASSERT_EQ(run({"generate", "--n", "620", "--seed", "1", "--out", dir.file("kb.json")}).code, cli::kSuccess);
    const auto result = run({"validate", dir.file("kb.json")});
    EXPECT_EQ(result.code, cli::kSuccess) << result.out;
}

TEST(CliGenerate, Errors) {
    EXPECT_EQ(run({"generate", "--n", "0"}).code, cli::kUsageOrIo);
    EXPECT_EQ(run({"generate"}).code, cli::kUsageOrIo);
    EXPECT_EQ(run({"generate", "--n", "3", "--template", fixture("nope.json")}).code, cli::kUsageOrIo);

    TempDir dir;
    std::ofstream(dir.file("bad_template.json")) << R"({"categories": [{"id": "c"}]})";
    const auto result = run({"generate", "--n", "3", "--template", dir.file("bad_template.json")});
    EXPECT_EQ(result.code, cli::kValidationErrors);
    EXPECT_NE(result.out.find("MISSING_FIELD"), std::string::npos);
}

TEST(CliGenerate, CustomTemplate) {
    TempDir dir;
    std::ofstream(dir.file("template.json")) << R"({"categories": [
        {"id": "form", "name": "Form", "selection": "multi", "simplified": false,
         "exclusiveness_policy": "never", "step": 3,
         "symptoms": [{"id": "domeShaped", "name": "Dome shaped"}, {"id": "umbilicated", "name": "Umbilicated"}]}]})";
    const auto result = run({"generate", "--n", "4", "--template", dir.file("template.json")});
    ASSERT_EQ(result.code, cli::kSuccess) << result.out << result.err;
    const auto kb = json::parse(result.out);
    EXPECT_EQ(kb["categories"].size(), 1u);
    EXPECT_EQ(kb["diseases"].size(), 4u);
}

TEST(CliCheck, FixtureAgrees) {
    const auto result = run({"check", "--kb", fixture("kb_small.json"), "--cases", "100", "--seed", "7"});
    EXPECT_EQ(result.code, cli::kSuccess) << result.out;
    const auto summary = json::parse(result.out);
    EXPECT_EQ(summary["agree"], 100);
    EXPECT_EQ(summary["disagree"], 0);
    EXPECT_LE(summary["max_relative_error"].get<double>(), 1e-9);
}

TEST(CliCheck, Errors) {
    EXPECT_EQ(run({"check", "--kb", fixture("kb_small.json"), "--cases", "0"}).code, cli::kUsageOrIo);
    EXPECT_EQ(run({"check", "--kb", fixture("nope.json")}).code, cli::kUsageOrIo);
}

TEST(CliCheck, UnderflowIsAUsageError) {
    // 150 observed categories push the weakest linear products below 1e-300.
    TempDir dir;
    json categories = json::array();
    for (int c = 0; c < 150; ++c) {
        const std::string id = "c" + std::to_string(c);
        json symptoms = json::array();
        for (int s = 0; s < 3; ++s) symptoms.push_back({{"id", id + "_s" + std::to_string(s)}, {"name", "S"}});
        categories.push_back({{"id", id}, {"name", id}, {"selection", "multi"}, {"simplified", false},
                              {"exclusiveness_policy", "never"}, {"step", 3}, {"symptoms", symptoms}});
    }
    std::ofstream(dir.file("template.json")) << json{{"categories", categories}}.dump();
    ASSERT_EQ(run({"generate", "--n", "10", "--seed", "2", "--template", dir.file("template.json"), "--out",
                   dir.file("kb.json")})
                  .code,
              cli::kSuccess);
    const auto result = run({"check", "--kb", dir.file("kb.json"), "--cases", "20", "--max-categories", "1000"});
    EXPECT_EQ(result.code, cli::kUsageOrIo);
    EXPECT_NE(result.err.find("--max-categories"), std::string::npos);
}

TEST(CliCheck, MutationCanaryIsCaught) {
    TempDir dir;
    const auto kb = dir.file("kb.json");
    ASSERT_EQ(run({"generate", "--n", "20", "--seed", "1", "--out", kb}).code, cli::kSuccess);
    const auto normal = testing::run_process({DERMRANK_BINARY, "check", "--kb", kb, "--cases", "100", "--seed", "1"});
    EXPECT_EQ(normal.exit_code, cli::kSuccess) << normal.out;
    const auto canary =
        testing::run_process({DERMRANK_CANARY_BINARY, "check", "--kb", kb, "--cases", "100", "--seed", "1"});
    EXPECT_EQ(canary.exit_code, cli::kOracleDisagreement) << canary.out;
}

TEST(CliServe, InvalidKbFailsBeforeBinding) {
    const auto result = run({"serve", "--kb", fixture("kb_sparse.json"), "--listen", "127.0.0.1:0"});
    EXPECT_EQ(result.code, cli::kUsageOrIo);
    EXPECT_NE(result.err.find("SPARSE_JUDGEMENT_MATRIX"), std::string::npos);
    EXPECT_EQ(run({"serve", "--kb", fixture("kb_small.json"), "--listen", "nowhere"}).code, cli::kUsageOrIo);
}

TEST(CliServe, OccupiedPort) {
    httplib::Server blocker;
    const int port = blocker.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    const auto result = run({"serve", "--kb", fixture("kb_small.json"), "--listen", "127.0.0.1:" + std::to_string(port)});
    EXPECT_EQ(result.code, cli::kUsageOrIo);
}

TEST(CliServe, ServesUntilTerminated) {
    const int port = testing::free_port();
    const std::string listen = "127.0.0.1:" + std::to_string(port);
    const pid_t pid = fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
        const int null = open("/dev/null", O_WRONLY);
        dup2(null, STDOUT_FILENO);
        dup2(null, STDERR_FILENO);
        const std::string kb = fixture("kb_small.json");
        execl(DERMRANK_BINARY, DERMRANK_BINARY, "serve", "--kb", kb.c_str(), "--listen", listen.c_str(), nullptr);
        _exit(127);
    }

    httplib::Client client("127.0.0.1", port);
    httplib::Result schema;
    for (int attempt = 0; attempt < 100 && !schema; ++attempt) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        schema = client.Get("/api/v1/schema");
    }
    ASSERT_TRUE(schema) << "server did not come up";
    EXPECT_EQ(schema->status, 200);

    kill(pid, SIGHUP);  // reload keeps serving
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    const auto after_reload = client.Get("/api/v1/diseases/lichen_planus");
    ASSERT_TRUE(after_reload);
    EXPECT_EQ(after_reload->status, 200);

    kill(pid, SIGTERM);
    int status = 0;
    waitpid(pid, &status, 0);
    ASSERT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), cli::kSuccess);
}

}  // namespace
}  // namespace dermrank

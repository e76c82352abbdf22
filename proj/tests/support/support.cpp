#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "dermrank/engine.hpp"
#include "dermrank/kb_io.hpp"
#include "dermrank/synth.hpp"

namespace dermrank::testing {

std::filesystem::path fixture_path(const std::string& name) {
    return std::filesystem::path(DERMRANK_FIXTURE_DIR) / name;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

KnowledgeBase load_fixture_kb(const std::string& name) {
    auto parsed = load_kb(fixture_path(name));
    if (!parsed.ok()) throw std::runtime_error("fixture " + name + " does not load");
    return std::move(*parsed.value);
}

std::vector<CategorySpec> random_template(Gen& gen, std::size_t max_categories, std::size_t max_symptoms) {
    std::vector<CategorySpec> categories(gen.between(1, max_categories));
    for (std::size_t c = 0; c < categories.size(); ++c) {
        auto& category = categories[c];
        category.id = "c" + std::to_string(c);
        category.name = "Category " + std::to_string(c);
        category.selection = gen.chance(0.4) ? Selection::Single : Selection::Multi;
        category.simplified = gen.chance(0.3);
        const std::size_t policy = gen.index(3);
        category.exclusiveness = policy == 0   ? ExclusivenessPolicy::Always
                                 : policy == 1 ? ExclusivenessPolicy::Never
                                               : ExclusivenessPolicy::PerDisease;
        category.step = static_cast<int>(gen.between(kFirstWizardStep, kLastWizardStep));
        const std::size_t n = gen.between(1, max_symptoms);
        for (std::size_t s = 0; s < n; ++s) {
            const auto id = category.id + "s" + std::to_string(s);
            category.symptoms.push_back({id, "Symptom " + id});
        }
    }
    return categories;
}

KnowledgeBase random_kb(Gen& gen, std::size_t max_diseases) {
    const auto categories = random_template(gen);
    SynthOptions options;
    options.yes_in_every_category = gen.chance(0.5);
    auto kb = generate_synthetic_kb(gen.between(1, max_diseases), categories, gen.seed(), options);
    if (!kb.ok()) throw std::runtime_error("random template rejected by the generator");
    return std::move(*kb.value);
}

PatientCase random_case(Gen& gen, const KnowledgeBase& kb) {
    PatientCase patient_case;
    patient_case.sex = std::vector<Sex>{Sex::Male, Sex::Female, Sex::Unspecified}[gen.index(3)];
    for (const auto& category : kb.categories()) {
        if (!gen.chance(0.6)) continue;
        auto& chosen = patient_case.observations[category.id];
        const std::size_t count =
            category.selection == Selection::Single ? 1 : gen.between(1, category.symptoms.size());
        while (chosen.size() < count) chosen.insert(category.symptoms[gen.index(category.symptoms.size())].id);
    }
    return patient_case;
}

namespace {

/// 1-based position of `target` when survivors are ordered by similarity
/// alone (ties by id); 0 if it was excluded.
std::size_t similarity_position(const KnowledgeBase& kb, const PatientCase& patient_case, const std::string& target) {
    auto ranked = rank_all(kb, patient_case);
    std::erase_if(ranked, [](const RankedDisease& row) { return row.excluded; });
    std::sort(ranked.begin(), ranked.end(), [](const RankedDisease& a, const RankedDisease& b) {
        if (*a.log_similarity != *b.log_similarity) return *a.log_similarity > *b.log_similarity;
        return a.disease < b.disease;
    });
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (ranked[i].disease == target) return i + 1;
    }
    return 0;
}

}  // namespace

RetrievalCounts retrieval_proxy(std::uint64_t kb_seed) {
    const auto categories = default_category_template();
    const auto kb = generate_synthetic_kb(100, categories, kb_seed);
    if (!kb.ok()) throw std::runtime_error("default template rejected by the generator");

    RetrievalCounts counts;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const std::string target = "d" + std::to_string(seed);
        for (double noise : {0.0, 0.2}) {
            auto patient_case = generate_synthetic_case(*kb.value, target, noise, seed);
            if (!patient_case.ok()) continue;
            const auto position = similarity_position(*kb.value, *patient_case.value, target);
            if (noise == 0.0 && position == 1) ++counts.rank1_at_noise0;
            if (noise > 0.0 && position >= 1 && position <= 5) ++counts.top5_at_noise02;
        }
    }
    return counts;
}

ProcessResult run_process(const std::vector<std::string>& argv) {
    int pipe_fds[2];
    if (pipe(pipe_fds) != 0) throw std::runtime_error("pipe failed");
    const pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
        dup2(pipe_fds[1], STDOUT_FILENO);
        close(pipe_fds[0]);
        close(pipe_fds[1]);
        std::vector<char*> args;
        for (const auto& arg : argv) args.push_back(const_cast<char*>(arg.c_str()));
        args.push_back(nullptr);
        execv(args[0], args.data());
        _exit(127);
    }
    close(pipe_fds[1]);
    ProcessResult result;
    char buffer[4096];
    ssize_t n = 0;
    while ((n = read(pipe_fds[0], buffer, sizeof buffer)) > 0) result.out.append(buffer, static_cast<std::size_t>(n));
    close(pipe_fds[0]);
    int status = 0;
    waitpid(pid, &status, 0);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

int free_port() {
    const int fd = socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in address{};
    address.sin_family = AF_INET;
    address.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    address.sin_port = 0;
    bind(fd, reinterpret_cast<sockaddr*>(&address), sizeof address);
    socklen_t length = sizeof address;
    getsockname(fd, reinterpret_cast<sockaddr*>(&address), &length);
    close(fd);
    return ntohs(address.sin_port);
}

}  // namespace dermrank::testing

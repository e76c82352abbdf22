#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "dermrank/diagnostic.hpp"
#include "dermrank/engine.hpp"
#include "dermrank/kb.hpp"

namespace httplib {
class Server;
}

namespace dermrank {

struct ServiceConfig {
    std::filesystem::path kb_path;
    std::string host = "127.0.0.1";
    int port = 8080;
    RankingConfig default_ranking;
    /// Include log_similarity/log_rank in rank responses. Off for any
    /// human-facing client.
    bool expose_scores = false;
    /// Static UI bundle served under "/" when set.
    std::filesystem::path ui_dir;
};

struct HttpResponse {
    int status = 200;
    std::string body;  // JSON
};

/// HTTP facade over an immutable KB. Handlers are plain member functions so
/// they can be exercised without a socket; mount() wires them to a server.
///
/// The KB is held behind a shared_ptr and replaced wholesale by load() or
/// install(); each request works on the snapshot it took at entry.
class Service {
public:
    explicit Service(ServiceConfig config);

    /// (Re)reads config().kb_path. On success the new KB replaces the old
    /// one; on failure the current KB (if any) stays and the diagnostics are
    /// returned.
    std::vector<Diagnostic> load();

    void install(std::shared_ptr<const KnowledgeBase> kb);

    [[nodiscard]] std::shared_ptr<const KnowledgeBase> snapshot() const;
    [[nodiscard]] const ServiceConfig& config() const { return config_; }

    /// GET /api/v1/schema
    [[nodiscard]] HttpResponse get_schema() const;
    /// POST /api/v1/rank
    [[nodiscard]] HttpResponse post_rank(std::string_view body) const;
    /// GET /api/v1/diseases/{id}
    [[nodiscard]] HttpResponse get_disease(std::string_view id) const;

    void mount(httplib::Server& server) const;

private:
    ServiceConfig config_;
    mutable std::mutex kb_mutex_;
    std::shared_ptr<const KnowledgeBase> kb_;
};

/// Parses "host:port". Port must be 0..65535.
bool parse_listen_address(std::string_view text, std::string& host, int& port);

}  // namespace dermrank

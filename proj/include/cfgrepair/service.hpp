#pragma once

#include <cstddef>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "cfgrepair/grammar.hpp"
#include "cfgrepair/intersection.hpp"
#include "cfgrepair/session.hpp"

namespace httplib {
class Server;
}

namespace cfgrepair {

struct CliConfig {
    std::string subcommand;
    std::string grammar_path;
    std::optional<std::string> answers_path;
    bool interactive = false;
    std::optional<std::string> out_path;
    IntersectMode mode = IntersectMode::standard;
    std::size_t depth = 5;
    std::size_t cap = kDefaultTreeCap;
    std::optional<int> port;
    std::optional<std::string> assets_dir;
    bool dump_learning = false;
};

/// Exit status: 0 conflict-free, 1 conflicts, 2 error.
int cmd_analyze(const CliConfig& cfg, std::ostream& out, std::ostream& err);
/// Exit status: 0 repaired, 1 stalled / non-addressable / answer mismatch, 2 error.
int cmd_repair(const CliConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err);
/// Trees of the grammar's automaton up to cfg.depth, one JSON per line.
int cmd_enumerate(const CliConfig& cfg, std::ostream& out, std::ostream& err);
/// Blocks while serving; 2 when the port cannot be bound.
int cmd_serve(const CliConfig& cfg, std::ostream& err);

/// Text of an interactive prompt.
std::string render_prompt(const Prompt& p);

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";

    nlohmann::json json() const { return nlohmann::json::parse(body); }
};

/// One repair session behind the JSON API; all calls are serialized.
class ApiService {
public:
    explicit ApiService(Grammar g, IntersectMode mode = IntersectMode::standard);

    ApiResponse handle(const std::string& method, const std::string& path, const std::string& body = "");
    void register_routes(httplib::Server& server);

private:
    nlohmann::json session_json() const;
    ApiResponse dispatch(const std::string& method, const std::string& path, const std::string& body);

    Grammar initial_;
    IntersectMode mode_;
    RepairSession session_;
    std::mutex mutex_;
};

}  // namespace cfgrepair

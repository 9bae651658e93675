#include "cfgrepair/service.hpp"

#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include <httplib.h>

namespace cfgrepair {

namespace {

nlohmann::json class_to_json(const ConflictClass& c) {
    return {{"class", {c.first.name(), c.second.name()}}, {"kind", to_string(c.kind)}};
}

void print_residuals(const RepairSession& s, std::ostream& err) {
    for (auto& r : s.verdict_reasons()) err << "verdict reason: " << r << "\n";
    for (auto& r : s.residual_conflicts()) {
        auto j = conflict_to_json(r.conflict);
        j["reason"] = r.reason;
        err << "residual conflict: " << j.dump() << "\n";
    }
}

int read_choice(std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        auto b = line.find_first_not_of(" \t\r");
        if (b != std::string::npos) {
            auto tok = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
            if (tok == "0" || tok == "1") return tok == "1";
        }
        out << "(Type either 0 or 1.)\n";
    }
    return -1;
}

}  // namespace

std::string render_prompt(const Prompt& p) {
    std::ostringstream os;
    os << "Choose your preference!\n(Type either 0 or 1.)\n";
    os << "Option 0:\n" << tree_to_ascii(p.rendered0);
    os << "Option 1:\n" << tree_to_ascii(p.rendered1);
    return os.str();
}

int cmd_analyze(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        auto g = load_grammar(cfg.grammar_path);
        auto conflicts = detect_conflicts(build_lr1(g));
        for (auto& c : conflicts) out << conflict_to_json(c).dump() << "\n";
        auto cls = classify_conflicts(g, conflicts);
        for (auto& c : cls.addressable) out << class_to_json(c).dump() << "\n";
        for (auto& u : cls.non_addressable) {
            nlohmann::json j = {{"unaddressed", conflict_to_json(u.conflict)}, {"reason", u.reason}};
            out << j.dump() << "\n";
        }
        return conflicts.empty() ? 0 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_repair(const CliConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err) {
    if (!cfg.interactive && !cfg.answers_path) {
        err << "error: repair needs --answers or --interactive\n";
        return 2;
    }
    Grammar g;
    std::vector<int> answers;
    try {
        g = load_grammar(cfg.grammar_path);
        if (cfg.answers_path) answers = load_answers(*cfg.answers_path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    try {
        RepairSession s(g, cfg.mode);
        std::size_t k = 0;
        while (true) {
            auto next = s.next_prompt();
            if (next.kind == NextPrompt::Kind::done) break;
            if (next.kind == NextPrompt::Kind::round_complete) {
                auto round = s.round();
                s.step_repair();
                if (cfg.dump_learning) {
                    nlohmann::json j = {{"round", round},
                                        {"learning", precedence_state_to_json(s.last_learning())},
                                        {"a_r", automaton_to_json(s.last_a_r())},
                                        {"a_res", automaton_to_json(s.last_a_res())}};
                    err << j.dump() << "\n";
                }
                continue;
            }
            const auto& p = *next.prompt;
            int choice;
            if (cfg.interactive) {
                out << render_prompt(p);
                out.flush();
                choice = read_choice(in, out);
                if (choice < 0) throw AnswerMismatch("input ended before prompt " + std::to_string(p.id) + " was answered");
            } else {
                if (k >= answers.size())
                    throw AnswerMismatch("no answer left for prompt " + std::to_string(p.id) + " (" + p.cls.key() + ")");
                choice = answers[k++];
            }
            s.answer_prompt(p.id, choice);
        }
        if (k < answers.size())
            throw AnswerMismatch(std::to_string(answers.size() - k) + " surplus answer(s) after the session ended");
        if (cfg.out_path) {
            std::ofstream f(*cfg.out_path);
            if (!f) {
                err << "error: cannot write " << *cfg.out_path << "\n";
                return 2;
            }
            f << serialize_grammar(s.current());
        }
        out << report_to_json(make_report(s)).dump() << "\n";
        if (s.verdict() == Verdict::repaired) return 0;
        print_residuals(s, err);
        return 1;
    } catch (const AnswerMismatch& e) {
        err << "answer mismatch: " << e.what() << "\n";
        return 1;
    } catch (const ContradictionError& e) {
        err << "contradictory answer: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_enumerate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        auto g = load_grammar(cfg.grammar_path);
        for (auto& t : enumerate_trees(cfg_to_ta(g), cfg.depth, cfg.cap)) out << tree_to_json(t).dump() << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

ApiService::ApiService(Grammar g, IntersectMode mode) : initial_(g), mode_(mode), session_(std::move(g), mode) {}

nlohmann::json ApiService::session_json() const {
    return {{"round", session_.round()},
            {"verdict", to_string(session_.verdict())},
            {"pending", session_.pending().size()}};
}

ApiResponse ApiService::handle(const std::string& method, const std::string& path, const std::string& body) {
    std::lock_guard<std::mutex> lock(mutex_);
    try {
        return dispatch(method, path, body);
    } catch (const std::exception& e) {
        return {500, nlohmann::json{{"error", e.what()}}.dump()};
    }
}

ApiResponse ApiService::dispatch(const std::string& method, const std::string& path, const std::string& body) {
    auto ok = [](const nlohmann::json& j) { return ApiResponse{200, j.dump()}; };
    auto fail = [](int status, const std::string& msg) {
        return ApiResponse{status, nlohmann::json{{"error", msg}}.dump()};
    };
    static const std::regex answer_re("/api/prompts/([0-9]+)/answer");
    std::smatch m;

    if (method == "GET" && path == "/api/session") return ok(session_json());
    if (method == "GET" && path == "/api/prompts/next") {
        auto next = session_.next_prompt();
        switch (next.kind) {
            case NextPrompt::Kind::prompt: return ok({{"status", "prompt"}, {"prompt", prompt_to_json(*next.prompt)}});
            case NextPrompt::Kind::round_complete: return ok({{"status", "round-complete"}});
            case NextPrompt::Kind::done: return ok({{"status", "done"}, {"verdict", to_string(next.verdict)}});
        }
    }
    if (method == "POST" && std::regex_match(path, m, answer_re)) {
        nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("choice") || !j["choice"].is_number_integer())
            return fail(400, "body must be {\"choice\":0|1}");
        int choice = j["choice"].get<int>();
        if (choice != 0 && choice != 1) return fail(400, "body must be {\"choice\":0|1}");
        std::size_t id = std::stoul(m[1].str());
        if (id >= session_.prompts().size()) return fail(404, "unknown prompt id " + m[1].str());
        try {
            session_.answer_prompt(id, choice);
        } catch (const ContradictionError& e) {
            return fail(409, e.what());
        } catch (const SessionError& e) {
            return fail(409, e.what());
        }
        return ok(session_json());
    }
    if (method == "POST" && path == "/api/step") {
        try {
            session_.step_repair();
        } catch (const RoundIncomplete&) {
            return fail(409, "round-incomplete");
        }
        return ok(session_json());
    }
    if (method == "GET" && path == "/api/grammar/current")
        return {200, serialize_grammar(session_.current()), "text/plain"};
    if (method == "GET" && path == "/api/report") return ok(report_to_json(make_report(session_)));
    if (method == "POST" && path == "/api/reset") {
        session_ = RepairSession(initial_, mode_);
        return ok(session_json());
    }
    return fail(404, "no route for " + method + " " + path);
}

void ApiService::register_routes(httplib::Server& server) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        auto r = handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server.Get("/api/.*", forward);
    server.Post("/api/.*", forward);
}

int cmd_serve(const CliConfig& cfg, std::ostream& err) {
    if (!cfg.port) {
        err << "error: serve needs --port\n";
        return 2;
    }
    std::unique_ptr<ApiService> service;
    try {
        service = std::make_unique<ApiService>(load_grammar(cfg.grammar_path), cfg.mode);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    httplib::Server server;
    service->register_routes(server);
    if (cfg.assets_dir && !server.set_mount_point("/", *cfg.assets_dir)) {
        err << "error: cannot serve assets from " << *cfg.assets_dir << "\n";
        return 2;
    }
    if (!server.bind_to_port("127.0.0.1", *cfg.port)) {
        err << "error: cannot bind port " << *cfg.port << "\n";
        return 2;
    }
    err << "serving on http://127.0.0.1:" << *cfg.port << "\n";
    return server.listen_after_bind() ? 0 : 2;
}

}  // namespace cfgrepair

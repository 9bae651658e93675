#include <iostream>

#include <CLI11.hpp>

#include "cfgrepair/service.hpp"

using namespace cfgrepair;

int main(int argc, char** argv) {
    CLI::App app{"Interactive grammar disambiguation via tree automata"};
    app.require_subcommand(1);
    CliConfig cfg;
    std::string mode = "default";
    std::string answers, out, assets;
    int port = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--grammar", cfg.grammar_path, "grammar file (.cfg)")->required();
        sub->add_option("--intersect-mode", mode, "default, no_reach, no_dedup, no_eps or none");
    };
    auto* analyze = app.add_subcommand("analyze", "report LR(1) conflicts and their classes");
    add_common(analyze);

    auto* repair = app.add_subcommand("repair", "run the repair loop");
    add_common(repair);
    repair->add_option("--answers", answers, "file with one 0/1 per line");
    repair->add_flag("--interactive", cfg.interactive, "ask on standard input");
    repair->add_option("--out", out, "where to write the repaired grammar");
    repair->add_flag("--dump-learning", cfg.dump_learning, "print learned orders per round on stderr");

    auto* serve = app.add_subcommand("serve", "serve the JSON API");
    add_common(serve);
    serve->add_option("--port", port, "port to listen on")->required();
    serve->add_option("--assets", assets, "directory with UI assets");

    auto* enumerate = app.add_subcommand("enumerate", "print the bounded tree language as JSON lines");
    add_common(enumerate);
    enumerate->add_option("--depth", cfg.depth, "maximum tree depth");
    enumerate->add_option("--cap", cfg.cap, "maximum number of trees");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        cfg.mode = parse_intersect_mode(mode);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (!answers.empty()) cfg.answers_path = answers;
    if (!out.empty()) cfg.out_path = out;
    if (!assets.empty()) cfg.assets_dir = assets;

    if (*analyze) {
        cfg.subcommand = "analyze";
        return cmd_analyze(cfg, std::cout, std::cerr);
    }
    if (*repair) {
        cfg.subcommand = "repair";
        if (cfg.interactive == cfg.answers_path.has_value()) {
            std::cerr << "error: repair needs exactly one of --answers and --interactive\n";
            return 2;
        }
        return cmd_repair(cfg, std::cin, std::cout, std::cerr);
    }
    if (*serve) {
        cfg.subcommand = "serve";
        cfg.port = port;
        return cmd_serve(cfg, std::cerr);
    }
    cfg.subcommand = "enumerate";
    return cmd_enumerate(cfg, std::cout, std::cerr);
}

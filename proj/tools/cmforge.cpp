#include "cmforge/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

using namespace cmforge;

int main(int argc, char** argv) {
    CLI::App app{"cmforge: CM tori, Serre groups, Siegel decompositions and finite Bost-Connes models"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    std::string field, seed;
    app.add_option("--scenario", cfg.scenario, "builtin scenario name or scenario JSON file");
    app.add_option("--field", field, "field of the scenario, a builtin scenario (ambient field), or Q/qi/qzeta5 for BC commands");
    app.add_option("--modulus", cfg.modulus, "power-basis coordinates of the modulus m, comma separated");
    app.add_option("--bound", cfg.bound, "prime norm bound B (BC commands) or partial-sum bound (zeta)");
    app.add_option("--cap", cfg.cap, "valuation cap of the finite BC model");
    app.add_option("--beta", cfg.beta, "inverse temperature, integer or rational");
    app.add_option("--oracle", cfg.oracle, "modular function oracle: j or constant");
    app.add_option("--terms", cfg.terms, "q-series truncation order");
    app.add_option("--samples", cfg.samples, "randomized samples per property");
    app.add_option("--seed", seed, "seed for randomized checks (falls back to CMFORGE_SEED)");
    app.add_option("--out", cfg.out, "write the JSON report here instead of stdout");

    for (const auto& name : commands()) app.add_subcommand(name, "run " + name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    cfg.command = app.get_subcommands().front()->get_name();

    static const std::set<std::string> bc_commands{"bc-sim", "zeta", "states", "eval"};
    if (bc_commands.count(cfg.command)) {
        if (!field.empty()) cfg.bc_field = field;
    } else {
        cfg.field = field;
    }

    std::string seed_text = seed;
    cfg.seed_source = "flag";
    if (seed_text.empty()) {
        if (const char* env = std::getenv("CMFORGE_SEED")) {
            seed_text = env;
            cfg.seed_source = "CMFORGE_SEED";
        } else {
            cfg.seed_source = "default";
        }
    }
    if (!seed_text.empty()) {
        try {
            std::size_t used = 0;
            cfg.seed = std::stoul(seed_text, &used);
            if (used != seed_text.size()) throw std::invalid_argument(seed_text);
        } catch (const std::exception&) {
            std::cerr << "error: seed must be a nonnegative integer, got '" << seed_text << "'\n";
            return 2;
        }
    }

    RunResult r = run(cfg);
    std::string text = r.report.dump(2) + "\n";
    if (cfg.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(cfg.out);
        if (!out) {
            std::cerr << "error: cannot write " << cfg.out << "\n";
            return 2;
        }
        out << text;
    }
    if (r.report.contains("error")) std::cerr << "error: " << r.report["error"]["message"].get<std::string>() << "\n";
    for (const auto& c : r.report["checks"])
        if (c["status"] == "fail") std::cerr << "FAIL " << c["name"].get<std::string>() << ": " << c["detail"].get<std::string>() << "\n";
    return r.exit_code;
}

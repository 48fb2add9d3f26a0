#pragma once

#include "cmforge/arith.hpp"
#include "cmforge/checks.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace cmforge {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunConfig {
    std::string command;
    std::string scenario = "qi";  // builtin name or path to a scenario JSON file
    std::string field;            // field of the scenario, or a builtin scenario name (its ambient field)
    std::string bc_field = "qi";  // Q, qi or qzeta5 for bc-sim, zeta, states and eval
    std::string modulus = "3";    // power-basis coordinates of m, comma separated
    long bound = 10;
    int cap = 1;
    std::string beta = "2";
    std::string oracle = "j";
    int terms = 30;
    int samples = 100;
    unsigned long seed = 1;
    std::string seed_source = "default";
    std::string out;
};

struct RunResult {
    nlohmann::json report;
    int exit_code = 0;
};

std::vector<std::string> commands();
// Parses and validates the parameters; throws ConfigError.
void validate(const RunConfig& cfg);
// Exit 0 iff every check passes, 1 on a failed check or invariant violation, 2 on bad input.
RunResult run(const RunConfig& cfg);
nlohmann::json builtin_inventory();

std::vector<Int> parse_modulus(const std::string& s);
Rat parse_rational(const std::string& s);

// Report with timing fields removed, for reproducibility comparisons.
nlohmann::json strip_timings(nlohmann::json j);

}  // namespace cmforge

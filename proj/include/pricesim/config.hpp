#pragma once

#include <string>

#include "pricesim/market_sim.hpp"

namespace pricesim {

/// Parsed and validated experiment description: one scenario, the mechanism
/// base config, and output options.
struct ExperimentConfig {
    Scenario scenario;
    MechanismConfig mechanism;
    double theta_norm = 0.0; // scaling used when theta_star was sampled
    std::string output_dir = "out";
    bool emit_trace = false;
    int repeats = 1;
    bool epsilon_was_defaulted = false;
    bool lemma7_precondition_holds = true;
};

/// Parses a flat key = value document ('#' comments, blank lines allowed).
/// Unknown keys, missing required keys, type errors, and cross-field
/// inconsistencies all raise ConfigError naming the key.
ExperimentConfig parse_config(const std::string& text);

/// Canonical text form; parse(emit_config(c)) round-trips to an equal config.
std::string emit_config(const ExperimentConfig& config);

} // namespace pricesim

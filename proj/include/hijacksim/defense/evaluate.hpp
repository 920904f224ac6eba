// include/hijacksim/defense/evaluate.hpp
// Runs the same seeded trials with and without a defense and measures how
// much the defense takes away from the attacker.

#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hijacksim/harness/config.hpp"

namespace hijacksim::defense {

struct DefenseReport {
    int trials = 0;
    int base_successes = 0;
    int defended_successes = 0;
    // Defended trials that did not succeed, keyed by the phase they stopped in.
    std::map<std::string, int> defended_failure_phases;
    std::map<std::string, int> defended_outcomes;
    // Fraction of trials whose open-port and closed-port observation
    // sequences differ under the defended config.
    double distinguishability = 0.0;

    double base_rate() const { return trials ? static_cast<double>(base_successes) / trials : 0.0; }
    double defended_rate() const { return trials ? static_cast<double>(defended_successes) / trials : 0.0; }
    double delta() const { return defended_rate() - base_rate(); }
};

/// Victim-bound frame lengths seen after each of a fixed, seeded series of
/// probes against one client port, one string per probe window.
std::vector<std::string> observation_sequence(const harness::ScenarioConfig& cfg, std::uint16_t port,
                                              std::uint64_t probe_seed, int probes = 16);

/// Throws ConfigError if the two configs differ in anything but the defense
/// settings.
DefenseReport evaluate_defense(const harness::ScenarioConfig& base, const harness::ScenarioConfig& defended,
                               int trials, int threads = 0);

nlohmann::json to_json(const DefenseReport& r);

}  // namespace hijacksim::defense

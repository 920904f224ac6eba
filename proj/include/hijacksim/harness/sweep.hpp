// include/hijacksim/harness/sweep.hpp
// Parameter sweeps over one config key, and the empirical CDF used by the
// report command.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hijacksim/harness/config.hpp"
#include "hijacksim/harness/run.hpp"

namespace hijacksim::harness {

inline constexpr const char* kSweepHeader = "#hijacksim-sweep v1";
inline constexpr const char* kSweepColumns = "value,trials,successes,mean_virtual_time,mean_probes,mean_kbps";

struct TrialStats {
    attack::OutcomeKind outcome = attack::OutcomeKind::Failure;
    std::optional<attack::Phase> failure_phase;
    double virtual_time_s = 0.0;
    double probes = 0.0;
    double kbps = 0.0;
    nlohmann::json summary;  // only filled when summaries are kept
};

struct SweepCell {
    nlohmann::json value;
    int trials = 0;
    int successes = 0;
    double mean_virtual_time = 0.0;
    double mean_probes = 0.0;
    double mean_kbps = 0.0;
    std::vector<TrialStats> runs;

    double success_rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

struct SweepOptions {
    int threads = 0;  // 0 = hardware concurrency
    bool keep_summaries = false;
};

/// Runs every config on a worker pool; results come back in input order.
std::vector<TrialStats> run_trials(const std::vector<ScenarioConfig>& cfgs, SweepOptions opts = {});

/// Seed of trial i, shared by every cell so cells differ only in the swept value.
std::uint64_t trial_seed(std::uint64_t base_seed, int trial);

/// Throws ConfigError for an unknown axis, an invalid value, an empty value
/// list or trials < 1. Results do not depend on the thread count.
std::vector<SweepCell> run_sweep(const ScenarioConfig& base, const std::string& axis,
                                 const std::vector<nlohmann::json>& values, int trials, SweepOptions opts = {});

/// One trial's config: the axis override plus the trial seed and a derived id.
ScenarioConfig trial_config(const ScenarioConfig& base, const std::string& axis, const nlohmann::json& value,
                            int trial);

void write_sweep(std::ostream& os, const std::vector<SweepCell>& cells);

/// Points (value, fraction of samples <= value), ascending, ties collapsed.
/// Throws std::invalid_argument on empty input.
std::vector<std::pair<double, double>> ecdf(std::vector<double> values);

std::string format_value(const nlohmann::json& v);
std::string format_double(double v);

}  // namespace hijacksim::harness

#include "hijacksim/harness/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace hijacksim::harness {

using nlohmann::json;

std::uint64_t trial_seed(std::uint64_t base_seed, int trial) {
    return derive_seed(base_seed, 100, static_cast<std::uint64_t>(trial));
}

std::string format_value(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

ScenarioConfig trial_config(const ScenarioConfig& base, const std::string& axis, const json& value, int trial) {
    ScenarioConfig c = axis.empty() ? base : with_override(base, axis, value);
    c.seed = trial_seed(base.seed, trial);
    c.id = base.id + (axis.empty() ? "" : "-" + format_value(value)) + "-" + std::to_string(trial);
    return c;
}

std::vector<TrialStats> run_trials(const std::vector<ScenarioConfig>& cfgs, SweepOptions opts) {
    const std::size_t total = cfgs.size();
    std::vector<TrialStats> stats(total);
    if (total == 0) return stats;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total) return;
            try {
                const RunResult r = run_scenario(cfgs[i]);
                TrialStats& s = stats[i];
                s.outcome = r.report.outcome.kind;
                s.failure_phase = r.report.outcome.phase;
                s.virtual_time_s = to_seconds(r.report.virtual_time);
                s.probes = static_cast<double>(r.report.probes_sent);
                s.kbps = r.report.bandwidth_kbps();
                if (opts.keep_summaries) s.summary = summary_json(r);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
                next.store(total);
            }
        }
    };

    unsigned n = opts.threads > 0 ? static_cast<unsigned>(opts.threads) : std::thread::hardware_concurrency();
    n = std::clamp<unsigned>(n, 1, static_cast<unsigned>(std::min<std::size_t>(total, 256)));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return stats;
}

std::vector<SweepCell> run_sweep(const ScenarioConfig& base, const std::string& axis, const std::vector<json>& values,
                                 int trials, SweepOptions opts) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    if (trials < 1) throw ConfigError("sweep needs at least one trial");

    // Every config is resolved before the first run, so a bad axis fails early.
    std::vector<ScenarioConfig> runs;
    for (std::size_t c = 0; c < values.size(); ++c) {
        for (int t = 0; t < trials; ++t) runs.push_back(trial_config(base, axis, values[c], t));
    }
    const std::vector<TrialStats> stats = run_trials(runs, opts);

    std::vector<SweepCell> cells;
    for (std::size_t c = 0; c < values.size(); ++c) {
        SweepCell cell;
        cell.value = values[c];
        cell.trials = trials;
        for (int t = 0; t < trials; ++t) {
            const TrialStats& s = stats[c * static_cast<std::size_t>(trials) + static_cast<std::size_t>(t)];
            cell.successes += s.outcome == attack::OutcomeKind::Success ? 1 : 0;
            cell.mean_virtual_time += s.virtual_time_s;
            cell.mean_probes += s.probes;
            cell.mean_kbps += s.kbps;
            cell.runs.push_back(s);
        }
        cell.mean_virtual_time /= trials;
        cell.mean_probes /= trials;
        cell.mean_kbps /= trials;
        cells.push_back(std::move(cell));
    }
    return cells;
}

void write_sweep(std::ostream& os, const std::vector<SweepCell>& cells) {
    os << kSweepHeader << '\n' << kSweepColumns << '\n';
    for (const auto& c : cells) {
        os << format_value(c.value) << ',' << c.trials << ',' << c.successes << ',' << format_double(c.mean_virtual_time)
           << ',' << format_double(c.mean_probes) << ',' << format_double(c.mean_kbps) << '\n';
    }
}

std::vector<std::pair<double, double>> ecdf(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("ecdf of an empty sample");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
        out.emplace_back(values[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

}  // namespace hijacksim::harness

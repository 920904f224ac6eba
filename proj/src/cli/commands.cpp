#include "hijacksim/cli/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "hijacksim/defense/evaluate.hpp"
#include "hijacksim/harness/config.hpp"
#include "hijacksim/harness/run.hpp"
#include "hijacksim/harness/sweep.hpp"
#include "hijacksim/wifi/trace.hpp"

namespace hijacksim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

harness::ScenarioConfig load(const RunArgs& a) {
    if (a.config.empty()) throw ConfigError("no config file given (--config)");
    harness::ScenarioConfig cfg = harness::load_config(a.config);
    for (const auto& s : a.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
        cfg = harness::with_override(cfg, s.substr(0, eq), harness::parse_scalar(s.substr(eq + 1)));
    }
    if (a.seed) cfg.seed = *a.seed;
    cfg.validate();
    return cfg;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
}

fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

std::string run_files(const harness::RunResult& r, const fs::path& dir) {
    std::ostringstream summary;
    std::ostringstream trace;
    std::ostringstream log;
    harness::write_summary(summary, r);
    wifi::write_trace(trace, r.trace);
    harness::write_probe_log(log, r.probe_log);
    const std::string stem = r.config.id;
    write_file(dir / (stem + ".summary"), summary.str());
    write_file(dir / (stem + ".trace"), trace.str());
    write_file(dir / (stem + ".probelog"), log.str());
    return stem;
}

int outcome_code(attack::OutcomeKind k) { return k == attack::OutcomeKind::Success ? kExitOk : kExitAttackFailed; }

}  // namespace

std::string resolve_out_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kOutEnv); env && *env) return env;
    return "out";
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
    try {
        const auto cfg = load(a);
        const auto r = harness::run_scenario(cfg);
        const fs::path dir = prepare_dir(resolve_out_dir(a.out));
        const std::string stem = run_files(r, dir);
        out << stem << ": " << attack::to_string(r.report.outcome.kind);
        if (r.report.outcome.phase) out << " (" << attack::to_string(*r.report.outcome.phase) << ": " << r.report.outcome.reason << ")";
        out << ", " << r.report.probes_sent << " probes, " << harness::format_double(to_seconds(r.report.virtual_time))
            << " s\n";
        return outcome_code(r.report.outcome.kind);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    try {
        if (a.axis.empty()) throw ConfigError("no sweep axis given (--axis)");
        if (a.values.empty()) throw ConfigError("no sweep values given (--values)");
        const auto cfg = load(a.base);
        std::vector<json> values;
        for (const auto& v : a.values) values.push_back(harness::parse_scalar(v));
        const auto cells = harness::run_sweep(cfg, a.axis, values, a.trials, {a.threads, a.summaries});
        const fs::path dir = prepare_dir(resolve_out_dir(a.base.out));
        std::ostringstream table;
        harness::write_sweep(table, cells);
        write_file(dir / "sweep.csv", table.str());
        if (a.summaries) {
            const fs::path sdir = prepare_dir((dir / "summaries").string());
            for (const auto& c : cells) {
                for (const auto& run : c.runs) {
                    write_file(sdir / (run.summary["id"].get<std::string>() + ".summary"),
                               std::string(harness::kSummaryHeader) + "\n" + run.summary.dump(2) + "\n");
                }
            }
        }
        out << table.str();
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
    try {
        if (a.trace.empty()) throw ConfigError("no trace file given (--trace)");
        std::ifstream in(a.trace);
        if (!in) throw ConfigError("cannot read trace file " + a.trace);
        wifi::Trace trace = wifi::read_trace(in);
        if (!a.config.empty()) {
            const auto cfg = harness::load_config(a.config);
            if (!trace.meta.victim) trace.meta.victim = cfg.victim.mac;
            if (!trace.meta.attacker) trace.meta.attacker = cfg.attacker.mac;
            if (!trace.meta.observe_timeout) trace.meta.observe_timeout = cfg.resolved_inference().observe_timeout;
        }
        std::ostringstream res;
        harness::write_replay(res, harness::classify_windows(trace));
        if (a.out.empty()) {
            out << res.str();
        } else {
            const fs::path dir = prepare_dir(a.out);
            write_file(dir / "replay.csv", res.str());
        }
        return kExitOk;
    } catch (const wifi::TraceParseError& e) {
        err << "corrupt trace: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
    try {
        if (a.dir.empty() || !fs::is_directory(a.dir)) throw ConfigError("summary directory not found: " + a.dir);
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(a.dir)) {
            if (e.is_regular_file() && e.path().extension() == ".summary") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw ConfigError("no .summary files in " + a.dir);

        std::vector<double> times;
        std::map<std::string, double> phase_time;
        std::map<std::string, double> phase_probes;
        std::map<std::string, int> failures;
        for (const auto& f : files) {
            std::ifstream in(f);
            json s;
            try {
                s = harness::read_summary(in);
                times.push_back(s.at("virtual_time_s").get<double>());
                for (auto p : attack::kAllPhases) {
                    const std::string name(attack::to_string(p));
                    phase_time[name] += s.at("phase_times").at(name).get<double>();
                    phase_probes[name] += s.at("phase_probes").at(name).get<double>();
                }
                if (s.at("outcome") != "success" && s.at("failure_phase").is_string()) {
                    ++failures[s.at("failure_phase").get<std::string>()];
                }
            } catch (const json::exception& e) {
                throw ConfigError(f.string() + ": " + e.what());
            } catch (const ConfigError& e) {
                throw ConfigError(f.string() + ": " + e.what());
            }
        }
        const double n = static_cast<double>(files.size());
        std::ostringstream ecdf;
        ecdf << kEcdfHeader << "\nvirtual_time_s,fraction\n";
        for (auto [v, frac] : harness::ecdf(times)) {
            ecdf << harness::format_double(v) << ',' << harness::format_double(frac) << '\n';
        }
        std::ostringstream phases;
        phases << kPhasesHeader << "\nphase,mean_time_s,mean_probes,failures\n";
        for (auto p : attack::kAllPhases) {
            const std::string name(attack::to_string(p));
            phases << name << ',' << harness::format_double(phase_time[name] / n) << ','
                   << harness::format_double(phase_probes[name] / n) << ',' << failures[name] << '\n';
        }
        const fs::path dir = prepare_dir(a.out.empty() ? a.dir : a.out);
        write_file(dir / "ecdf.csv", ecdf.str());
        write_file(dir / "phases.csv", phases.str());
        out << files.size() << " summaries\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

int cmd_defend(const DefendArgs& a, std::ostream& out, std::ostream& err) {
    try {
        const auto base = load(a.base);
        RunArgs d = a.base;
        d.config = a.defended;
        const auto defended = load(d);
        const auto report = defense::evaluate_defense(base, defended, a.trials, a.threads);
        const std::string text = std::string(kDefenseHeader) + "\n" + defense::to_json(report).dump(2) + "\n";
        const fs::path dir = prepare_dir(resolve_out_dir(a.base.out));
        write_file(dir / "defense.summary", text);
        out << text;
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Wi-Fi frame-size TCP hijacking simulator"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "run one scenario");
    run_cmd->add_option("--config", run.config, "scenario JSON file");
    run_cmd->add_option("--seed", run.seed, "override the scenario seed");
    run_cmd->add_option("--out", run.out, "output directory");
    run_cmd->add_option("--set", run.sets, "override a config key, key.path=value");

    SweepArgs sweep;
    std::string values;
    auto* sweep_cmd = app.add_subcommand("sweep", "sweep one config key");
    sweep_cmd->add_option("--config", sweep.base.config, "scenario JSON file");
    sweep_cmd->add_option("--seed", sweep.base.seed, "base seed");
    sweep_cmd->add_option("--out", sweep.base.out, "output directory");
    sweep_cmd->add_option("--set", sweep.base.sets, "override a config key, key.path=value");
    sweep_cmd->add_option("--axis", sweep.axis, "dotted config key to sweep");
    sweep_cmd->add_option("--values", values, "comma-separated values");
    sweep_cmd->add_option("--trials", sweep.trials, "trials per value");
    sweep_cmd->add_option("--threads", sweep.threads, "worker threads (0 = all cores)");
    sweep_cmd->add_flag("--summaries", sweep.summaries, "also write one summary per trial");

    ReplayArgs replay;
    auto* replay_cmd = app.add_subcommand("replay", "classify a recorded trace");
    replay_cmd->add_option("--trace", replay.trace, "trace file");
    replay_cmd->add_option("--config", replay.config, "scenario JSON for missing trace metadata");
    replay_cmd->add_option("--out", replay.out, "output directory (default: stdout)");

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "aggregate summaries into tables");
    report_cmd->add_option("dir", report.dir, "directory of .summary files");
    report_cmd->add_option("--out", report.out, "output directory (default: the summary directory)");

    DefendArgs defend;
    auto* defend_cmd = app.add_subcommand("defend", "compare a scenario with a defended variant");
    defend_cmd->add_option("--config", defend.base.config, "undefended scenario JSON");
    defend_cmd->add_option("--defended", defend.defended, "defended scenario JSON");
    defend_cmd->add_option("--seed", defend.base.seed, "base seed");
    defend_cmd->add_option("--trials", defend.trials, "trials");
    defend_cmd->add_option("--threads", defend.threads, "worker threads (0 = all cores)");
    defend_cmd->add_option("--out", defend.base.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kExitUsage;
    }

    if (*run_cmd) return cmd_run(run, out, err);
    if (*sweep_cmd) {
        std::stringstream ss(values);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) sweep.values.push_back(item);
        }
        return cmd_sweep(sweep, out, err);
    }
    if (*replay_cmd) return cmd_replay(replay, out, err);
    if (*report_cmd) return cmd_report(report, out, err);
    if (*defend_cmd) return cmd_defend(defend, out, err);
    return kExitUsage;
}

}  // namespace hijacksim::cli

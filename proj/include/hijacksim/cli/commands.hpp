// include/hijacksim/cli/commands.hpp
// The hijacksim command line: run, sweep, replay, report and defend.
//
// Exit status: 0 attack succeeded (or the command completed), 2 attack
// failed or was inconclusive, 1 usage or configuration error. Output
// directory: --out, else $HIJACKSIM_OUT, else ./out.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hijacksim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitAttackFailed = 2;

inline constexpr const char* kOutEnv = "HIJACKSIM_OUT";
inline constexpr const char* kEcdfHeader = "#hijacksim-ecdf v1";
inline constexpr const char* kPhasesHeader = "#hijacksim-phases v1";
inline constexpr const char* kDefenseHeader = "#hijacksim-defense v1";

struct RunArgs {
    std::string config;
    std::vector<std::string> sets;  // key=value overrides
    std::optional<std::uint64_t> seed;
    std::string out;
};

struct SweepArgs {
    RunArgs base;
    std::string axis;
    std::vector<std::string> values;
    int trials = 1;
    int threads = 0;
    bool summaries = false;
};

struct ReplayArgs {
    std::string trace;
    std::string config;  // optional: fills in metadata the trace lacks
    std::string out;     // empty: write to stdout
};

struct ReportArgs {
    std::string dir;
    std::string out;  // empty: the summary directory
};

struct DefendArgs {
    RunArgs base;
    std::string defended;
    int trials = 10;
    int threads = 0;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err);
int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err);
int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err);
int cmd_defend(const DefendArgs& a, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// --out, else $HIJACKSIM_OUT, else "out".
std::string resolve_out_dir(const std::string& flag);

}  // namespace hijacksim::cli

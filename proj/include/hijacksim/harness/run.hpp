// include/hijacksim/harness/run.hpp
// One scenario end to end, and the files it leaves behind: the summary
// record, the frame trace and the probe log.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hijacksim/attack/attacker.hpp"
#include "hijacksim/harness/config.hpp"
#include "hijacksim/wifi/trace.hpp"

namespace hijacksim::harness {

inline constexpr const char* kSummaryHeader = "#hijacksim-summary v1";
inline constexpr const char* kProbeLogHeader = "#hijacksim-probelog v1";
inline constexpr const char* kProbeLogColumns = "t_us,phase,guess_kind,guess_value,ip_len,lengths,symbol";
inline constexpr const char* kReplayHeader = "#hijacksim-replay v1";
inline constexpr const char* kReplayColumns = "t_us,lengths,symbol";

/// What the sniffer saw after one forged segment.
struct WindowClass {
    VirtualTime t{0};
    std::string lengths;  // victim-bound Data lengths, ascending, '+'-joined; "-" if none
    std::string symbol;   // RST, ACK, SACK, NONE, MIXED or OTHER
};

struct ProbeLogEntry {
    VirtualTime t{0};
    attack::Phase phase = attack::Phase::Port;
    std::string guess_kind;
    std::uint32_t guess_value = 0;
    std::uint32_t ip_len = 0;
    WindowClass window;
};

struct GroundTruth {
    std::uint16_t port = 0;
    std::uint32_t rcv_nxt_initial = 0;
    std::uint32_t rcv_nxt_final = 0;
    std::uint32_t snd_una = 0;
    std::uint32_t snd_wnd = 0;
    bool connection_open = true;
    // Bytes the server accepted from the injection point onward.
    std::vector<std::uint8_t> stream_tail;
};

struct RunResult {
    ScenarioConfig config;
    attack::AttackReport report;
    wifi::Trace trace;
    std::vector<ProbeLogEntry> probe_log;
    GroundTruth truth;
};

/// Throws ConfigError before anything runs if cfg is invalid.
RunResult run_scenario(const ScenarioConfig& cfg);

/// Observation windows of the attacker's own sends in a trace: a window
/// opens at each send and closes observe_timeout later or at the next
/// later send, whichever comes first.
std::vector<WindowClass> classify_windows(const wifi::Trace& trace);

nlohmann::json summary_json(const RunResult& r);
void write_summary(std::ostream& os, const RunResult& r);
/// Throws ConfigError on a malformed summary.
nlohmann::json read_summary(std::istream& is);

void write_probe_log(std::ostream& os, const std::vector<ProbeLogEntry>& log);
void write_replay(std::ostream& os, const std::vector<WindowClass>& windows);

}  // namespace hijacksim::harness

// include/hijacksim/wifi/trace.hpp
// Line-oriented frame trace files, the replay input of the attacker.
//
//   #hijacksim-trace v1
//   #victim=02:00:00:00:00:01
//   #attacker=02:00:00:00:00:02
//   #observe_timeout_us=45000
//   t_us,channel,addr1,addr2,kind,len,amsdu
//   1200,1,02:00:00:00:00:01,02:00:00:00:ff:00,data,56,0

#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hijacksim/wifi/link.hpp"

namespace hijacksim::wifi {

inline constexpr const char* kTraceHeader = "#hijacksim-trace v1";
inline constexpr const char* kTraceColumns = "t_us,channel,addr1,addr2,kind,len,amsdu";

struct TraceMeta {
    std::optional<MacAddress> victim;
    std::optional<MacAddress> attacker;
    std::optional<VirtualTime> observe_timeout;
};

struct Trace {
    TraceMeta meta;
    std::vector<FrameObservation> frames;
};

class TraceParseError : public std::runtime_error {
public:
    TraceParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

void write_trace(std::ostream& os, const Trace& trace);
/// An empty stream is an empty trace. Throws TraceParseError naming the line.
Trace read_trace(std::istream& is);

}  // namespace hijacksim::wifi

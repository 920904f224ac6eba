#include "hijacksim/wifi/trace.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace hijacksim::wifi {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto end = line.find(sep, pos);
        out.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return out;
}

template <class T>
bool parse_num(std::string_view s, T& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

void write_trace(std::ostream& os, const Trace& trace) {
    os << kTraceHeader << '\n';
    if (trace.meta.victim) os << "#victim=" << trace.meta.victim->to_string() << '\n';
    if (trace.meta.attacker) os << "#attacker=" << trace.meta.attacker->to_string() << '\n';
    if (trace.meta.observe_timeout) os << "#observe_timeout_us=" << trace.meta.observe_timeout->count() << '\n';
    os << kTraceColumns << '\n';
    for (const auto& f : trace.frames) {
        os << f.t.count() << ',' << f.channel << ',' << f.addr1.to_string() << ',' << f.addr2.to_string() << ','
           << to_string(f.kind) << ',' << f.observable_len << ',' << (f.amsdu ? 1 : 0) << '\n';
    }
}

Trace read_trace(std::istream& is) {
    Trace trace;
    std::string line;
    std::size_t n = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kTraceHeader) throw TraceParseError(n, "missing trace header");
            header_seen = true;
            continue;
        }
        if (line == kTraceColumns) continue;
        if (line.front() == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(1, eq - 1);
            const std::string value = line.substr(eq + 1);
            try {
                if (key == "victim") {
                    trace.meta.victim = MacAddress::parse(value);
                } else if (key == "attacker") {
                    trace.meta.attacker = MacAddress::parse(value);
                } else if (key == "observe_timeout_us") {
                    std::int64_t us = 0;
                    if (!parse_num(value, us) || us <= 0) throw TraceParseError(n, "bad observe_timeout_us");
                    trace.meta.observe_timeout = VirtualTime{us};
                }
            } catch (const ConfigError& e) {
                throw TraceParseError(n, e.what());
            }
            continue;
        }
        const auto cols = split(line, ',');
        if (cols.size() != 7) throw TraceParseError(n, "expected 7 columns");
        FrameObservation f;
        std::int64_t t = 0;
        int amsdu = 0;
        if (!parse_num(cols[0], t) || t < 0) throw TraceParseError(n, "bad timestamp");
        if (!parse_num(cols[1], f.channel)) throw TraceParseError(n, "bad channel");
        if (!parse_num(cols[5], f.observable_len)) throw TraceParseError(n, "bad length");
        if (!parse_num(cols[6], amsdu) || (amsdu != 0 && amsdu != 1)) throw TraceParseError(n, "bad amsdu flag");
        try {
            f.addr1 = MacAddress::parse(cols[2]);
            f.addr2 = MacAddress::parse(cols[3]);
            f.kind = parse_frame_kind(cols[4]);
        } catch (const std::exception& e) {
            throw TraceParseError(n, e.what());
        }
        f.t = VirtualTime{t};
        f.amsdu = amsdu == 1;
        trace.frames.push_back(f);
    }
    return trace;
}

}  // namespace hijacksim::wifi

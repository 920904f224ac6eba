#include "hijacksim/harness/run.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "hijacksim/harness/simulation.hpp"

namespace hijacksim::harness {

using nlohmann::json;

namespace {

const attack::ResponseAlphabet kDefaultAlphabet{};
const MacAddress kBroadcast({0xff, 0xff, 0xff, 0xff, 0xff, 0xff});

std::string symbol_of(const wifi::FrameObservation& f) {
    if (f.amsdu) return "OTHER";
    if (f.observable_len == *kDefaultAlphabet.rst) return "RST";
    if (f.observable_len == *kDefaultAlphabet.ack) return "ACK";
    if (f.observable_len == *kDefaultAlphabet.sack) return "SACK";
    return "OTHER";
}

bool is_send(const wifi::FrameObservation& f, const MacAddress& attacker) {
    return f.kind == wifi::FrameKind::Data && f.addr2 == attacker && f.addr1 != kBroadcast;
}

std::vector<WindowClass> windows_at(const std::vector<wifi::FrameObservation>& frames, const MacAddress& victim,
                                    const std::vector<VirtualTime>& sends, VirtualTime timeout) {
    std::vector<WindowClass> out;
    out.reserve(sends.size());
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < sends.size(); ++i) {
        const VirtualTime t0 = sends[i];
        VirtualTime t1 = t0 + timeout;
        for (std::size_t j = i + 1; j < sends.size(); ++j) {
            if (sends[j] > t0) {
                t1 = std::min(t1, sends[j]);
                break;
            }
        }
        while (cursor < frames.size() && frames[cursor].t < t0) ++cursor;
        std::vector<std::uint32_t> lens;
        std::set<std::string> syms;
        for (std::size_t k = cursor; k < frames.size() && frames[k].t < t1; ++k) {
            const auto& f = frames[k];
            if (f.kind != wifi::FrameKind::Data || f.addr1 != victim) continue;
            lens.push_back(f.observable_len);
            syms.insert(symbol_of(f));
        }
        std::sort(lens.begin(), lens.end());
        WindowClass w;
        w.t = t0;
        if (lens.empty()) {
            w.lengths = "-";
        } else {
            for (std::size_t k = 0; k < lens.size(); ++k) {
                if (k) w.lengths += '+';
                w.lengths += std::to_string(lens[k]);
            }
        }
        if (syms.empty()) {
            w.symbol = "NONE";
        } else if (syms.size() == 1) {
            w.symbol = *syms.begin();
        } else {
            w.symbol = "MIXED";
        }
        out.push_back(std::move(w));
    }
    return out;
}

json opt_json(const std::optional<std::uint32_t>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::vector<WindowClass> classify_windows(const wifi::Trace& trace) {
    if (trace.frames.empty()) return {};
    if (!trace.meta.victim || !trace.meta.attacker || !trace.meta.observe_timeout) {
        throw ConfigError("trace lacks victim, attacker or observe_timeout metadata");
    }
    std::vector<VirtualTime> sends;
    for (const auto& f : trace.frames) {
        if (is_send(f, *trace.meta.attacker)) sends.push_back(f.t);
    }
    return windows_at(trace.frames, *trace.meta.victim, sends, *trace.meta.observe_timeout);
}

RunResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    RunResult r;
    r.config = cfg;
    Simulation sim(cfg);
    const auto inference = cfg.resolved_inference();

    attack::AttackTarget target;
    target.server_ip = cfg.server.ip;
    target.server_port = cfg.server.port;
    if (cfg.victim_ip_known) target.victim_ip = cfg.victim.ip;
    target.space = cfg.space();
    attack::Attacker attacker(sim, inference, target, derive_seed(cfg.seed, 3));
    r.report = attacker.full_attack(cfg.action);

    const auto& conn = sim.connection();
    const auto sp = cfg.space();
    r.truth.port = sim.truth().true_port;
    r.truth.rcv_nxt_initial = sim.truth().state.rcv_nxt;
    r.truth.rcv_nxt_final = conn.rcv_nxt;
    r.truth.snd_una = conn.snd_una;
    r.truth.snd_wnd = conn.snd_wnd;
    r.truth.connection_open = conn.open;
    if (r.report.rcv_nxt_found) {
        const std::uint64_t off = sp.distance(conn.stream_origin, *r.report.rcv_nxt_found);
        if (off < conn.stream.size()) {
            r.truth.stream_tail.assign(conn.stream.begin() + static_cast<std::ptrdiff_t>(off), conn.stream.end());
        }
    }

    // The attacker only sees frame sizes; the endpoint has the final word.
    auto& out = r.report.outcome;
    if (out.kind == attack::OutcomeKind::Success && r.report.phase_probes[attack::Phase::Action] > 0) {
        bool done = true;
        if (cfg.action.kind == attack::ActionKind::Reset) {
            done = !conn.open;
        } else if (!cfg.action.payload.empty()) {
            const auto& p = cfg.action.payload;
            const auto& tail = r.truth.stream_tail;
            done = tail.size() >= p.size() && std::equal(p.begin(), p.end(), tail.begin());
        }
        if (!done) out = {attack::OutcomeKind::Failure, attack::Phase::Action, "endpoint state unchanged"};
    }

    r.trace.meta.victim = cfg.victim.mac;
    r.trace.meta.attacker = cfg.attacker.mac;
    r.trace.meta.observe_timeout = inference.observe_timeout;
    r.trace.frames = sim.trace();

    std::vector<VirtualTime> sends;
    for (const auto& s : sim.sent()) sends.push_back(s.t);
    const auto windows = windows_at(r.trace.frames, cfg.victim.mac, sends, inference.observe_timeout);
    for (std::size_t i = 0; i < sim.sent().size(); ++i) {
        const auto& s = sim.sent()[i];
        r.probe_log.push_back({s.t, s.tag.phase, s.tag.guess_kind, s.tag.guess_value, s.ip_len, windows[i]});
    }
    return r;
}

json summary_json(const RunResult& r) {
    const auto& rep = r.report;
    json j;
    j["id"] = r.config.id;
    j["seed"] = r.config.seed;
    j["outcome"] = std::string(attack::to_string(rep.outcome.kind));
    j["failure_phase"] = rep.outcome.phase ? json(std::string(attack::to_string(*rep.outcome.phase))) : json(nullptr);
    j["reason"] = rep.outcome.reason;
    json times = json::object();
    json probes = json::object();
    for (auto p : attack::kAllPhases) {
        const std::string name(attack::to_string(p));
        auto t = rep.phase_times.find(p);
        times[name] = t == rep.phase_times.end() ? 0.0 : to_seconds(t->second);
        auto n = rep.phase_probes.find(p);
        probes[name] = n == rep.phase_probes.end() ? 0 : n->second;
    }
    j["phase_times"] = times;
    j["phase_probes"] = probes;
    j["probes_sent"] = rep.probes_sent;
    j["bytes_sent"] = rep.bytes_sent;
    j["virtual_time_s"] = to_seconds(rep.virtual_time);
    j["bandwidth_kbps"] = rep.bandwidth_kbps();
    j["port_method"] = std::string(attack::to_string(rep.port_method_used));
    j["reinferences"] = rep.reinferences;
    j["action"] = r.config.action.kind == attack::ActionKind::Reset ? "reset" : "inject";
    j["inferred"] = {{"victim_mac", rep.victim ? json(rep.victim->mac.to_string()) : json(nullptr)},
                     {"victim_ip", rep.victim ? json(rep.victim->ip.to_string()) : json(nullptr)},
                     {"port", rep.port_found ? json(*rep.port_found) : json(nullptr)},
                     {"rcv_nxt", opt_json(rep.rcv_nxt_found)},
                     {"ack_lower", opt_json(rep.ack_lower_found)},
                     {"ack_usable", opt_json(rep.ack_usable)}};
    j["truth"] = {{"victim_mac", r.config.victim.mac.to_string()},
                  {"victim_ip", r.config.victim.ip.to_string()},
                  {"port", r.truth.port},
                  {"rcv_nxt_initial", r.truth.rcv_nxt_initial},
                  {"rcv_nxt_final", r.truth.rcv_nxt_final},
                  {"snd_una", r.truth.snd_una},
                  {"snd_wnd", r.truth.snd_wnd},
                  {"connection_open", r.truth.connection_open}};
    return j;
}

void write_summary(std::ostream& os, const RunResult& r) {
    os << kSummaryHeader << '\n' << summary_json(r).dump(2) << '\n';
}

json read_summary(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header != kSummaryHeader) throw ConfigError("missing summary header");
    std::stringstream rest;
    rest << is.rdbuf();
    try {
        return json::parse(rest.str());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed summary: ") + e.what());
    }
}

void write_probe_log(std::ostream& os, const std::vector<ProbeLogEntry>& log) {
    os << kProbeLogHeader << '\n' << kProbeLogColumns << '\n';
    for (const auto& e : log) {
        os << e.t.count() << ',' << attack::to_string(e.phase) << ',' << e.guess_kind << ',' << e.guess_value << ','
           << e.ip_len << ',' << e.window.lengths << ',' << e.window.symbol << '\n';
    }
}

void write_replay(std::ostream& os, const std::vector<WindowClass>& windows) {
    os << kReplayHeader << '\n' << kReplayColumns << '\n';
    for (const auto& w : windows) os << w.t.count() << ',' << w.lengths << ',' << w.symbol << '\n';
}

}  // namespace hijacksim::harness

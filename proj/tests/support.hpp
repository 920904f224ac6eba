// Shared helpers for unit and acceptance tests: brute-force region oracles
// and a ready-to-probe simulated attacker.

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "hijacksim/attack/attacker.hpp"
#include "hijacksim/harness/config.hpp"
#include "hijacksim/harness/simulation.hpp"
#include "hijacksim/tcp/endpoint.hpp"

namespace hijacksim::testing {

// Expected response, computed by walking the number line one residue at a
// time from the window definitions rather than by interval arithmetic.
class RegionOracle {
public:
    explicit RegionOracle(const tcp::ServerConnState& s) : s_(s), n_(s.space.size()) {
        const std::uint64_t half = n_ / 2;
        ack_.assign(n_, 'I');
        std::uint64_t inflight = (std::uint64_t{s.snd_nxt} + n_ - s.snd_una) % n_;
        // SND.UNA - SND.WND < ack <= SND.NXT
        for (std::uint64_t k = 1; k <= s.snd_wnd + inflight; ++k) ack_[(s.snd_una + n_ - s.snd_wnd + k) % n_] = 'A';
        // SND.UNA - 2^(n-1) < ack <= SND.UNA - SND.WND
        for (std::uint64_t k = 1; k + s.snd_wnd <= half; ++k) {
            const std::uint64_t a = (s.snd_una + n_ - half + k) % n_;
            if (ack_[a] == 'I') ack_[a] = 'C';
        }
    }

    char ack(std::uint32_t a) const { return ack_[a]; }

    // 'O' old duplicate, 'A' acceptable, 'B' beyond, 'U' unreachable.
    char seq(std::uint32_t q, std::uint32_t len) const {
        const std::uint64_t half = n_ / 2;
        // Does any byte of [q, q + len) fall in [rcv_nxt, rcv_nxt + rcv_wnd]?
        for (std::uint64_t i = 0; i < len; ++i) {
            const std::uint64_t off = (q + i + n_ - s_.rcv_nxt) % n_;
            if (off <= s_.rcv_wnd) return 'A';
        }
        const std::uint64_t ahead = (q + n_ - s_.rcv_nxt) % n_;
        if (ahead == half) return 'U';
        if (ahead > half) return 'O';  // every byte is behind RCV.NXT
        return 'B';
    }

    tcp::TcpResponse respond(const tcp::SegmentMeta& seg) const {
        using R = tcp::TcpResponse;
        if (!s_.open) return seg.flags.rst ? R::Silence : R::Rst;
        if (seg.flags.syn) return R::ChallengeAck;
        if (seg.flags.rst) {
            if (seg.seq == s_.rcv_nxt) return R::ConnectionReset;
            return seq(seg.seq, 1) == 'A' ? R::ChallengeAck : R::Silence;
        }
        if (seg.payload_len == 0) {
            const std::uint64_t off = (seg.seq + n_ - s_.rcv_nxt) % n_;
            if (off > s_.rcv_wnd) return R::DupAck;
            return seg.flags.ack && ack(seg.ack) == 'C' ? R::ChallengeAck : R::Silence;
        }
        switch (seq(seg.seq, seg.payload_len)) {
            case 'O': return s_.options.sack_enabled ? R::SackAck : R::DupAck;
            case 'B':
            case 'U': return R::DupAck;
            default: break;
        }
        if (!seg.flags.ack) return R::Silence;
        switch (ack(seg.ack)) {
            case 'C': return R::ChallengeAck;
            case 'A': return R::AcceptData;
            default: return R::Silence;
        }
    }

private:
    tcp::ServerConnState s_;
    std::uint64_t n_;
    std::vector<char> ack_;
};

inline tcp::ServerConnState random_state(tcp::SeqSpace sp, Rng& rng) {
    tcp::ServerConnState s;
    s.space = sp;
    s.tuple = {Ipv4Address::parse("192.168.1.7"), 40000, Ipv4Address::parse("93.184.216.34"), 22};
    s.rcv_nxt = sp.wrap(rng.next());
    s.rcv_wnd = static_cast<std::uint32_t>(rng.uniform_int(1, sp.quarter() - 1));
    s.snd_una = sp.wrap(rng.next());
    s.snd_nxt = sp.add(s.snd_una, rng.uniform_int(0, sp.quarter()));
    s.snd_wnd = static_cast<std::uint32_t>(rng.uniform_int(1, sp.quarter() - 1));
    return s;
}

// Lossless, instant-contention scenario narrowed for fast tests.
inline harness::ScenarioConfig quiet_config(std::uint64_t seed = 1) {
    harness::ScenarioConfig c;
    c.seed = seed;
    c.channel.contention_lo = VirtualTime{0};
    c.channel.contention_hi = from_millis(5);
    c.inference.flood_listen_s = 0.0;
    return c;
}

// A simulation with the attacker already pointed at the victim.
struct Rig {
    harness::ScenarioConfig cfg;
    std::unique_ptr<harness::Simulation> sim;
    std::unique_ptr<attack::Attacker> atk;

    explicit Rig(harness::ScenarioConfig c) : cfg(std::move(c)) {
        sim = std::make_unique<harness::Simulation>(cfg);
        attack::AttackTarget t;
        t.server_ip = cfg.server.ip;
        t.server_port = cfg.server.port;
        t.victim_ip = cfg.victim.ip;
        t.space = cfg.space();
        atk = std::make_unique<attack::Attacker>(*sim, cfg.resolved_inference(), t, derive_seed(cfg.seed, 3));
        atk->set_victim({cfg.victim.mac, cfg.victim.ip, cfg.effective_victim_channel()});
    }

    const tcp::ServerConnState& conn() const { return sim->connection(); }
    tcp::FourTuple tuple() const { return conn().tuple; }
};

}  // namespace hijacksim::testing

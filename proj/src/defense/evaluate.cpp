#include "hijacksim/defense/evaluate.hpp"

#include <algorithm>

#include "hijacksim/harness/simulation.hpp"
#include "hijacksim/harness/sweep.hpp"

namespace hijacksim::defense {

using nlohmann::json;

std::vector<std::string> observation_sequence(const harness::ScenarioConfig& cfg, std::uint16_t port,
                                              std::uint64_t probe_seed, int probes) {
    harness::Simulation sim(cfg);
    const auto sp = cfg.space();
    const auto timeout = cfg.resolved_inference().observe_timeout;
    sim.tune(cfg.effective_victim_channel());
    Rng rng(probe_seed);
    std::vector<std::string> out;
    for (int i = 0; i < probes; ++i) {
        tcp::SegmentMeta seg;
        seg.tuple = {cfg.victim.ip, port, cfg.server.ip, cfg.server.port};
        seg.flags = i % 2 == 0 ? tcp::TcpFlags::syn_ack() : tcp::TcpFlags::data();
        seg.payload_len = i % 2 == 0 ? 0 : 1;
        seg.seq = sp.wrap(rng.next());
        seg.ack = sp.wrap(rng.next());
        sim.send(seg, {attack::Phase::Port, "distinguish", port});
        std::vector<std::uint32_t> lens;
        while (auto f = sim.next_frame(sim.now() + timeout)) {
            if (f->kind == wifi::FrameKind::Data && f->addr1 == cfg.victim.mac) lens.push_back(f->observable_len);
        }
        std::sort(lens.begin(), lens.end());
        std::string s;
        for (auto l : lens) s += (s.empty() ? "" : "+") + std::to_string(l);
        out.push_back(s.empty() ? "-" : s);
    }
    return out;
}

DefenseReport evaluate_defense(const harness::ScenarioConfig& base, const harness::ScenarioConfig& defended,
                               int trials, int threads) {
    if (trials < 1) throw ConfigError("evaluate_defense needs at least one trial");
    {
        harness::ScenarioConfig a = base;
        a.padding = defended.padding;
        a.uniform_response = defended.uniform_response;
        a.inference.calibrate_alphabet = defended.inference.calibrate_alphabet;
        if (harness::to_json(a) != harness::to_json(defended)) {
            throw ConfigError("base and defended scenarios differ outside the defense settings");
        }
    }
    std::vector<harness::ScenarioConfig> runs;
    for (int t = 0; t < trials; ++t) runs.push_back(harness::trial_config(base, "", nullptr, t));
    for (int t = 0; t < trials; ++t) runs.push_back(harness::trial_config(defended, "", nullptr, t));
    const auto stats = harness::run_trials(runs, {threads, false});

    DefenseReport r;
    r.trials = trials;
    int differing = 0;
    for (int t = 0; t < trials; ++t) {
        const auto& b = stats[static_cast<std::size_t>(t)];
        const auto& d = stats[static_cast<std::size_t>(trials + t)];
        r.base_successes += b.outcome == attack::OutcomeKind::Success;
        r.defended_successes += d.outcome == attack::OutcomeKind::Success;
        ++r.defended_outcomes[std::string(attack::to_string(d.outcome))];
        if (d.outcome != attack::OutcomeKind::Success) {
            ++r.defended_failure_phases[d.failure_phase ? std::string(attack::to_string(*d.failure_phase)) : "none"];
        }

        const harness::ScenarioConfig& cfg = runs[static_cast<std::size_t>(trials + t)];
        const auto in = cfg.resolved_inference();
        const std::uint16_t open = harness::materialize(cfg).true_port;
        const auto closed = static_cast<std::uint16_t>(open < in.port_hi ? open + 1 : open - 1);
        const std::uint64_t probe_seed = derive_seed(cfg.seed, 6);
        if (observation_sequence(cfg, open, probe_seed) != observation_sequence(cfg, closed, probe_seed)) ++differing;
    }
    r.distinguishability = static_cast<double>(differing) / trials;
    return r;
}

json to_json(const DefenseReport& r) {
    return {{"trials", r.trials},
            {"base_successes", r.base_successes},
            {"defended_successes", r.defended_successes},
            {"base_success_rate", r.base_rate()},
            {"defended_success_rate", r.defended_rate()},
            {"success_rate_delta", r.delta()},
            {"defended_failure_phases", r.defended_failure_phases},
            {"defended_outcomes", r.defended_outcomes},
            {"distinguishability", r.distinguishability}};
}

}  // namespace hijacksim::defense

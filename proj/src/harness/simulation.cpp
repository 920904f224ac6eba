#include "hijacksim/harness/simulation.hpp"

#include <algorithm>

namespace hijacksim::harness {

namespace {

constexpr VirtualTime kArpSweepTime = from_millis(500);

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::uint64_t padding_seed(const ScenarioConfig& cfg) {
    const auto* r = std::get_if<defense::RandomPadding>(&cfg.padding);
    return derive_seed(cfg.seed, 4, r ? r->seed : 0);
}

}  // namespace

Simulation::Simulation(const ScenarioConfig& cfg)
    : cfg_(cfg),
      truth_((cfg.validate(), materialize(cfg))),
      enc_(cfg.encapsulation()),
      air_(cfg.channel),
      victim_channel_(cfg.effective_victim_channel()),
      tuned_(cfg.channel.channels.front()),
      limit_(from_seconds(cfg.duration_limit_s)),
      endpoint_(cfg.space()),
      channel_rng_(derive_seed(cfg.seed, 2)),
      padding_rng_(padding_seed(cfg)),
      arp_rng_(derive_seed(cfg.seed, 5)) {
    endpoint_.open(truth_.state);
    if (auto t = background_time(0)) schedule(*t, BackgroundTick{0});
    if (cfg_.live_traffic) {
        client_snd_nxt_ = truth_.state.rcv_nxt;
        schedule(from_seconds(cfg_.live_traffic->segment_bytes / cfg_.live_traffic->bytes_per_s), LiveTick{});
    }
}

std::optional<VirtualTime> Simulation::background_time(std::uint64_t index) const {
    const auto& bg = cfg_.channel.background;
    if (!bg) return std::nullopt;
    if (bg->mode == wifi::BackgroundMode::Rate) {
        if (bg->rate_pps <= 0.0) return std::nullopt;
        return from_seconds(static_cast<double>(index) / bg->rate_pps);
    }
    return from_seconds(static_cast<double>(index + 1) * bg->interval_s);
}

std::optional<MacAddress> Simulation::mac_of(const Ipv4Address& ip) const {
    if (ip == cfg_.victim.ip) return cfg_.victim.mac;
    if (ip == cfg_.attacker.ip) return cfg_.attacker.mac;
    for (const auto& h : cfg_.other_supplicants) {
        if (h.ip == ip) return h.mac;
    }
    return std::nullopt;
}

void Simulation::run_until(VirtualTime t) {
    while (auto nt = queue_.next_time()) {
        if (*nt > t) break;
        auto e = queue_.pop();
        now_ = std::max(now_, e.t);
        dispatch(e.t, e.payload);
    }
    now_ = std::max(now_, t);
}

void Simulation::dispatch(VirtualTime t, Event& e) {
    std::visit(overloaded{
                   [&](ServerArrival& a) { on_server(t, a); },
                   [&](Downlink& d) { on_downlink(t, d); },
                   [&](AmsduFlush&) { on_flush(t); },
                   [&](OnAir& o) {
                       if (o.captured && o.frame.channel == tuned_) {
                           trace_.push_back(o.frame);
                           ready_.push_back(o.frame);
                       }
                   },
                   [&](BackgroundTick& b) { on_background(t, b.index); },
                   [&](LiveTick&) { on_live(t); },
               },
               e);
}

void Simulation::on_server(VirtualTime t, const ServerArrival& a) {
    const tcp::TcpResponse r = endpoint_.handle(a.seg);
    const VirtualTime at_ap = t + cfg_.channel.rtt / 2;
    if (a.from_victim) {
        // Delayed ACK: one pure ACK per two accepted segments.
        if (r == tcp::TcpResponse::AcceptData && ++unacked_segments_ >= 2) {
            unacked_segments_ = 0;
            schedule(at_ap, Downlink{tcp::response_ip_length(r, cfg_.server.options), cfg_.victim.mac, 0});
            return;
        }
        if (r == tcp::TcpResponse::AcceptData) return;
    }
    const auto ip_len = defense::emitted_ip_length(r, cfg_.server.options, cfg_.uniform_response);
    if (!ip_len) return;
    const auto dst = mac_of(a.seg.tuple.client_ip);
    if (!dst) return;
    schedule(at_ap, Downlink{*ip_len, *dst, 0});
}

void Simulation::on_downlink(VirtualTime t, const Downlink& d) {
    const std::uint32_t len = wifi::encapsulate(d.ip_len, enc_, &padding_rng_);
    const int channel = d.receiver == cfg_.victim.mac ? victim_channel_ : cfg_.channel.channels.front();
    if (air_.amsdu_enabled) {
        pending_.push_back({len, d.receiver, cfg_.bssid, d.tid, channel, t});
        schedule(t + air_.amsdu.max_delay, AmsduFlush{});
        return;
    }
    air(t, {d.receiver, cfg_.bssid, channel, len, t, wifi::FrameKind::Data, false});
}

void Simulation::on_flush(VirtualTime t) {
    if (pending_.empty()) return;
    VirtualTime last{0};
    for (const auto& p : pending_) last = std::max(last, p.t);
    // A later member extends the chain; its own flush event handles it.
    if (last + air_.amsdu.max_delay > t) return;
    auto frames = wifi::aggregate_amsdu(pending_, air_.amsdu, t);
    pending_.clear();
    for (auto& f : frames) air(f.t, f);
}

void Simulation::air(VirtualTime t, wifi::FrameObservation frame) {
    const bool victim_frame = frame.addr1 == cfg_.victim.mac || frame.addr2 == cfg_.victim.mac;
    if (victim_frame && t < victim_silent_until_) t = victim_silent_until_;
    frame.t = t;
    const auto delivered = wifi::transmit(frame, air_, channel_rng_);
    bool captured = delivered.has_value();
    VirtualTime at = t;
    if (delivered) {
        at = *delivered;
    } else {
        at = t + VirtualTime{static_cast<std::int64_t>(
                     channel_rng_.uniform_int(air_.contention_lo.count(), air_.contention_hi.count()))};
    }
    for (int i = 1; i < cfg_.inference.sniffer_count; ++i) {
        const bool got = !channel_rng_.bernoulli(air_.loss_prob);
        captured = captured || got;
    }
    if (!captured) return;
    frame.t = at;
    schedule(at, OnAir{frame, true});
}

void Simulation::on_background(VirtualTime t, std::uint64_t index) {
    const auto& bg = *cfg_.channel.background;
    on_downlink(t, Downlink{bg.packet_ip_len, cfg_.victim.mac, bg.tid});
    if (auto next = background_time(index + 1)) schedule(std::max(*next, t), BackgroundTick{index + 1});
}

void Simulation::on_live(VirtualTime t) {
    const auto& lt = *cfg_.live_traffic;
    const tcp::ServerConnState& conn = connection();
    if (!conn.open) return;
    const VirtualTime period = from_seconds(lt.segment_bytes / lt.bytes_per_s);
    if (t < victim_silent_until_) {
        schedule(victim_silent_until_, LiveTick{});
        return;
    }
    tcp::SegmentMeta seg;
    seg.tuple = truth_.state.tuple;
    seg.flags = tcp::TcpFlags::data();
    seg.seq = client_snd_nxt_;
    seg.ack = conn.snd_nxt;
    seg.payload_len = lt.segment_bytes;
    client_snd_nxt_ = conn.space.add(client_snd_nxt_, lt.segment_bytes);

    const std::uint32_t ts = cfg_.server.options.timestamps_enabled ? 12 : 0;
    air(t, {cfg_.bssid, cfg_.victim.mac, victim_channel_, wifi::encapsulate(40 + ts + lt.segment_bytes, enc_, &padding_rng_),
            t, wifi::FrameKind::Data, false});
    schedule(t + cfg_.channel.rtt / 2, ServerArrival{seg, true});
    schedule(t + period, LiveTick{});
}

std::vector<attack::HostInfo> Simulation::arp_sweep() {
    const VirtualTime end = now_ + kArpSweepTime;
    std::vector<attack::HostInfo> hosts;
    auto heard = [&]() { return !arp_rng_.bernoulli(cfg_.channel.loss_prob); };
    if (heard()) hosts.push_back({cfg_.victim.mac, cfg_.victim.ip, victim_channel_});
    for (const auto& h : cfg_.other_supplicants) {
        if (heard()) hosts.push_back({h.mac, h.ip, cfg_.channel.channels.front()});
    }
    run_until(std::min(end, limit_));
    if (end > limit_) throw attack::DeadlineExceeded();
    // Replies from other supplicants never reach us through an isolating AP.
    if (!wifi::relay_allowed(true, true, cfg_.channel)) return {};
    return hosts;
}

void Simulation::tune(int channel) {
    tuned_ = channel;
    ready_.clear();
    if (cfg_.channel.eviction.enabled && !evicted_) {
        const auto effect = wifi::evict_supplicant(cfg_.channel);
        air_.contention_lo = effect.channel.contention_lo;
        air_.contention_hi = effect.channel.contention_hi;
        victim_silent_until_ = now_ + effect.gap;
        evicted_ = true;
    }
}

void Simulation::send(const tcp::SegmentMeta& seg, const attack::ProbeTag& tag) {
    if (now_ >= limit_) throw attack::DeadlineExceeded();
    const std::uint32_t ip_len = tcp::segment_ip_length(seg);
    sent_.push_back({now_, tag, ip_len});
    const wifi::FrameObservation up{cfg_.bssid,  cfg_.attacker.mac, victim_channel_, wifi::encapsulate(ip_len, enc_, &padding_rng_),
                                    now_,        wifi::FrameKind::Data, false};
    if (tuned_ == victim_channel_) trace_.push_back(up);
    schedule(now_ + cfg_.channel.rtt / 2, ServerArrival{seg, false});
}

std::optional<wifi::FrameObservation> Simulation::next_frame(VirtualTime deadline) {
    const VirtualTime end = std::min(deadline, limit_);
    while (true) {
        if (!ready_.empty()) {
            wifi::FrameObservation f = ready_.front();
            ready_.pop_front();
            return f;
        }
        const auto nt = queue_.next_time();
        if (!nt || *nt > end) break;
        auto e = queue_.pop();
        now_ = std::max(now_, e.t);
        dispatch(e.t, e.payload);
    }
    now_ = std::max(now_, end);
    if (deadline > limit_) throw attack::DeadlineExceeded();
    return std::nullopt;
}

}  // namespace hijacksim::harness

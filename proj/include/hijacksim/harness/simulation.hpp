// include/hijacksim/harness/simulation.hpp
// The simulated WLAN, AP and server behind the attacker's ProbeChannel.
//
// Forged segments reach the server rtt/2 after they are sent. Whatever the
// server answers reaches the AP another rtt/2 later, is encapsulated (and
// possibly aggregated) there and goes on air after a contention delay. The
// sniffer captures frames on its tuned channel, each monitor interface
// missing a frame with probability loss_prob.

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <variant>
#include <vector>

#include "hijacksim/attack/probe_channel.hpp"
#include "hijacksim/harness/config.hpp"
#include "hijacksim/harness/event_queue.hpp"
#include "hijacksim/tcp/endpoint.hpp"
#include "hijacksim/wifi/link.hpp"

namespace hijacksim::harness {

struct SentProbe {
    VirtualTime t{0};
    attack::ProbeTag tag;
    std::uint32_t ip_len = 0;
};

class Simulation : public attack::ProbeChannel {
public:
    explicit Simulation(const ScenarioConfig& cfg);

    VirtualTime now() const override { return now_; }
    MacAddress attacker_mac() const override { return cfg_.attacker.mac; }
    std::vector<attack::HostInfo> arp_sweep() override;
    void tune(int channel) override;
    void send(const tcp::SegmentMeta& seg, const attack::ProbeTag& tag) override;
    std::optional<wifi::FrameObservation> next_frame(VirtualTime deadline) override;

    /// Every frame the sniffer captured plus the attacker's own uplink frames.
    const std::vector<wifi::FrameObservation>& trace() const { return trace_; }
    const std::vector<SentProbe>& sent() const { return sent_; }

    const tcp::ServerConnState& connection() const { return *endpoint_.find(truth_.state.tuple); }
    const Materialized& truth() const { return truth_; }
    VirtualTime limit() const { return limit_; }

private:
    struct ServerArrival {
        tcp::SegmentMeta seg;
        bool from_victim = false;
    };
    struct Downlink {
        std::uint32_t ip_len = 0;
        MacAddress receiver;
        int tid = 0;
    };
    struct AmsduFlush {};
    struct OnAir {
        wifi::FrameObservation frame;
        bool captured = false;
    };
    struct BackgroundTick {
        std::uint64_t index = 0;
    };
    struct LiveTick {};
    using Event = std::variant<ServerArrival, Downlink, AmsduFlush, OnAir, BackgroundTick, LiveTick>;

    void schedule(VirtualTime t, Event e) { queue_.push(t, std::move(e)); }
    void run_until(VirtualTime t);
    void dispatch(VirtualTime t, Event& e);
    void on_server(VirtualTime t, const ServerArrival& a);
    void on_downlink(VirtualTime t, const Downlink& d);
    void on_flush(VirtualTime t);
    void air(VirtualTime t, wifi::FrameObservation frame);
    void on_background(VirtualTime t, std::uint64_t index);
    void on_live(VirtualTime t);
    std::optional<VirtualTime> background_time(std::uint64_t index) const;
    std::optional<MacAddress> mac_of(const Ipv4Address& ip) const;

    ScenarioConfig cfg_;
    Materialized truth_;
    wifi::EncapsulationConfig enc_;
    wifi::ChannelConfig air_;  // current channel conditions, after any eviction
    int victim_channel_ = 1;
    int tuned_ = 1;
    VirtualTime now_{0};
    VirtualTime limit_{0};
    VirtualTime victim_silent_until_{0};
    bool evicted_ = false;

    tcp::TcpEndpoint endpoint_;
    EventQueue<Event> queue_;
    std::deque<wifi::FrameObservation> ready_;
    std::vector<wifi::FrameObservation> trace_;
    std::vector<SentProbe> sent_;
    std::vector<wifi::PendingMsdu> pending_;

    Rng channel_rng_;
    Rng padding_rng_;
    Rng arp_rng_;

    // Victim side of the live connection.
    std::uint32_t client_snd_nxt_ = 0;
    int unacked_segments_ = 0;
};

}  // namespace hijacksim::harness

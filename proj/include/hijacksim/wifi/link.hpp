// include/hijacksim/wifi/link.hpp
// 802.11 link model: encryption as a size transform, per-frame loss and
// contention delay, address filtering, A-MSDU aggregation, background
// traffic and channel eviction.

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hijacksim/core/types.hpp"
#include "hijacksim/defense/policy.hpp"

namespace hijacksim::wifi {

struct EncapsulationConfig {
    std::uint32_t llc_snap_overhead = 8;
    std::uint32_t crypto_mic_overhead = 8;
    defense::PaddingPolicy padding_policy = defense::NoPadding{};
};

enum class FrameKind { Data, Mgmt, Ctrl };

std::string_view to_string(FrameKind k);
FrameKind parse_frame_kind(std::string_view s);  // throws std::invalid_argument

struct FrameObservation {
    MacAddress addr1;  // receiver
    MacAddress addr2;  // transmitter
    int channel = 1;
    std::uint32_t observable_len = 0;
    VirtualTime t{0};
    FrameKind kind = FrameKind::Data;
    bool amsdu = false;

    bool operator==(const FrameObservation&) const = default;
};

enum class BackgroundMode { Rate, Interval };

struct BackgroundSpec {
    BackgroundMode mode = BackgroundMode::Rate;
    double interval_s = 1.0;
    double rate_pps = 40.0;
    std::uint32_t packet_ip_len = 52;
    int tid = 5;
};

struct AmsduConfig {
    std::uint32_t max_size = 3839;
    VirtualTime max_delay{1};
};

struct EvictionConfig {
    bool enabled = false;
    double factor = 10.0;
    VirtualTime gap = from_seconds(2.0);
};

struct ChannelConfig {
    double loss_prob = 0.0;
    VirtualTime contention_lo{0};
    VirtualTime contention_hi = from_millis(5);
    std::vector<int> channels{1};
    VirtualTime rtt = from_millis(20);
    std::optional<BackgroundSpec> background;
    bool amsdu_enabled = false;
    AmsduConfig amsdu;
    bool ap_isolation = false;
    EvictionConfig eviction;

    /// Throws ConfigError on violated invariants.
    void validate() const;
};

/// padding(ip_len + LLC/SNAP + MIC). rng is only consulted by random padding.
std::uint32_t encapsulate(std::uint32_t ip_len, const EncapsulationConfig& cfg = {}, Rng* rng = nullptr);

/// Delivery time, or nullopt if the frame is lost. Consumes one draw for the
/// loss decision and, when delivered, one for the contention delay.
std::optional<VirtualTime> transmit(const FrameObservation& frame, const ChannelConfig& cfg, Rng& rng);

/// Frames whose addr1 or addr2 equals mac, in order.
std::vector<FrameObservation> filter_frames(const std::vector<FrameObservation>& trace, const MacAddress& mac);

struct PendingMsdu {
    std::uint32_t msdu_len = 0;  // observable length of the MSDU on its own
    MacAddress receiver;
    MacAddress transmitter;
    int tid = 0;
    int channel = 1;
    VirtualTime t{0};
};

inline constexpr std::uint32_t kAmsduSubframeHeader = 14;

/// Groups same-(receiver, tid) MSDUs that follow each other within max_delay
/// into A-MSDUs. Each subframe is 14 + len bytes, padded to a multiple of 4
/// except the last. A group is cut when the next subframe would push it past
/// max_size. Frames are stamped max(now, last member time) and returned in
/// order of their first member.
std::vector<FrameObservation> aggregate_amsdu(const std::vector<PendingMsdu>& pending, const AmsduConfig& cfg,
                                              VirtualTime now);

/// Background empty-ACK frames toward victim. Rate mode: frame i at i / rate
/// for every i with i / rate < duration. Interval mode: one frame at each
/// k * interval_s (k >= 1) below duration.
std::vector<FrameObservation> gen_background(const BackgroundSpec& spec, double duration_s,
                                             const MacAddress& victim, const MacAddress& source, int channel,
                                             const EncapsulationConfig& enc = {});

class EvictionUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EvictionEffect {
    ChannelConfig channel;  // with contention collapsed toward its lower bound
    VirtualTime gap{0};     // re-association time during which the victim is silent
};

/// Throws EvictionUnavailable for single-channel networks.
EvictionEffect evict_supplicant(const ChannelConfig& cfg);

/// False when AP isolation forbids a supplicant-to-supplicant frame.
bool relay_allowed(bool src_is_supplicant, bool dst_is_supplicant, const ChannelConfig& cfg);

}  // namespace hijacksim::wifi

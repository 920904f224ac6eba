// include/hijacksim/attack/probe_channel.hpp
// Everything the attacker can do to the world: transmit forged segments,
// sweep ARP, tune its sniffer and read captured frame metadata. Nothing in
// this interface exposes endpoint state or plaintext.

#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hijacksim/core/types.hpp"
#include "hijacksim/tcp/endpoint.hpp"
#include "hijacksim/wifi/link.hpp"

namespace hijacksim::attack {

enum class Phase { Scan, Port, Seq, AckWindow, AckBoundary, Verify, Action };

inline constexpr std::array<Phase, 7> kAllPhases{Phase::Scan,        Phase::Port,   Phase::Seq,   Phase::AckWindow,
                                                 Phase::AckBoundary, Phase::Verify, Phase::Action};

std::string_view to_string(Phase p);
std::optional<Phase> parse_phase(std::string_view s);

/// What a forged segment was meant to test; only used for the probe log.
struct ProbeTag {
    Phase phase = Phase::Port;
    std::string guess_kind;
    std::uint32_t guess_value = 0;
};

struct HostInfo {
    MacAddress mac;
    Ipv4Address ip;
    int channel = 1;

    bool operator==(const HostInfo&) const = default;
};

/// Raised by a channel when the scenario's virtual time budget runs out.
class DeadlineExceeded : public std::runtime_error {
public:
    DeadlineExceeded() : std::runtime_error("virtual time limit reached") {}
};

class ProbeChannel {
public:
    virtual ~ProbeChannel() = default;

    virtual VirtualTime now() const = 0;
    virtual MacAddress attacker_mac() const = 0;

    /// One ARP sweep of the WLAN: the hosts whose reply was heard.
    virtual std::vector<HostInfo> arp_sweep() = 0;
    virtual void tune(int channel) = 0;
    /// Transmits a forged segment at now().
    virtual void send(const tcp::SegmentMeta& seg, const ProbeTag& tag) = 0;
    /// Next frame captured no later than deadline, advancing time to it.
    /// Returns nullopt once time has reached deadline.
    virtual std::optional<wifi::FrameObservation> next_frame(VirtualTime deadline) = 0;
};

}  // namespace hijacksim::attack

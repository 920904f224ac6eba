// include/hijacksim/tcp/endpoint.hpp
// Server-side TCP segment validation (RFC 9293 window checks plus the
// RFC 5961 challenge-ACK rules) reduced to the response taxonomy that an
// observer of encrypted frame sizes can tell apart.
//
// Provides:
//   - classify_ack / classify_seq   - window region of an incoming SEG.ACK / SEG.SEQ
//   - classify_segment              - pure response decision for one segment
//   - handle_segment                - classify_segment + state update
//   - response_ip_length            - IPv4 packet size of each response kind
//   - TcpEndpoint                   - connection table keyed by four-tuple

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hijacksim/core/types.hpp"
#include "hijacksim/tcp/seq_space.hpp"

namespace hijacksim::tcp {

struct FourTuple {
    Ipv4Address client_ip;
    std::uint16_t client_port = 0;
    Ipv4Address server_ip;
    std::uint16_t server_port = 0;

    auto operator<=>(const FourTuple&) const = default;
};

struct OptionsProfile {
    bool timestamps_enabled = true;
    bool sack_enabled = true;

    bool operator==(const OptionsProfile&) const = default;
};

struct TcpFlags {
    bool syn = false;
    bool ack = false;
    bool rst = false;
    bool psh = false;

    static constexpr TcpFlags syn_ack() { return {true, true, false, false}; }
    static constexpr TcpFlags data() { return {false, true, false, true}; }
    static constexpr TcpFlags pure_ack() { return {false, true, false, false}; }
    static constexpr TcpFlags reset() { return {false, false, true, false}; }

    std::string to_string() const;
    bool operator==(const TcpFlags&) const = default;
};

struct SegmentMeta {
    FourTuple tuple;
    TcpFlags flags;
    std::uint32_t seq = 0;
    std::uint32_t ack = 0;
    std::uint32_t payload_len = 0;
    // Optional concrete bytes; when empty, payload_len bytes of filler are assumed.
    std::vector<std::uint8_t> payload;
};

/// IPv4 length of a forged segment (20 IP + 20 TCP, no options, plus payload).
std::uint32_t segment_ip_length(const SegmentMeta& seg);

enum class AckClass { Challenge, Acceptable, Invalid };
enum class SeqClass { OldDuplicate, Acceptable, BeyondWindow, Unreachable };
enum class TcpResponse { Silence, Rst, DupAck, ChallengeAck, SackAck, AcceptData, ConnectionReset };

std::string_view to_string(AckClass c);
std::string_view to_string(SeqClass c);
std::string_view to_string(TcpResponse r);

struct ServerConnState {
    FourTuple tuple;
    std::uint32_t rcv_nxt = 0;
    std::uint32_t rcv_wnd = 65535;
    std::uint32_t snd_una = 0;
    std::uint32_t snd_nxt = 0;
    std::uint32_t snd_wnd = 65535;
    OptionsProfile options;
    bool open = true;
    SeqSpace space;

    // Reassembled in-order byte stream; offset 0 corresponds to stream_origin.
    std::uint32_t stream_origin = 0;
    std::vector<std::uint8_t> stream;

    /// Throws std::invalid_argument when a structural invariant does not hold.
    void validate() const;
};

/// Acceptable: (snd_una - snd_wnd, snd_nxt]
/// Challenge:  [snd_una - half + 1, snd_una - snd_wnd]
/// Invalid:    everything else, i.e. (snd_nxt, snd_una - half]
AckClass classify_ack(const ServerConnState& state, std::uint32_t seg_ack);

/// For a segment carrying payload_len >= 1 bytes:
/// OldDuplicate: (rcv_nxt - half, rcv_nxt - payload_len]
/// Acceptable:   [rcv_nxt - payload_len + 1, rcv_nxt + rcv_wnd]
/// BeyondWindow: (rcv_nxt + rcv_wnd, rcv_nxt + half)
/// Unreachable:  the single residue rcv_nxt + half
/// Throws std::invalid_argument for payload_len == 0 or payload_len >= half.
SeqClass classify_seq(const ServerConnState& state, std::uint32_t seg_seq, std::uint32_t payload_len);

/// Response decision without side effects. state may be null (no connection).
/// Throws std::invalid_argument for SYN+RST.
TcpResponse classify_segment(const ServerConnState* state, const SegmentMeta& seg);

/// classify_segment followed by the state transition: AcceptData appends the
/// in-order part of the payload and advances rcv_nxt; ConnectionReset closes.
TcpResponse handle_segment(ServerConnState* state, const SegmentMeta& seg);

/// IPv4 packet length of a response. Silence has no packet and throws;
/// AcceptData and ConnectionReset are sized like a plain ACK.
std::uint32_t response_ip_length(TcpResponse kind, const OptionsProfile& options = {});

/// True for the kinds that put a segment on the wire immediately.
bool emits_packet(TcpResponse kind);

class TcpEndpoint {
public:
    explicit TcpEndpoint(SeqSpace space = {}) : space_(space) {}

    /// Registers an established connection. The state's space must match.
    void open(ServerConnState state);
    TcpResponse handle(const SegmentMeta& seg);

    const ServerConnState* find(const FourTuple& tuple) const;
    ServerConnState* find(const FourTuple& tuple);
    SeqSpace space() const { return space_; }

private:
    SeqSpace space_;
    std::map<FourTuple, ServerConnState> connections_;
};

}  // namespace hijacksim::tcp

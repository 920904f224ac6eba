#include "hijacksim/tcp/endpoint.hpp"

#include <algorithm>
#include <stdexcept>

namespace hijacksim::tcp {

namespace {

constexpr std::uint32_t kIpTcpHeader = 40;
constexpr std::uint32_t kTimestampOption = 12;
constexpr std::uint32_t kSackOption = 12;

}  // namespace

std::string TcpFlags::to_string() const {
    std::string s;
    if (syn) s += 'S';
    if (ack) s += 'A';
    if (rst) s += 'R';
    if (psh) s += 'P';
    return s.empty() ? "-" : s;
}

std::uint32_t segment_ip_length(const SegmentMeta& seg) {
    return kIpTcpHeader + seg.payload_len;
}

std::string_view to_string(AckClass c) {
    switch (c) {
        case AckClass::Challenge: return "challenge";
        case AckClass::Acceptable: return "acceptable";
        case AckClass::Invalid: return "invalid";
    }
    return "?";
}

std::string_view to_string(SeqClass c) {
    switch (c) {
        case SeqClass::OldDuplicate: return "old_duplicate";
        case SeqClass::Acceptable: return "acceptable";
        case SeqClass::BeyondWindow: return "beyond_window";
        case SeqClass::Unreachable: return "unreachable";
    }
    return "?";
}

std::string_view to_string(TcpResponse r) {
    switch (r) {
        case TcpResponse::Silence: return "silence";
        case TcpResponse::Rst: return "rst";
        case TcpResponse::DupAck: return "dup_ack";
        case TcpResponse::ChallengeAck: return "challenge_ack";
        case TcpResponse::SackAck: return "sack_ack";
        case TcpResponse::AcceptData: return "accept_data";
        case TcpResponse::ConnectionReset: return "connection_reset";
    }
    return "?";
}

void ServerConnState::validate() const {
    if (tuple.client_port == 0) throw std::invalid_argument("client_port must be non-zero");
    if (!space.contains(rcv_nxt) || !space.contains(snd_una) || !space.contains(snd_nxt)) {
        throw std::invalid_argument("sequence value outside the modular space");
    }
    if (rcv_wnd == 0 || rcv_wnd >= space.quarter()) throw std::invalid_argument("rcv_wnd out of range");
    if (snd_wnd >= space.quarter()) throw std::invalid_argument("snd_wnd out of range");
    if (space.distance(snd_una, snd_nxt) > space.half() - 1) {
        throw std::invalid_argument("snd_nxt - snd_una exceeds half the space");
    }
}

AckClass classify_ack(const ServerConnState& s, std::uint32_t seg_ack) {
    const SeqSpace sp = s.space;
    const std::uint64_t inflight = sp.distance(s.snd_una, s.snd_nxt);
    // Acceptable first: (snd_una - snd_wnd, snd_nxt]
    if (sp.in_window(seg_ack, sp.add(sp.sub(s.snd_una, s.snd_wnd), 1), inflight + s.snd_wnd)) {
        return AckClass::Acceptable;
    }
    // [snd_una - half + 1, snd_una - snd_wnd]
    if (sp.in_window(seg_ack, sp.add(sp.sub(s.snd_una, sp.half()), 1), sp.half() - s.snd_wnd)) {
        return AckClass::Challenge;
    }
    return AckClass::Invalid;
}

SeqClass classify_seq(const ServerConnState& s, std::uint32_t seg_seq, std::uint32_t payload_len) {
    const SeqSpace sp = s.space;
    if (payload_len == 0 || payload_len >= sp.half()) {
        throw std::invalid_argument("classify_seq: payload_len must be in [1, half)");
    }
    const std::uint32_t r = s.rcv_nxt;
    // Residue split over the whole space, starting at r - half + 1:
    //   half - len       old duplicates
    //   len + wnd        acceptable (overlaps [r, r + wnd])
    //   half - wnd - 1   beyond window
    //   1                r + half, neither behind nor ahead
    if (sp.in_window(seg_seq, sp.add(sp.sub(r, payload_len), 1), std::uint64_t{payload_len} + s.rcv_wnd)) {
        return SeqClass::Acceptable;
    }
    if (sp.in_window(seg_seq, sp.add(sp.sub(r, sp.half()), 1), sp.half() - payload_len)) {
        return SeqClass::OldDuplicate;
    }
    if (seg_seq == sp.add(r, sp.half())) return SeqClass::Unreachable;
    return SeqClass::BeyondWindow;
}

TcpResponse classify_segment(const ServerConnState* s, const SegmentMeta& seg) {
    if (seg.flags.syn && seg.flags.rst) throw std::invalid_argument("segment has both SYN and RST");
    if (s == nullptr || !s->open) {
        // A reset is never answered with a reset.
        return seg.flags.rst ? TcpResponse::Silence : TcpResponse::Rst;
    }
    if (seg.flags.syn) return TcpResponse::ChallengeAck;
    if (seg.flags.rst) {
        if (seg.seq == s->rcv_nxt) return TcpResponse::ConnectionReset;
        if (classify_seq(*s, seg.seq, 1) == SeqClass::Acceptable) return TcpResponse::ChallengeAck;
        return TcpResponse::Silence;
    }
    const SeqSpace sp = s->space;
    if (seg.payload_len == 0) {
        if (!sp.in_window(seg.seq, s->rcv_nxt, std::uint64_t{s->rcv_wnd} + 1)) return TcpResponse::DupAck;
        if (seg.flags.ack && classify_ack(*s, seg.ack) == AckClass::Challenge) return TcpResponse::ChallengeAck;
        return TcpResponse::Silence;
    }
    switch (classify_seq(*s, seg.seq, seg.payload_len)) {
        case SeqClass::OldDuplicate:
            return s->options.sack_enabled ? TcpResponse::SackAck : TcpResponse::DupAck;
        case SeqClass::BeyondWindow:
        case SeqClass::Unreachable:
            return TcpResponse::DupAck;
        case SeqClass::Acceptable:
            break;
    }
    if (!seg.flags.ack) return TcpResponse::Silence;
    switch (classify_ack(*s, seg.ack)) {
        case AckClass::Invalid: return TcpResponse::Silence;
        case AckClass::Challenge: return TcpResponse::ChallengeAck;
        case AckClass::Acceptable: return TcpResponse::AcceptData;
    }
    return TcpResponse::Silence;
}

TcpResponse handle_segment(ServerConnState* s, const SegmentMeta& seg) {
    const TcpResponse r = classify_segment(s, seg);
    if (r == TcpResponse::ConnectionReset) {
        s->open = false;
    } else if (r == TcpResponse::AcceptData) {
        const SeqSpace sp = s->space;
        // Only the part starting at or before rcv_nxt is in order; segments
        // wholly ahead of rcv_nxt are not queued.
        const std::uint64_t behind = sp.distance(seg.seq, s->rcv_nxt);
        if (behind < seg.payload_len) {
            const std::uint64_t fresh = std::min<std::uint64_t>(seg.payload_len - behind, s->rcv_wnd);
            for (std::uint64_t i = 0; i < fresh; ++i) {
                const std::uint64_t idx = behind + i;
                s->stream.push_back(idx < seg.payload.size() ? seg.payload[idx] : std::uint8_t{0});
            }
            s->rcv_nxt = sp.add(s->rcv_nxt, fresh);
        }
    }
    return r;
}

std::uint32_t response_ip_length(TcpResponse kind, const OptionsProfile& options) {
    const std::uint32_t ts = options.timestamps_enabled ? kTimestampOption : 0;
    switch (kind) {
        case TcpResponse::Rst: return kIpTcpHeader;
        case TcpResponse::DupAck:
        case TcpResponse::ChallengeAck:
        case TcpResponse::AcceptData:
        case TcpResponse::ConnectionReset:
            return kIpTcpHeader + ts;
        case TcpResponse::SackAck: return kIpTcpHeader + ts + kSackOption;
        case TcpResponse::Silence: break;
    }
    throw std::invalid_argument("response_ip_length: silence has no packet");
}

bool emits_packet(TcpResponse kind) {
    switch (kind) {
        case TcpResponse::Rst:
        case TcpResponse::DupAck:
        case TcpResponse::ChallengeAck:
        case TcpResponse::SackAck:
            return true;
        default:
            return false;
    }
}

void TcpEndpoint::open(ServerConnState state) {
    if (!(state.space == space_)) throw std::invalid_argument("connection uses a different sequence space");
    state.validate();
    const FourTuple key = state.tuple;
    connections_.insert_or_assign(key, std::move(state));
}

TcpResponse TcpEndpoint::handle(const SegmentMeta& seg) {
    return handle_segment(find(seg.tuple), seg);
}

const ServerConnState* TcpEndpoint::find(const FourTuple& tuple) const {
    auto it = connections_.find(tuple);
    return it == connections_.end() ? nullptr : &it->second;
}

ServerConnState* TcpEndpoint::find(const FourTuple& tuple) {
    auto it = connections_.find(tuple);
    return it == connections_.end() ? nullptr : &it->second;
}

}  // namespace hijacksim::tcp

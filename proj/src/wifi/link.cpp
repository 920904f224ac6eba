#include "hijacksim/wifi/link.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace hijacksim::wifi {

std::string_view to_string(FrameKind k) {
    switch (k) {
        case FrameKind::Data: return "data";
        case FrameKind::Mgmt: return "mgmt";
        case FrameKind::Ctrl: return "ctrl";
    }
    return "?";
}

FrameKind parse_frame_kind(std::string_view s) {
    if (s == "data") return FrameKind::Data;
    if (s == "mgmt") return FrameKind::Mgmt;
    if (s == "ctrl") return FrameKind::Ctrl;
    throw std::invalid_argument("unknown frame kind");
}

void ChannelConfig::validate() const {
    if (!(loss_prob >= 0.0 && loss_prob <= 1.0)) throw ConfigError("loss_prob must be in [0, 1]");
    if (contention_lo.count() < 0 || contention_hi < contention_lo) {
        throw ConfigError("contention delay must satisfy 0 <= lo <= hi");
    }
    if (channels.empty()) throw ConfigError("channels must be non-empty");
    if (rtt.count() <= 0) throw ConfigError("rtt must be positive");
    if (amsdu.max_size != 3839 && amsdu.max_size != 7935) throw ConfigError("amsdu.max_size must be 3839 or 7935");
    if (amsdu.max_delay.count() < 0) throw ConfigError("amsdu.max_delay_us must be >= 0");
    if (background) {
        if (background->mode == BackgroundMode::Rate && !(background->rate_pps >= 0.0)) {
            throw ConfigError("background.rate_pps must be >= 0");
        }
        if (background->mode == BackgroundMode::Interval && !(background->interval_s > 0.0)) {
            throw ConfigError("background.interval_s must be > 0");
        }
        if (background->packet_ip_len < 20) throw ConfigError("background.packet_ip_len must be >= 20");
    }
    if (eviction.enabled && !(eviction.factor >= 1.0)) throw ConfigError("eviction.factor must be >= 1");
    if (eviction.gap.count() < 0) throw ConfigError("eviction.gap_s must be >= 0");
}

std::uint32_t encapsulate(std::uint32_t ip_len, const EncapsulationConfig& cfg, Rng* rng) {
    if (ip_len < 20) throw std::invalid_argument("encapsulate: ip_len below 20");
    return defense::apply_padding(cfg.padding_policy, ip_len + cfg.llc_snap_overhead + cfg.crypto_mic_overhead,
                                  rng);
}

std::optional<VirtualTime> transmit(const FrameObservation& frame, const ChannelConfig& cfg, Rng& rng) {
    if (std::find(cfg.channels.begin(), cfg.channels.end(), frame.channel) == cfg.channels.end()) {
        throw ConfigError("frame on unknown channel " + std::to_string(frame.channel));
    }
    if (rng.bernoulli(cfg.loss_prob)) return std::nullopt;
    const auto delay = rng.uniform_int(0, static_cast<std::uint64_t>((cfg.contention_hi - cfg.contention_lo).count()));
    return frame.t + cfg.contention_lo + VirtualTime{static_cast<std::int64_t>(delay)};
}

std::vector<FrameObservation> filter_frames(const std::vector<FrameObservation>& trace, const MacAddress& mac) {
    std::vector<FrameObservation> out;
    std::copy_if(trace.begin(), trace.end(), std::back_inserter(out),
                 [&](const FrameObservation& f) { return f.addr1 == mac || f.addr2 == mac; });
    return out;
}

namespace {

std::uint32_t pad4(std::uint32_t n) { return (n + 3u) & ~3u; }

struct OpenGroup {
    std::size_t first_index;
    std::vector<const PendingMsdu*> members;
    std::uint32_t padded_body = 0;  // sum of padded subframes before the last
    std::uint32_t last_sub = 0;     // unpadded size of the last subframe

    std::uint32_t size() const { return padded_body + last_sub; }
    std::uint32_t size_with(std::uint32_t len) const {
        return padded_body + pad4(last_sub) + kAmsduSubframeHeader + len;
    }
};

}  // namespace

std::vector<FrameObservation> aggregate_amsdu(const std::vector<PendingMsdu>& pending, const AmsduConfig& cfg,
                                              VirtualTime now) {
    using Key = std::tuple<MacAddress, int>;
    std::map<Key, OpenGroup> open;
    std::vector<std::pair<std::size_t, FrameObservation>> out;

    auto close = [&](const OpenGroup& g) {
        const PendingMsdu& head = *g.members.front();
        FrameObservation f;
        f.addr1 = head.receiver;
        f.addr2 = head.transmitter;
        f.channel = head.channel;
        f.kind = FrameKind::Data;
        f.t = std::max(now, g.members.back()->t);
        if (g.members.size() == 1) {
            f.observable_len = head.msdu_len;
            f.amsdu = false;
        } else {
            f.observable_len = g.size();
            f.amsdu = true;
        }
        out.emplace_back(g.first_index, f);
    };

    for (std::size_t i = 0; i < pending.size(); ++i) {
        const PendingMsdu& m = pending[i];
        const Key key{m.receiver, m.tid};
        auto it = open.find(key);
        if (it != open.end()) {
            OpenGroup& g = it->second;
            const bool in_time = m.t - g.members.back()->t <= cfg.max_delay;
            if (in_time && g.size_with(m.msdu_len) <= cfg.max_size) {
                g.padded_body += pad4(g.last_sub);
                g.last_sub = kAmsduSubframeHeader + m.msdu_len;
                g.members.push_back(&m);
                continue;
            }
            close(g);
            open.erase(it);
        }
        OpenGroup g{i, {&m}, 0, kAmsduSubframeHeader + m.msdu_len};
        open.emplace(key, std::move(g));
    }
    for (const auto& [key, g] : open) close(g);

    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<FrameObservation> frames;
    frames.reserve(out.size());
    for (auto& [idx, f] : out) frames.push_back(f);
    return frames;
}

std::vector<FrameObservation> gen_background(const BackgroundSpec& spec, double duration_s,
                                             const MacAddress& victim, const MacAddress& source, int channel,
                                             const EncapsulationConfig& enc) {
    if (!(duration_s > 0.0)) throw std::invalid_argument("gen_background: duration must be positive");
    std::vector<FrameObservation> frames;
    FrameObservation f;
    f.addr1 = victim;
    f.addr2 = source;
    f.channel = channel;
    f.kind = FrameKind::Data;
    f.observable_len = encapsulate(spec.packet_ip_len, enc);
    if (spec.mode == BackgroundMode::Rate) {
        if (spec.rate_pps <= 0.0) return frames;
        for (std::uint64_t i = 0;; ++i) {
            const double t = static_cast<double>(i) / spec.rate_pps;
            if (!(t < duration_s)) break;
            f.t = from_seconds(t);
            frames.push_back(f);
        }
    } else {
        for (std::uint64_t k = 1;; ++k) {
            const double t = static_cast<double>(k) * spec.interval_s;
            if (!(t < duration_s)) break;
            f.t = from_seconds(t);
            frames.push_back(f);
        }
    }
    return frames;
}

EvictionEffect evict_supplicant(const ChannelConfig& cfg) {
    if (cfg.channels.size() < 2) throw EvictionUnavailable("eviction needs at least two channels");
    EvictionEffect e;
    e.channel = cfg;
    const double span = static_cast<double>((cfg.contention_hi - cfg.contention_lo).count());
    e.channel.contention_hi =
        cfg.contention_lo + VirtualTime{static_cast<std::int64_t>(std::llround(span / cfg.eviction.factor))};
    e.gap = cfg.eviction.gap;
    return e;
}

bool relay_allowed(bool src_is_supplicant, bool dst_is_supplicant, const ChannelConfig& cfg) {
    return !(cfg.ap_isolation && src_is_supplicant && dst_is_supplicant);
}

}  // namespace hijacksim::wifi

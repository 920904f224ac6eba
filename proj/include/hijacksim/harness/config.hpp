// include/hijacksim/harness/config.hpp
// Scenario configuration and its JSON form.
//
// Every key has a default, so "{}" is a valid lossless reset scenario. Null
// for server.rcv_nxt, server.snd_una and true_client_port means "draw from
// the scenario seed".

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hijacksim/attack/attacker.hpp"
#include "hijacksim/core/types.hpp"
#include "hijacksim/defense/policy.hpp"
#include "hijacksim/tcp/endpoint.hpp"
#include "hijacksim/wifi/link.hpp"

namespace hijacksim::harness {

struct HostConfig {
    MacAddress mac;
    Ipv4Address ip;
};

struct ServerInit {
    Ipv4Address ip = Ipv4Address::parse("93.184.216.34");
    std::uint16_t port = 22;
    std::optional<std::uint32_t> rcv_nxt;
    std::optional<std::uint32_t> rcv_wnd;  // default min(65535, quarter / 4)
    std::optional<std::uint32_t> snd_una;
    std::uint32_t inflight = 0;             // snd_nxt - snd_una
    std::optional<std::uint32_t> snd_wnd;  // default as rcv_wnd
    tcp::OptionsProfile options;
};

struct LiveTraffic {
    double bytes_per_s = 100.0;
    std::uint32_t segment_bytes = 100;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    unsigned seq_bits = 32;
    std::string id = "scenario";
    HostConfig victim{MacAddress::parse("02:00:00:00:00:07"), Ipv4Address::parse("192.168.1.7")};
    HostConfig attacker{MacAddress::parse("02:00:00:00:00:42"), Ipv4Address::parse("192.168.1.66")};
    MacAddress bssid = MacAddress::parse("02:00:00:00:ff:00");
    std::vector<HostConfig> other_supplicants;
    bool victim_ip_known = true;
    ServerInit server;
    std::optional<std::uint16_t> true_client_port;
    wifi::ChannelConfig channel;
    std::optional<int> victim_channel;  // default: first channel
    std::uint32_t llc_snap_overhead = 8;
    std::uint32_t crypto_mic_overhead = 8;
    attack::InferenceConfig inference;
    bool observe_timeout_auto = true;  // derive 2 * rtt + contention upper bound
    defense::PaddingPolicy padding = defense::NoPadding{};
    defense::UniformResponsePolicy uniform_response;
    attack::ActionSpec action;
    std::optional<LiveTraffic> live_traffic;
    double duration_limit_s = 7200.0;

    tcp::SeqSpace space() const { return tcp::SeqSpace(seq_bits); }
    int effective_victim_channel() const { return victim_channel.value_or(channel.channels.front()); }
    wifi::EncapsulationConfig encapsulation() const {
        return {llc_snap_overhead, crypto_mic_overhead, padding};
    }
    /// The inference config with observe_timeout resolved.
    attack::InferenceConfig resolved_inference() const;

    /// Throws ConfigError. Checks everything that does not depend on the seed.
    void validate() const;
};

/// Connection state and port with the seeded draws filled in.
struct Materialized {
    tcp::ServerConnState state;
    std::uint16_t true_port = 0;
};

Materialized materialize(const ScenarioConfig& cfg);

/// Throws ConfigError on unknown keys, wrong types or invalid values.
ScenarioConfig from_json(const nlohmann::json& j);
/// Canonical form: every key present, nulls for unset optionals.
nlohmann::json to_json(const ScenarioConfig& cfg);

ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text);

/// Sets a dotted key path (e.g. "channel.background.rate_pps") in a config.
/// The path must name an existing key of the canonical form; a null optional
/// section is replaced by its defaults first.
ScenarioConfig with_override(const ScenarioConfig& cfg, const std::string& path, const nlohmann::json& value);

/// "true"/"false", numbers, null and JSON literals parse as such; anything
/// else is taken as a string.
nlohmann::json parse_scalar(const std::string& text);

}  // namespace hijacksim::harness

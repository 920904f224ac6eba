// include/hijacksim/core/types.hpp
// Shared value types: addresses, virtual time, seeded randomness, errors.

#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hijacksim {

/// Virtual time since scenario start, microsecond resolution.
using VirtualTime = std::chrono::microseconds;

constexpr VirtualTime from_seconds(double s) {
    return VirtualTime{static_cast<std::int64_t>(s * 1e6 + (s >= 0 ? 0.5 : -0.5))};
}

constexpr VirtualTime from_millis(double ms) {
    return VirtualTime{static_cast<std::int64_t>(ms * 1e3 + (ms >= 0 ? 0.5 : -0.5))};
}

constexpr double to_seconds(VirtualTime t) {
    return static_cast<double>(t.count()) / 1e6;
}

/// Raised for invalid scenario/channel/inference configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MacAddress {
public:
    constexpr MacAddress() = default;
    constexpr explicit MacAddress(std::array<std::uint8_t, 6> octets) : octets_(octets) {}

    /// Locally administered unicast address 02:00:xx:xx:xx:xx built from an index.
    static MacAddress from_index(std::uint32_t index);
    /// Parses "aa:bb:cc:dd:ee:ff"; throws ConfigError on malformed input.
    static MacAddress parse(std::string_view text);

    std::string to_string() const;
    const std::array<std::uint8_t, 6>& octets() const { return octets_; }

    auto operator<=>(const MacAddress&) const = default;

private:
    std::array<std::uint8_t, 6> octets_{};
};

class Ipv4Address {
public:
    constexpr Ipv4Address() = default;
    constexpr explicit Ipv4Address(std::uint32_t host_order) : value_(host_order) {}

    /// Parses dotted quad; throws ConfigError on malformed input.
    static Ipv4Address parse(std::string_view text);

    std::string to_string() const;
    constexpr std::uint32_t value() const { return value_; }

    auto operator<=>(const Ipv4Address&) const = default;

private:
    std::uint32_t value_ = 0;
};

/// splitmix64 mix of a master seed and a stream identifier.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t sub);

/// Seeded generator. Sampling is done on raw engine output so results are
/// identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform01();
    /// Uniform integer in [lo, hi] (inclusive), unbiased.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);
    bool bernoulli(double p);

private:
    std::mt19937_64 engine_;
};

}  // namespace hijacksim

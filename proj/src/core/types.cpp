#include "hijacksim/core/types.hpp"

#include <charconv>
#include <cstdio>
#include <limits>

namespace hijacksim {

namespace {

bool parse_uint(std::string_view s, int base, std::uint32_t max, std::uint32_t& out) {
    if (s.empty()) return false;
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v > max) return false;
    out = v;
    return true;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

MacAddress MacAddress::from_index(std::uint32_t index) {
    return MacAddress({0x02, 0x00,
                       static_cast<std::uint8_t>(index >> 24),
                       static_cast<std::uint8_t>(index >> 16),
                       static_cast<std::uint8_t>(index >> 8),
                       static_cast<std::uint8_t>(index)});
}

MacAddress MacAddress::parse(std::string_view text) {
    std::array<std::uint8_t, 6> octets{};
    std::size_t pos = 0;
    for (std::size_t i = 0; i < 6; ++i) {
        auto end = text.find(':', pos);
        if (i == 5) end = text.size();
        if (end == std::string_view::npos || end - pos != 2) {
            throw ConfigError("malformed MAC address: " + std::string(text));
        }
        std::uint32_t v = 0;
        if (!parse_uint(text.substr(pos, 2), 16, 0xff, v)) {
            throw ConfigError("malformed MAC address: " + std::string(text));
        }
        octets[i] = static_cast<std::uint8_t>(v);
        pos = end + 1;
    }
    return MacAddress(octets);
}

std::string MacAddress::to_string() const {
    char buf[18];
    std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x",
                  octets_[0], octets_[1], octets_[2], octets_[3], octets_[4], octets_[5]);
    return buf;
}

Ipv4Address Ipv4Address::parse(std::string_view text) {
    std::uint32_t value = 0;
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        auto end = text.find('.', pos);
        if (i == 3) end = text.size();
        if (end == std::string_view::npos) {
            throw ConfigError("malformed IPv4 address: " + std::string(text));
        }
        std::uint32_t octet = 0;
        if (!parse_uint(text.substr(pos, end - pos), 10, 255, octet)) {
            throw ConfigError("malformed IPv4 address: " + std::string(text));
        }
        value = (value << 8) | octet;
        pos = end + 1;
    }
    return Ipv4Address(value);
}

std::string Ipv4Address::to_string() const {
    return std::to_string(value_ >> 24) + '.' + std::to_string((value_ >> 16) & 0xff) + '.' +
           std::to_string((value_ >> 8) & 0xff) + '.' + std::to_string(value_ & 0xff);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t sub) {
    return derive_seed(derive_seed(master, stream), sub);
}

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t lo, std::uint64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: hi < lo");
    const std::uint64_t span = hi - lo;
    if (span == std::numeric_limits<std::uint64_t>::max()) return engine_();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                (std::numeric_limits<std::uint64_t>::max() % range + 1) % range;
    std::uint64_t x = engine_();
    while (x > limit) x = engine_();
    return lo + x % range;
}

bool Rng::bernoulli(double p) {
    // Always consume one draw so call order does not depend on p.
    return uniform01() < p;
}

}  // namespace hijacksim

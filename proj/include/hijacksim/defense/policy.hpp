// include/hijacksim/defense/policy.hpp
// Frame padding and response uniformization countermeasures.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hijacksim/core/types.hpp"
#include "hijacksim/tcp/endpoint.hpp"

namespace hijacksim::defense {

struct NoPadding {
    bool operator==(const NoPadding&) const = default;
};

struct FixedPadding {
    std::uint32_t target = 128;
    bool operator==(const FixedPadding&) const = default;
};

struct BucketPadding {
    std::vector<std::uint32_t> buckets{64, 96, 128};
    bool operator==(const BucketPadding&) const = default;
};

struct RandomPadding {
    std::uint32_t max_extra = 32;
    std::uint64_t seed = 0;
    bool operator==(const RandomPadding&) const = default;
};

using PaddingPolicy = std::variant<NoPadding, FixedPadding, BucketPadding, RandomPadding>;

class PaddingOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Largest unpadded response frame with the default overheads (SACK-ACK).
inline constexpr std::uint32_t kLargestResponseFrame = 80;

/// Throws ConfigError if a fixed/bucket target is below largest_frame or the
/// bucket list is empty or not strictly ascending.
void validate(const PaddingPolicy& policy, std::uint32_t largest_frame = kLargestResponseFrame);

/// Observable length after padding. RandomPadding draws from rng, which must
/// be non-null for that mode. Throws PaddingOverflow past the largest bucket.
std::uint32_t apply_padding(const PaddingPolicy& policy, std::uint32_t len, Rng* rng = nullptr);

std::string describe(const PaddingPolicy& policy);

struct UniformResponsePolicy {
    bool enabled = false;
    std::uint32_t canonical_ip_len = 64;
    // Also answer segments that would otherwise be dropped silently.
    bool equalize_presence = false;

    bool operator==(const UniformResponsePolicy&) const = default;
};

/// IP length of the packet the server puts on the wire for a response kind,
/// or nullopt when nothing is sent right away (silence, in-window data and
/// accepted resets are acknowledged later, if at all).
std::optional<std::uint32_t> emitted_ip_length(tcp::TcpResponse kind, const tcp::OptionsProfile& options,
                                               const UniformResponsePolicy& uniform = {});

}  // namespace hijacksim::defense

#include "hijacksim/defense/policy.hpp"

#include <algorithm>

namespace hijacksim::defense {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

void validate(const PaddingPolicy& policy, std::uint32_t largest_frame) {
    std::visit(overloaded{
                   [](const NoPadding&) {},
                   [&](const FixedPadding& p) {
                       if (p.target < largest_frame) {
                           throw ConfigError("fixed padding target " + std::to_string(p.target) +
                                             " is below the largest response frame " +
                                             std::to_string(largest_frame));
                       }
                   },
                   [&](const BucketPadding& p) {
                       if (p.buckets.empty()) throw ConfigError("bucket padding needs at least one bucket");
                       if (std::adjacent_find(p.buckets.begin(), p.buckets.end(),
                                              std::greater_equal<>()) != p.buckets.end()) {
                           throw ConfigError("bucket sizes must be strictly ascending");
                       }
                       if (p.buckets.back() < largest_frame) {
                           throw ConfigError("largest bucket is below the largest response frame");
                       }
                   },
                   [](const RandomPadding&) {},
               },
               policy);
}

std::uint32_t apply_padding(const PaddingPolicy& policy, std::uint32_t len, Rng* rng) {
    if (len < 16) throw std::invalid_argument("apply_padding: input below 16 bytes");
    return std::visit(
        overloaded{
            [&](const NoPadding&) { return len; },
            // Larger frames are clamped as well, so every frame has one size.
            [&](const FixedPadding& p) { return p.target; },
            [&](const BucketPadding& p) {
                auto it = std::lower_bound(p.buckets.begin(), p.buckets.end(), len);
                if (it == p.buckets.end()) {
                    throw PaddingOverflow("frame of " + std::to_string(len) + " bytes exceeds largest bucket");
                }
                return *it;
            },
            [&](const RandomPadding& p) {
                if (rng == nullptr) throw std::invalid_argument("random padding needs an rng");
                return len + static_cast<std::uint32_t>(rng->uniform_int(0, p.max_extra));
            },
        },
        policy);
}

std::string describe(const PaddingPolicy& policy) {
    return std::visit(overloaded{
                          [](const NoPadding&) { return std::string("none"); },
                          [](const FixedPadding& p) { return "fixed(" + std::to_string(p.target) + ")"; },
                          [](const BucketPadding& p) {
                              std::string s = "bucket(";
                              for (std::size_t i = 0; i < p.buckets.size(); ++i) {
                                  if (i) s += ',';
                                  s += std::to_string(p.buckets[i]);
                              }
                              return s + ")";
                          },
                          [](const RandomPadding& p) { return "random(" + std::to_string(p.max_extra) + ")"; },
                      },
                      policy);
}

std::optional<std::uint32_t> emitted_ip_length(tcp::TcpResponse kind, const tcp::OptionsProfile& options,
                                               const UniformResponsePolicy& uniform) {
    if (!tcp::emits_packet(kind)) {
        if (uniform.enabled && uniform.equalize_presence) return uniform.canonical_ip_len;
        return std::nullopt;
    }
    if (uniform.enabled) return uniform.canonical_ip_len;
    return tcp::response_ip_length(kind, options);
}

}  // namespace hijacksim::defense

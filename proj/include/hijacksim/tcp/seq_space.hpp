// include/hijacksim/tcp/seq_space.hpp
// Modular sequence-number space. The simulator runs at 2^32 by default; the
// reduced spaces (e.g. 2^16) exist so that window logic and the inference
// pipeline can be checked exhaustively.

#pragma once

#include <cstdint>
#include <stdexcept>

namespace hijacksim::tcp {

class SeqSpace {
public:
    constexpr SeqSpace() = default;
    constexpr explicit SeqSpace(unsigned bits) : bits_(bits) {
        if (bits < 4 || bits > 32) throw std::invalid_argument("SeqSpace bits must be in [4, 32]");
    }

    constexpr unsigned bits() const { return bits_; }
    constexpr std::uint64_t size() const { return std::uint64_t{1} << bits_; }
    constexpr std::uint32_t mask() const { return static_cast<std::uint32_t>(size() - 1); }
    constexpr std::uint32_t half() const { return static_cast<std::uint32_t>(size() >> 1); }
    constexpr std::uint32_t quarter() const { return static_cast<std::uint32_t>(size() >> 2); }

    constexpr std::uint32_t wrap(std::uint64_t v) const { return static_cast<std::uint32_t>(v & mask()); }
    constexpr std::uint32_t add(std::uint32_t a, std::uint64_t b) const { return wrap(a + b); }
    constexpr std::uint32_t sub(std::uint32_t a, std::uint64_t b) const {
        return wrap(a + size() - (b & mask()));
    }
    /// (to - from) mod size.
    constexpr std::uint64_t distance(std::uint32_t from, std::uint32_t to) const {
        return wrap(std::uint64_t{to} + size() - (from & mask()));
    }
    /// x lies in the half-open modular interval [lo, lo + len).
    constexpr bool in_window(std::uint32_t x, std::uint32_t lo, std::uint64_t len) const {
        return distance(lo, x) < len;
    }
    constexpr bool contains(std::uint64_t v) const { return v <= mask(); }

    constexpr bool operator==(const SeqSpace&) const = default;

private:
    unsigned bits_ = 32;
};

inline constexpr SeqSpace kSeqSpace32{};

/// (x - lo) mod 2^32 < len. len may be up to 2^32.
constexpr bool mod_in_window(std::uint32_t x, std::uint32_t lo, std::uint64_t len) {
    return kSeqSpace32.in_window(x, lo, len);
}

}  // namespace hijacksim::tcp

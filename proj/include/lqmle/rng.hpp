#pragma once

#include "lqmle/errors.hpp"

#include <charconv>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>

namespace lqmle {

using Engine = std::mt19937_64;

/// One step of the SplitMix64 sequence; advances `state`.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a top-level seed and a key path
/// such as (replication index) or (noise law, n, replication). The result
/// depends only on the values, never on call order.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t state = seed;
    std::uint64_t out = splitmix64(state);
    for (std::uint64_t k : keys) {
        state ^= out + k * 0xD6E8FEB86659FD93ULL;
        out = splitmix64(state);
    }
    return out;
}

inline Engine make_engine(std::uint64_t seed) {
    std::uint64_t state = seed;
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state)),
                      static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state))};
    return Engine(seq);
}

/// Parses a decimal unsigned 64-bit seed. Throws InputError on anything else.
inline std::uint64_t parse_seed(std::string_view text) {
    std::uint64_t value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc{} || ptr != last)
        throw InputError("invalid seed '" + std::string(text) + "': expected an unsigned 64-bit decimal integer");
    return value;
}

} // namespace lqmle

#pragma once

#include <cstdint>

namespace hammersim::detail {

// Counter-based draws: every value depends only on its key, so results do not
// depend on evaluation order or thread count.

__extension__ typedef unsigned __int128 uint128;

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept { return mix64(x + kGolden); }

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept
{
    return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ull));
}

/// Uniform in the open interval (0, 1).
constexpr double unit_open(std::uint64_t h) noexcept
{
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

class SplitMix {
public:
    explicit constexpr SplitMix(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept
    {
        state_ += kGolden;
        return mix64(state_);
    }

    /// Uniform integer in [0, bound) by 64x64->128 multiply-shift.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept
    {
        const uint128 m = static_cast<uint128>(next()) * bound;
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    std::uint64_t state_;
};

} // namespace hammersim::detail

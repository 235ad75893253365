#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mkvcyl {

// Philox4x32-10 (Salmon et al. 2011). Stateless: every draw is a function of
// (key, counter), so any particle can be generated on any thread.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}
    {
    }

    Counter operator()(Counter ctr) const
    {
        Key k = key_;
        for (int r = 0; r < 10; ++r) {
            ctr = round(ctr, k);
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
        return ctr;
    }

private:
    static Counter round(const Counter& c, const Key& k)
    {
        const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
        const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
        return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    }

    Key key_;
};

// Uniform in (0,1) from 64 bits, 53-bit resolution, never exactly 0.
inline double to_unit_open(std::uint32_t hi, std::uint32_t lo)
{
    const std::uint64_t x = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(x) + 0.5) * 0x1.0p-53;
}

// One standard normal per (particle, mode, step), Box-Muller on one block.
inline double normal_at(const Philox4x32& g, std::uint32_t particle, std::uint32_t mode,
                        std::uint32_t step)
{
    const auto r = g({particle, mode, step, 0u});
    const double u1 = to_unit_open(r[0], r[1]);
    const double u2 = to_unit_open(r[2], r[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double uniform_at(const Philox4x32& g, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                         std::uint32_t d)
{
    const auto r = g({a, b, c, d});
    return to_unit_open(r[0], r[1]);
}

} // namespace mkvcyl

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace strobe {

// Counter-based generator (Philox4x32, 10 rounds). Every variate is a pure
// function of (seed, stream, event, draw), so shot-level work can be split
// across any number of workers and merged without changing a single draw.
namespace philox {

constexpr std::uint32_t kW32A = 0x9E3779B9u;
constexpr std::uint32_t kW32B = 0xBB67AE85u;
constexpr std::uint32_t kM4x32A = 0xD2511F53u;
constexpr std::uint32_t kM4x32B = 0xCD9E8D57u;
constexpr int kRounds = 10;

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline Counter round_once(const Counter& ctr, const Key& key) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM4x32A, ctr[0], hi0, lo0);
    mulhilo(kM4x32B, ctr[2], hi1, lo1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

inline Counter block(Counter ctr, Key key) {
    for (int r = 0; r < kRounds; ++r) {
        ctr = round_once(ctr, key);
        key[0] += kW32A;
        key[1] += kW32B;
    }
    return ctr;
}

}  // namespace philox

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// One independent substream of the master seed. `stream` addresses the logical
// unit of work (a probe-time column, a trajectory id, a click run id) and
// `event`/`draw` address the variate inside it.
class RandomSource {
public:
    RandomSource(std::uint64_t seed, std::uint64_t stream) {
        const std::uint64_t k = splitmix64(splitmix64(seed) ^ splitmix64(~stream));
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        stream_lo_ = static_cast<std::uint32_t>(stream);
    }

    std::array<std::uint32_t, 4> bits(std::uint64_t event, std::uint32_t draw) const {
        philox::Counter ctr = {static_cast<std::uint32_t>(event),
                               static_cast<std::uint32_t>(event >> 32), draw, stream_lo_};
        return philox::block(ctr, key_);
    }

    // Uniform on the open interval (0, 1); never returns an exact 0 or 1 so
    // logs and inverse CDFs stay finite.
    double uniform(std::uint64_t event, std::uint32_t draw) const {
        const auto w = bits(event, draw);
        const std::uint64_t mant =
            (static_cast<std::uint64_t>(w[0]) << 21) ^ (static_cast<std::uint64_t>(w[1]) >> 11);
        return (static_cast<double>(mant & ((1ull << 53) - 1)) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes draws (draw, draw+1).
    double normal(std::uint64_t event, std::uint32_t draw) const {
        const double u1 = uniform(event, draw);
        const double u2 = uniform(event, draw + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

private:
    philox::Key key_;
    std::uint32_t stream_lo_;
};

struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;  // separates statistically independent experiments

    RandomSource source(std::uint64_t substream) const {
        return RandomSource(master_seed, splitmix64(stream_id) + substream);
    }
};

}  // namespace strobe

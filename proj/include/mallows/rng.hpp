#pragma once

// Counter-based random streams (Philox4x32-10).
//
// Every random quantity in the library is drawn from a stream identified by
// a 64-bit key and a 64-bit stream coordinate. Child streams are derived with
// split(label), so the randomness of (replica, element, jump) is fixed by its
// coordinates and not by the order in which work is scheduled.

#include <array>
#include <cmath>
#include <cstdint>

namespace mallows {

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Maps a signed index onto the unsigned stream-label space without collisions.
constexpr std::uint64_t zigzag(std::int64_t i)
{
    return (static_cast<std::uint64_t>(i) << 1) ^ static_cast<std::uint64_t>(i >> 63);
}

namespace detail {

using PhiloxBlock = std::array<std::uint32_t, 4>;

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53U;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57U;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9U;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85U;

constexpr PhiloxBlock philox4x32_10(PhiloxBlock ctr, std::uint64_t key64)
{
    std::uint32_t k0 = static_cast<std::uint32_t>(key64);
    std::uint32_t k1 = static_cast<std::uint32_t>(key64 >> 32);
    for (int round = 0; round < 10; ++round) {
        std::uint64_t p0 = std::uint64_t{kPhiloxM0} * ctr[0];
        std::uint64_t p1 = std::uint64_t{kPhiloxM1} * ctr[2];
        auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        auto lo0 = static_cast<std::uint32_t>(p0);
        auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return ctr;
}

}  // namespace detail

/// Converts 64 random bits to a double uniform on the open interval (0, 1).
constexpr double bits_to_open_unit(std::uint64_t bits)
{
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

class CounterRng
{
  public:
    using result_type = std::uint64_t;

    constexpr CounterRng(std::uint64_t key, std::uint64_t stream = 0) : key_{key}, stream_{stream} {}

    /// Root stream of an experiment.
    static constexpr CounterRng from_seed(std::uint64_t seed) { return CounterRng{splitmix64(seed), 0}; }

    /// Deterministic child stream; independent of how much of *this has been consumed.
    constexpr CounterRng split(std::uint64_t label) const
    {
        std::uint64_t k = splitmix64(key_ ^ splitmix64(stream_ + 0x632BE59BD9B4E019ULL));
        return CounterRng{splitmix64(k ^ label), label};
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~std::uint64_t{0}; }

    constexpr result_type operator()()
    {
        if (lane_ == 0) {
            block_ = detail::philox4x32_10(
                {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                 static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                key_);
            ++counter_;
        }
        std::uint64_t out = (std::uint64_t{block_[lane_]} << 32) | block_[lane_ + 1];
        lane_ = (lane_ + 2) & 3;
        return out;
    }

    /// Uniform on (0, 1); never returns 0 or 1.
    double uniform() { return bits_to_open_unit((*this)()); }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound)
    {
        // Lemire's multiply-shift with rejection.
        std::uint64_t x = (*this)();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                x = (*this)();
                m = static_cast<__uint128_t>(x) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    constexpr std::uint64_t key() const { return key_; }
    constexpr std::uint64_t stream() const { return stream_; }

  private:
    std::uint64_t key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    detail::PhiloxBlock block_{};
    unsigned lane_ = 0;
};

/// Stateless uniform addressed by coordinates: the same (rng, a, b) always gives the same value.
inline double addressed_uniform(const CounterRng& rng, std::uint64_t a, std::uint64_t b)
{
    auto block = detail::philox4x32_10(
        {static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32), static_cast<std::uint32_t>(a),
         static_cast<std::uint32_t>(a >> 32)},
        splitmix64(rng.key() ^ splitmix64(rng.stream())));
    return bits_to_open_unit((std::uint64_t{block[0]} << 32) | block[1]);
}

}  // namespace mallows

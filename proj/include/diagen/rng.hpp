// SPDX-License-Identifier: MIT

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace diagen {

/// Seedable random source with a portable draw contract.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions in <random> are implementation-defined, so
/// every derived draw is spelled out here instead:
///   - index(n): rejection sampling on the raw 64-bit word, then `x % n`.
///   - uniform(): top 53 bits of one word scaled by 2^-53, in [0, 1).
///   - bernoulli(p): `uniform() < p`.
///   - normal(): Box-Muller, two uniforms per variate, cosine branch only.
/// Any implementation reproducing these rules reproduces every run.
class Rng {
public:
    using Engine = std::mt19937_64;

    explicit Rng(std::uint64_t seed) : engine_(seed) { }

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n)
    {
        const auto bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % bound + 1) % bound;
        std::uint64_t x = engine_();
        while (x > limit) {
            x = engine_();
        }
        return static_cast<std::size_t>(x % bound);
    }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    double normal(double mean = 0.0, double stddev = 1.0)
    {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// K distinct values from [0, n) by partial Fisher-Yates over a fresh
    /// identity array; returned in draw order.
    std::vector<std::size_t> sample(std::size_t n, std::size_t k)
    {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) {
            pool[i] = i;
        }
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(pool[i], pool[i + index(n - i)]);
        }
        pool.resize(k);
        return pool;
    }

    template <typename T>
    void shuffle(std::span<T> values)
    {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[index(i)]);
        }
    }

private:
    Engine engine_;
};

/// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Sub-seed for stream `stream` of master seed `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept
{
    return mix_seed(mix_seed(seed) ^ (stream + 0x632be59bd9b4e019ULL));
}

} // namespace diagen

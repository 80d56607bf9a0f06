#pragma once

// splitmix64 seeding and xoshiro256** streams. Every Monte Carlo replicate
// gets its own stream keyed by (seed, replicate), so results do not depend on
// how replicates are spread over workers.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sbe/distribution.hpp"
#include "sbe/exact.hpp"

namespace sbe {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    /// Independent stream for replicate `rep` of a run seeded with `seed`.
    static Xoshiro256 substream(std::uint64_t seed, std::uint64_t rep) {
        std::uint64_t sm = seed;
        const std::uint64_t a = splitmix64(sm);
        std::uint64_t mix = a ^ (rep * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
        return Xoshiro256(splitmix64(mix));
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, k).
    std::uint64_t below(std::uint64_t k) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(k));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_{};
};

/// Standard normal by Box-Muller; consumes two uniforms per call.
inline double standard_normal(Xoshiro256& rng) {
    const double u1 = 1.0 - rng.uniform();  // (0, 1]
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// One draw from a discrete law by inverse CDF on the double probabilities.
inline double draw(const DiscreteDistribution& d, Xoshiro256& rng) {
    double u = rng.uniform();
    const auto& p = d.probs();
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        if (u < p[k]) return d.values()[k];
        u -= p[k];
    }
    return d.values().back();
}

/// Random mean-zero law with `k` rational atoms and rational probabilities,
/// scaled so that E xi^2 <= `max_second`. Used to build randomized corpora.
inline DiscreteDistribution random_mean_zero_law(Xoshiro256& rng, std::size_t k, const Rational& max_second,
                                                 long spread = 8) {
    if (k < 2) throw ContractViolation("a mean-zero law needs at least two atoms");
    while (true) {
        std::vector<long long> weights(k);
        long long total = 0;
        for (auto& w : weights) {
            w = 1 + static_cast<long long>(rng.below(9));
            total += w;
        }
        std::vector<Rational> p(k), v(k);
        for (std::size_t j = 0; j < k; ++j) p[j] = Rational(weights[j], total);
        Rational mean = 0;
        for (std::size_t j = 0; j + 1 < k; ++j) {
            const long long num = static_cast<long long>(rng.below(static_cast<std::uint64_t>(4 * spread + 1))) - 2 * spread;
            v[j] = Rational(num, 4);
            mean += p[j] * v[j];
        }
        v[k - 1] = -mean / p[k - 1];
        bool distinct = true;
        for (std::size_t a = 0; a < k && distinct; ++a)
            for (std::size_t b = a + 1; b < k; ++b)
                if (v[a] == v[b]) {
                    distinct = false;
                    break;
                }
        if (!distinct) continue;
        Rational second = 0;
        for (std::size_t j = 0; j < k; ++j) second += p[j] * v[j] * v[j];
        if (second == 0) continue;
        // rational scale c <= sqrt(max_second / second), 1/1000 resolution
        const double target = std::sqrt(static_cast<double>(max_second / second));
        long long c_num = static_cast<long long>(std::floor(target * 1000));
        Rational c(c_num, 1000);
        while (c_num > 0 && c * c * second > max_second) c = Rational(--c_num, 1000);
        if (c_num <= 0) continue;
        std::vector<Atom> atoms;
        for (std::size_t j = 0; j < k; ++j) atoms.push_back({ExactReal(v[j] * c), p[j]});
        return DiscreteDistribution(atoms, "random");
    }
}

}  // namespace sbe

// Seeded random stream with explicit Gaussian sampling.
//
// Distributions are generated by hand (Box-Muller over mt19937_64 words) so
// that a given seed reproduces the same stream regardless of the standard
// library's <random> distribution internals.  Child streams derive from a
// parent seed via splitmix64, which is what makes frame-parallel simulation
// worker-count invariant.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pcm {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    std::uint8_t bit() { return static_cast<std::uint8_t>(eng_() >> 63); }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform01(); } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Deterministic child stream, e.g. one per simulated frame.
    static Rng derive(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
        return Rng(splitmix64(splitmix64((master ^ 0xa5a5a5a5a5a5a5a5ULL) + a) + b));
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace pcm

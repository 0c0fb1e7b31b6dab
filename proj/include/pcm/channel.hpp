// AWGN channel, per-level soft demapping, and capacity integrals.
//
// The 2^m-ary channel is split into m binary channels: level j sees the
// output y plus the already-decided bits b_1..b_{j-1}, and marginalizes the
// undecided higher bits.  Every integral over y is evaluated with the same
// 64-node Gauss-Hermite rule, one expansion per transmitted symbol, which
// keeps the per-level capacities and the 2^m-ary capacity on a common grid
// (their sum then telescopes to the total up to roundoff, not just up to
// quadrature error).
//
// All LLR work is done in the log domain with max-star accumulation.
// Capacities are in bits.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pcm/common.hpp"
#include "pcm/constellation.hpp"
#include "pcm/quadrature.hpp"
#include "pcm/rng.hpp"

namespace pcm {

inline constexpr double kLn2 = 0.6931471805599453;

// max-star: ln(e^a + e^b), exact and finite for finite inputs.
inline double max_star(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return (a > b ? a : b) + std::log1p(std::exp(-std::abs(a - b)));
}

struct AwgnChannel {
    double noise_std = 1.0;  // sigma per real dimension

    explicit AwgnChannel(double sigma) : noise_std(sigma) {
        require(sigma > 0.0, "AwgnChannel: sigma must be positive");
    }

    // Es/N0 in dB for a unit-energy constellation (N0 = 2 sigma^2).
    double snr_db() const { return 10.0 * std::log10(1.0 / (2.0 * noise_std * noise_std)); }
};

inline double sigma_from_esn0_db(double esn0_db) {
    return std::sqrt(std::pow(10.0, -esn0_db / 10.0) / 2.0);
}

inline double esn0_db_from_sigma(double sigma) {
    return 10.0 * std::log10(1.0 / (2.0 * sigma * sigma));
}

inline double sample(const AwgnChannel& ch, double x, Rng& rng) {
    return x + ch.noise_std * rng.gaussian();
}

// Everything level_llr needs: which level, what was decided below it, and
// the mapping in effect.
struct LevelContext {
    int level;                 // j in 1..m
    Bits prior_bits;           // b_1..b_{j-1}
    const Labeling* labeling;
    const Constellation* constellation;
    double noise_std;

    LevelContext(int j, Bits prior, const Labeling& lab, const Constellation& c, double sigma)
        : level(j), prior_bits(std::move(prior)), labeling(&lab), constellation(&c),
          noise_std(sigma) {
        require(j >= 1 && j <= c.bits_per_symbol, "LevelContext: level out of range");
        require(prior_bits.size() == static_cast<std::size_t>(j - 1),
                "LevelContext: prior bit count must be j-1");
        require(lab.bits_per_symbol() == c.bits_per_symbol,
                "LevelContext: labeling/constellation mismatch");
        require(sigma > 0.0, "LevelContext: sigma must be positive");
    }

    unsigned prior_value() const {
        unsigned v = 0;
        for (std::size_t i = 0; i < prior_bits.size(); ++i)
            v |= static_cast<unsigned>(prior_bits[i] & 1) << i;
        return v;
    }
};

namespace detail {

// ln W_j(...|0) - ln W_j(...|1) from precomputed candidate amplitudes.
inline double level_llr_core(const std::vector<double>& x0, const std::vector<double>& x1,
                             double y, double inv_two_sigma_sq) {
    double n0 = -std::numeric_limits<double>::infinity();
    double n1 = n0;
    for (double x : x0) {
        const double d = y - x;
        n0 = max_star(n0, -d * d * inv_two_sigma_sq);
    }
    for (double x : x1) {
        const double d = y - x;
        n1 = max_star(n1, -d * d * inv_two_sigma_sq);
    }
    return n0 - n1;
}

// Candidate amplitudes for bit value v at this level/prior.
inline std::vector<double> level_candidates(const Labeling& lab, const Constellation& c, int j,
                                            unsigned prior, unsigned v) {
    const int m = c.bits_per_symbol;
    std::vector<double> xs;
    xs.reserve(std::size_t{1} << (m - j));
    for (unsigned rest = 0; rest < (1u << (m - j)); ++rest) {
        const unsigned u = prior | (v << (j - 1)) | (rest << j);
        xs.push_back(c.points[lab.point_index(u)]);
    }
    return xs;
}

} // namespace detail

// LLR of bit b_j given y and the decided bits b_1..b_{j-1} (eq-probable
// higher bits marginalized; the common 1/2^{m-1} prior factor cancels).
inline double level_llr(const LevelContext& ctx, double y) {
    const double s = ctx.noise_std;
    const unsigned prior = ctx.prior_value();
    const auto x0 = detail::level_candidates(*ctx.labeling, *ctx.constellation, ctx.level, prior, 0);
    const auto x1 = detail::level_candidates(*ctx.labeling, *ctx.constellation, ctx.level, prior, 1);
    return detail::level_llr_core(x0, x1, y, 1.0 / (2.0 * s * s));
}

namespace detail {

inline double snap_unit(double v, double hi) {
    if (v < 0.0 && v > -1e-9) return 0.0;
    if (v > hi && v < hi + 1e-9) return hi;
    return v;
}

// Shared capacity sweep.  For each transmitted bit vector b and each
// quadrature node, evaluates the log-densities of all 2^m symbols once and
// hands them to the accumulator.
template <typename Accum>
void capacity_sweep(const Labeling& lab, const Constellation& c, double sigma, Accum&& acc) {
    const int m = c.bits_per_symbol;
    const unsigned M = 1u << m;
    const auto& q = gh64();
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    std::vector<double> x_of_u(M);
    for (unsigned u = 0; u < M; ++u) x_of_u[u] = c.points[lab.point_index(u)];
    std::vector<double> lnw(M);
    const double wnorm = 1.0 / std::sqrt(M_PI);
    for (unsigned b = 0; b < M; ++b) {
        for (int k = 0; k < static_cast<int>(q.nodes.size()); ++k) {
            const double y = x_of_u[b] + std::sqrt(2.0) * sigma * q.nodes[k];
            for (unsigned u = 0; u < M; ++u) {
                const double d = y - x_of_u[u];
                lnw[u] = -d * d * inv2s2;
            }
            acc(b, q.weights[k] * wnorm / M, lnw);
        }
    }
}

} // namespace detail

// I(W_j): symmetric capacity of the level-j binary channel, in bits.
inline double level_capacity(int j, const Labeling& lab, const Constellation& c, double sigma) {
    const int m = c.bits_per_symbol;
    require(j >= 1 && j <= m, "level_capacity: level out of range");
    const unsigned M = 1u << m;
    double cap = 0.0;
    detail::capacity_sweep(lab, c, sigma, [&](unsigned b, double w, const std::vector<double>& lnw) {
        double num = -std::numeric_limits<double>::infinity();
        double den = num;
        const unsigned mj = (1u << j) - 1, mj1 = (1u << (j - 1)) - 1;
        for (unsigned u = 0; u < M; ++u) {
            if ((u & mj) == (b & mj)) num = max_star(num, lnw[u]);
            if ((u & mj1) == (b & mj1)) den = max_star(den, lnw[u]);
        }
        // conditional densities normalize by 2^{m-j} and 2^{m-j+1}
        cap += w * (num - den + kLn2) / kLn2;
    });
    return detail::snap_unit(cap, 1.0);
}

// All m level capacities in one sweep (the labeling search hot path).
inline std::vector<double> level_capacity_profile(const Labeling& lab, const Constellation& c,
                                                  double sigma) {
    const int m = c.bits_per_symbol;
    const unsigned M = 1u << m;
    std::vector<double> caps(m, 0.0);
    detail::capacity_sweep(lab, c, sigma, [&](unsigned b, double w, const std::vector<double>& lnw) {
        double prev = -std::numeric_limits<double>::infinity();
        for (unsigned u = 0; u < M; ++u) prev = max_star(prev, lnw[u]);  // j=0: all symbols
        for (int j = 1; j <= m; ++j) {
            const unsigned mask = (1u << j) - 1;
            double cur = -std::numeric_limits<double>::infinity();
            for (unsigned u = 0; u < M; ++u)
                if ((u & mask) == (b & mask)) cur = max_star(cur, lnw[u]);
            caps[j - 1] += w * (cur - prev + kLn2) / kLn2;
            prev = cur;
        }
    });
    for (double& v : caps) v = detail::snap_unit(v, 1.0);
    return caps;
}

// I(W): symmetric capacity of the 2^m-ary channel, by direct quadrature.
// Independent of the labeling (it only permutes the sum).
inline double total_capacity(const Labeling& lab, const Constellation& c, double sigma) {
    const int m = c.bits_per_symbol;
    const unsigned M = 1u << m;
    double cap = 0.0;
    detail::capacity_sweep(lab, c, sigma, [&](unsigned b, double w, const std::vector<double>& lnw) {
        double mix = -std::numeric_limits<double>::infinity();
        for (unsigned u = 0; u < M; ++u) mix = max_star(mix, lnw[u]);
        cap += w * (lnw[b] - (mix - m * kLn2)) / kLn2;
    });
    return detail::snap_unit(cap, static_cast<double>(m));
}

// I(B_j; Y) with no conditioning: the parallel (bit-interleaved) bit channel.
inline double parallel_bit_capacity(int j, const Labeling& lab, const Constellation& c,
                                    double sigma) {
    const int m = c.bits_per_symbol;
    require(j >= 1 && j <= m, "parallel_bit_capacity: level out of range");
    const unsigned M = 1u << m;
    double cap = 0.0;
    detail::capacity_sweep(lab, c, sigma, [&](unsigned b, double w, const std::vector<double>& lnw) {
        double num = -std::numeric_limits<double>::infinity();
        double mix = num;
        const unsigned bit = (b >> (j - 1)) & 1u;
        for (unsigned u = 0; u < M; ++u) {
            mix = max_star(mix, lnw[u]);
            if (((u >> (j - 1)) & 1u) == bit) num = max_star(num, lnw[u]);
        }
        cap += w * ((num - kLn2 * (m - 1)) - (mix - kLn2 * m)) / kLn2;
    });
    return detail::snap_unit(cap, 1.0);
}

// Binary-input AWGN (BPSK on {-1,+1}) symmetric capacity.
inline double biawgn_capacity(double sigma) {
    static const Constellation bpsk = make_pam(1);
    static const Labeling nat = natural_labeling(1);
    return level_capacity(1, nat, bpsk, sigma);
}

// Inverse of biawgn_capacity, by bisection (capacity decreases in sigma).
inline double biawgn_sigma_for_capacity(double capacity_bits) {
    require(capacity_bits >= 1e-6 && capacity_bits <= 1.0 - 1e-6,
            "biawgn_sigma_for_capacity: capacity must be in [1e-6, 1-1e-6]");
    double lo = 1e-3, hi = 3000.0;  // C(lo) ~ 1, C(hi) < 1e-6
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double cm = biawgn_capacity(mid);
        if (std::abs(cm - capacity_bits) <= 1e-12) return mid;
        (cm > capacity_bits ? lo : hi) = mid;
        if (hi - lo < 1e-13 * hi) break;
    }
    return 0.5 * (lo + hi);
}

// sigma at which the 2^m-ary channel has the given total capacity.
inline double sigma_for_total_capacity(const Constellation& c, double target_bits) {
    const int m = c.bits_per_symbol;
    require(target_bits > 1e-6 && target_bits < m - 1e-6,
            "sigma_for_total_capacity: target must be inside (0, m)");
    const Labeling nat = natural_labeling(m);
    double lo = 1e-3, hi = 3000.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double cm = total_capacity(nat, c, mid);
        if (std::abs(cm - target_bits) <= 1e-12) return mid;
        (cm > target_bits ? lo : hi) = mid;
        if (hi - lo < 1e-13 * hi) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace pcm

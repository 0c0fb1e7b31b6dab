#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcm/channel.hpp"
#include "pcm/rng.hpp"

using namespace pcm;

namespace {

std::vector<int> random_table(int m, Rng& rng) {
    std::vector<int> t(std::size_t{1} << m);
    std::iota(t.begin(), t.end(), 0);
    for (std::size_t i = t.size() - 1; i > 0; --i)
        std::swap(t[i], t[rng.next_u64() % (i + 1)]);
    return t;
}

// Independent fine-grid trapezoid evaluation of the BPSK/AWGN capacity.
double biawgn_capacity_trapezoid(double sigma) {
    const double lo = -1.0 - 12.0 * sigma, hi = 1.0 + 12.0 * sigma;
    const int n = 200000;
    const double h = (hi - lo) / n;
    auto density = [&](double y, double x) {
        const double d = y - x;
        return std::exp(-d * d / (2 * sigma * sigma)) / std::sqrt(2 * M_PI * sigma * sigma);
    };
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double y = lo + i * h;
        const double p0 = density(y, -1.0), p1 = density(y, +1.0);
        double term = 0.0;
        if (p0 > 0) term += 0.5 * p0 * std::log2(2 * p0 / (p0 + p1));
        if (p1 > 0) term += 0.5 * p1 * std::log2(2 * p1 / (p0 + p1));
        acc += (i == 0 || i == n) ? 0.5 * term : term;
    }
    return acc * h;
}

// Brute-force linear-domain density sums for the level-j LLR.
double level_llr_linear_oracle(int j, unsigned prior, const Labeling& lab, const Constellation& c,
                               double sigma, double y) {
    const int m = c.bits_per_symbol;
    double num = 0.0, den = 0.0;
    for (unsigned rest = 0; rest < (1u << (m - j)); ++rest) {
        const unsigned u0 = prior | (0u << (j - 1)) | (rest << j);
        const unsigned u1 = prior | (1u << (j - 1)) | (rest << j);
        const double x0 = c.points[lab.point_index(u0)];
        const double x1 = c.points[lab.point_index(u1)];
        num += std::exp(-(y - x0) * (y - x0) / (2 * sigma * sigma));
        den += std::exp(-(y - x1) * (y - x1) / (2 * sigma * sigma));
    }
    return std::log(num) - std::log(den);
}

} // namespace

TEST_CASE("awgn sampling") {
    AwgnChannel ch(1.0);
    Rng a(123), b(123);
    for (int i = 0; i < 10; ++i) CHECK(sample(ch, 0.0, a) == sample(ch, 0.0, b));

    AwgnChannel tiny(1e-12);
    Rng r(5);
    CHECK(sample(tiny, 0.7, r) == Catch::Approx(0.7).margin(1e-10));

    // law of large numbers, 1e6 samples
    Rng big(999);
    const int n = 1000000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double y = sample(ch, 0.0, big);
        s += y;
        s2 += y * y;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 0.01);

    CHECK_THROWS_AS(AwgnChannel(0.0), InvalidParameter);
    CHECK(AwgnChannel(std::sqrt(0.5)).snr_db() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("level llr matches the closed form for bpsk") {
    const auto c = make_pam(1);
    const auto lab = natural_labeling(1);
    const double sigma = 0.8;
    for (double y : {-3.0, -0.5, 0.0, 0.2, 1.7}) {
        LevelContext ctx(1, {}, lab, c, sigma);
        CHECK(level_llr(ctx, y) == Catch::Approx(-2.0 * y / (sigma * sigma)).margin(1e-12));
    }
    LevelContext ctx(1, {}, lab, c, 1.0);
    CHECK(level_llr(ctx, 0.0) == 0.0);
}

TEST_CASE("level llr matches a linear-domain oracle (m=3)") {
    const auto c = make_pam(3);
    const auto lab = natural_labeling(3);
    const double sigma = 0.8;
    LevelContext ctx(2, Bits{0}, lab, c, sigma);
    const double got = level_llr(ctx, 0.5);
    const double want = level_llr_linear_oracle(2, 0u, lab, c, sigma, 0.5);
    CHECK(got == Catch::Approx(want).epsilon(1e-12));

    // exp(LLR) equals the density ratio across the output range
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Labeling rlab(3, random_table(3, rng));
        const int j = 1 + static_cast<int>(rng.next_u64() % 3);
        const unsigned prior = static_cast<unsigned>(rng.next_u64() % (1u << (j - 1)));
        Bits prior_bits(j - 1);
        for (int i = 0; i < j - 1; ++i) prior_bits[i] = (prior >> i) & 1;
        LevelContext rctx(j, prior_bits, rlab, c, sigma);
        for (double y = -10.0; y <= 10.0; y += 2.5) {
            const double llr = level_llr(rctx, y);
            CHECK(std::isfinite(llr));
            const double want2 = level_llr_linear_oracle(j, prior, rlab, c, sigma, y);
            CHECK(llr == Catch::Approx(want2).epsilon(1e-9).margin(1e-12));
        }
    }
}

TEST_CASE("level capacity limits") {
    const auto c = make_pam(3);
    const auto lab = natural_labeling(3);
    for (int j = 1; j <= 3; ++j) {
        const double lo = level_capacity(j, lab, c, 100.0);
        CHECK(lo >= 0.0);
        CHECK(lo < 1e-3);
        const double hi = level_capacity(j, lab, c, 0.01);
        CHECK(hi <= 1.0);
        CHECK(hi > 1.0 - 1e-3);
    }
}

TEST_CASE("biawgn capacity against trapezoid oracle at 0 dB") {
    const double sigma = sigma_from_esn0_db(0.0);
    CHECK(biawgn_capacity(sigma) == Catch::Approx(biawgn_capacity_trapezoid(sigma)).margin(1e-3));
}

TEST_CASE("chain rule: level capacities sum to the total") {
    const auto c = make_pam(3);
    const auto nat = natural_labeling(3);
    const double total = total_capacity(nat, c, 0.5);
    const auto caps = level_capacity_profile(nat, c, 0.5);
    const double sum = std::accumulate(caps.begin(), caps.end(), 0.0);
    CHECK(std::abs(sum - total) <= 1e-6);

    // random labelings, m in {2,3}, several noise levels
    Rng rng(77);
    for (int m : {2, 3}) {
        const auto cm = make_pam(m);
        for (double sigma : {0.3, 0.6, 1.0}) {
            for (int trial = 0; trial < 5; ++trial) {
                const Labeling lab(m, random_table(m, rng));
                const auto lc = level_capacity_profile(lab, cm, sigma);
                double s = 0;
                for (int j = 1; j <= m; ++j) {
                    CHECK(lc[j - 1] == Catch::Approx(level_capacity(j, lab, cm, sigma)).margin(1e-12));
                    CHECK(lc[j - 1] >= 0.0);
                    CHECK(lc[j - 1] <= 1.0);
                    s += lc[j - 1];
                }
                CHECK(std::abs(s - total_capacity(lab, cm, sigma)) <= 1e-6);
            }
        }
    }

    // m=1: total equals the single level capacity
    const auto c1 = make_pam(1);
    const auto n1 = natural_labeling(1);
    CHECK(total_capacity(n1, c1, 0.7) ==
          Catch::Approx(level_capacity(1, n1, c1, 0.7)).margin(1e-12));
}

TEST_CASE("total capacity does not depend on the labeling") {
    const auto c = make_pam(3);
    Rng rng(11);
    const double ref = total_capacity(natural_labeling(3), c, 0.5);
    for (int trial = 0; trial < 10; ++trial) {
        const Labeling lab(3, random_table(3, rng));
        CHECK(std::abs(total_capacity(lab, c, 0.5) - ref) <= 1e-9);
    }
}

TEST_CASE("complementing one bit position preserves every level capacity") {
    const auto c = make_pam(3);
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const Labeling lab(3, random_table(3, rng));
        const auto caps = level_capacity_profile(lab, c, 0.45);
        for (int j = 1; j <= 3; ++j) {
            auto flipped = lab.table();
            for (unsigned u = 0; u < 8; ++u)
                if (u & (1u << (j - 1))) std::swap(flipped[u ^ (1u << (j - 1))], flipped[u]);
            const Labeling flab(3, flipped);
            const auto fcaps = level_capacity_profile(flab, c, 0.45);
            for (int l = 0; l < 3; ++l) CHECK(std::abs(fcaps[l] - caps[l]) <= 1e-9);
        }
    }
}

TEST_CASE("biawgn sigma inversion") {
    for (double target : {0.1, 0.5, 0.9}) {
        const double sigma = biawgn_sigma_for_capacity(target);
        CHECK(biawgn_capacity(sigma) == Catch::Approx(target).margin(1e-8));
    }
    CHECK(biawgn_sigma_for_capacity(0.1) > biawgn_sigma_for_capacity(0.2));
    CHECK(biawgn_sigma_for_capacity(0.5) > biawgn_sigma_for_capacity(0.9));

    // coarse grid-search oracle around I = 0.5
    double best_sigma = 0, best_err = 1e9;
    for (double s = 0.2; s <= 3.0; s += 1e-3) {
        const double err = std::abs(biawgn_capacity(s) - 0.5);
        if (err < best_err) {
            best_err = err;
            best_sigma = s;
        }
    }
    CHECK(biawgn_sigma_for_capacity(0.5) == Catch::Approx(best_sigma).margin(2e-3));

    CHECK_THROWS_AS(biawgn_sigma_for_capacity(0.0), InvalidParameter);
    CHECK_THROWS_AS(biawgn_sigma_for_capacity(1.0), InvalidParameter);
}

TEST_CASE("parallel bit capacity sits between zero and the level capacities' total") {
    const auto c = make_pam(3);
    const auto g = gray_labeling(3);
    double par = 0, cond = 0;
    for (int j = 1; j <= 3; ++j) {
        const double pj = parallel_bit_capacity(j, g, c, 0.4);
        CHECK(pj >= 0.0);
        CHECK(pj <= 1.0);
        par += pj;
        cond += level_capacity(j, g, c, 0.4);
    }
    // chain rule beats parallel demapping (BICM loss)
    CHECK(par <= cond + 1e-9);
}

TEST_CASE("sigma for a target total capacity") {
    const auto c = make_pam(3);
    const double sigma = sigma_for_total_capacity(c, 1.4);
    CHECK(total_capacity(natural_labeling(3), c, sigma) == Catch::Approx(1.4).margin(1e-8));
    CHECK_THROWS_AS(sigma_for_total_capacity(c, 3.5), InvalidParameter);
}

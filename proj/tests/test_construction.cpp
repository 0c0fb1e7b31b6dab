#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pcm/construction.hpp"
#include "pcm/rng.hpp"

using namespace pcm;

TEST_CASE("ga evolve base cases") {
    CHECK(ga_evolve(3.0, 1) == std::vector<double>{3.0});
    const auto two = ga_evolve(3.0, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[1] == 6.0);          // variable node doubles the mean, exactly
    CHECK(two[0] < two[1]);
    CHECK(two[0] > 0.0);
    CHECK_THROWS_AS(ga_evolve(0.0, 4), InvalidParameter);
    CHECK_THROWS_AS(ga_evolve(1.0, 3), InvalidParameter);
}

TEST_CASE("ga evolve polarizes and stays finite") {
    const auto means = ga_evolve(4.0, 1024);
    REQUIRE(means.size() == 1024);
    for (double v : means) {
        CHECK(v > 0.0);
        CHECK(std::isfinite(v));
    }
    CHECK(means.back() == 4.0 * 1024);                  // all-variable path
    CHECK(means.front() < 0.1);                         // all-check path degrades
    // extremes of the sorted means spread from the channel value
    const auto mm = std::minmax_element(means.begin(), means.end());
    CHECK(*mm.first < 4.0);
    CHECK(*mm.second > 4.0);
}

TEST_CASE("surrogate mean: bpsk is its own surrogate") {
    const auto c = make_pam(1);
    const auto lab = natural_labeling(1);
    for (double sigma : {0.5, 0.8, 1.2}) {
        const auto s = surrogate_mean(1, lab, c, sigma);
        CHECK_FALSE(s.clamped);
        CHECK(s.mean == Catch::Approx(2.0 / (sigma * sigma)).epsilon(1e-6));
    }
    // monotone: larger capacity (smaller sigma) gives a larger mean
    const auto c3 = make_pam(3);
    const auto n3 = natural_labeling(3);
    CHECK(surrogate_mean(3, n3, c3, 0.3).mean > surrogate_mean(3, n3, c3, 0.6).mean);
    // extreme noise clamps
    CHECK(surrogate_mean(1, lab, c, 5000.0).clamped);
}

TEST_CASE("reliability profile layout and monotonicity") {
    const auto c = make_pam(3);
    const auto lab = natural_labeling(3);
    const auto p = build_reliability_profile(lab, c, 0.5, 16);
    REQUIRE(p.mean_llr.size() == 48);
    CHECK(p.level_of(0) == 1);
    CHECK(p.level_of(15) == 1);
    CHECK(p.level_of(16) == 2);
    CHECK(p.level_of(47) == 3);
    for (std::size_t i = 0; i < p.perr.size(); ++i) {
        CHECK(p.perr[i] > 0.0);
        CHECK(p.perr[i] <= 0.5);
    }
    // perr strictly decreases as the mean grows
    std::vector<std::size_t> idx(p.perr.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return p.mean_llr[a] < p.mean_llr[b]; });
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (p.mean_llr[idx[i]] > p.mean_llr[idx[i - 1]])
            CHECK(p.perr[idx[i]] < p.perr[idx[i - 1]]);
}

TEST_CASE("build_mlc_code selection") {
    const auto c = make_pam(3);
    const auto lab = natural_labeling(3);
    const std::size_t n = 64;

    SECTION("K = mN freezes nothing") {
        const auto spec = build_mlc_code(lab, c, 0.5, n, 3 * n);
        double sum = 0;
        const auto p = build_reliability_profile(lab, c, 0.5, n);
        for (double v : p.perr) sum += v;
        for (const auto& lvl : spec.levels) CHECK(lvl.info_count() == n);
        CHECK(spec.predicted_bler == Catch::Approx(sum).epsilon(1e-12));
    }

    SECTION("K out of range is rejected") {
        CHECK_THROWS_AS(build_mlc_code(lab, c, 0.5, n, 0), InvalidParameter);
        CHECK_THROWS_AS(build_mlc_code(lab, c, 0.5, n, 3 * n + 1), InvalidParameter);
    }

    SECTION("selection agrees with an independent re-implementation") {
        const std::size_t k = 77;
        const auto spec = build_mlc_code(lab, c, 0.42, n, k);
        const auto p = build_reliability_profile(lab, c, 0.42, n);
        // independent rule: count, for each channel, how many strictly
        // better channels exist; keep those with fewer than K
        std::vector<std::uint8_t> want_info(3 * n, 0);
        for (std::size_t i = 0; i < 3 * n; ++i) {
            std::size_t better = 0;
            for (std::size_t q = 0; q < 3 * n; ++q) {
                if (q == i) continue;
                const bool q_better =
                    (p.perr[q] != p.perr[i])
                        ? p.perr[q] < p.perr[i]
                        : (p.mean_llr[q] != p.mean_llr[i] ? p.mean_llr[q] > p.mean_llr[i] : q < i);
                better += q_better;
            }
            want_info[i] = better < k;
        }
        std::size_t kk = 0;
        for (int j = 0; j < 3; ++j)
            for (std::size_t t = 0; t < n; ++t) {
                CHECK(spec.levels[j].frozen_mask[t] == (want_info[j * n + t] ? 0 : 1));
                kk += !spec.levels[j].frozen_mask[t];
            }
        CHECK(kk == k);
    }

    SECTION("deterministic: identical inputs give identical masks") {
        const auto a = build_mlc_code(lab, c, 0.47, n, 100);
        const auto b = build_mlc_code(lab, c, 0.47, n, 100);
        for (int j = 0; j < 3; ++j) CHECK(a.levels[j].frozen_mask == b.levels[j].frozen_mask);
        CHECK(a.predicted_bler == b.predicted_bler);
    }

    SECTION("per-level allocation is non-uniform under a skewed labeling") {
        const auto spec = build_mlc_code(lab, c, sigma_for_total_capacity(c, 1.4), 512, 512);
        const auto caps = level_capacity_profile(lab, c, spec.sigma_design);
        // more capable levels carry at least as many info bits
        std::vector<int> order{1, 2, 3};
        std::sort(order.begin(), order.end(), [&](int a, int b) { return caps[a-1] < caps[b-1]; });
        CHECK(spec.level_info_count(order[0]) <= spec.level_info_count(order[1]));
        CHECK(spec.level_info_count(order[1]) <= spec.level_info_count(order[2]));
        CHECK(spec.level_info_count(order[0]) < spec.level_info_count(order[2]));
    }
}

TEST_CASE("max rate curve properties") {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(i * 0.05);
    const auto curve = max_rate_curve(1024, 1e-3, grid);
    REQUIRE(curve.size() == grid.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        CHECK(curve[i].rate <= curve[i].capacity);  // converse bound
        if (i) CHECK(curve[i].rate >= curve[i - 1].rate);
    }
    // near-noiseless channel supports nearly rate 1
    const auto top = max_rate_curve(1024, 1e-3, {1.0 - 1e-4});
    CHECK(top[0].rate >= 0.99);
    CHECK_THROWS_AS(max_rate_curve(1024, 0.0, grid), InvalidParameter);
    CHECK_THROWS_AS(max_rate_curve(1024, 1e-3, {1.5}), InvalidParameter);
}

TEST_CASE("code spec file round trip") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "pcm_test_spec";
    fs::create_directories(dir);
    const auto c = make_pam(3);
    const auto lab = gray_labeling(3);
    auto spec = build_mlc_code(lab, c, 0.41237, 32, 40);
    spec.labeling_ref = "lab.txt";
    write_labeling_file((dir / "lab.txt").string(), lab);
    const auto path = (dir / "code.pcs").string();
    write_code_spec_file(path, spec);

    const auto back = read_code_spec_file(path);
    CHECK(back.labeling == spec.labeling);
    CHECK(back.total_info == spec.total_info);
    CHECK(back.sigma_design == spec.sigma_design);
    CHECK(back.crc.width == spec.crc.width);
    CHECK(back.crc_inside == spec.crc_inside);
    for (int j = 0; j < 3; ++j)
        CHECK(back.levels[j].frozen_mask == spec.levels[j].frozen_mask);

    // write(read(x)) is byte-identical to write(x)
    std::ostringstream s1, s2;
    write_code_spec(s1, spec);
    write_code_spec(s2, back);
    CHECK(s1.str() == s2.str());

    std::ofstream bad((dir / "bad.pcs").string());
    bad << "m=3\nn=32\nk=40\nbogus\n";
    bad.close();
    CHECK_THROWS_AS(read_code_spec_file((dir / "bad.pcs").string()), ParseError);
}

TEST_CASE("default design sigma hits the capacity margin") {
    const auto c = make_pam(3);
    const double sigma = default_design_sigma(c, 512, 512);
    CHECK(total_capacity(natural_labeling(3), c, sigma) == Catch::Approx(1.4).margin(1e-6));
    // rate-1 edge stays inside the valid capacity range
    CHECK_NOTHROW(default_design_sigma(c, 512, 3 * 512));
}

// Polar code construction via Gaussian-approximation density evolution.
//
// Each demapped level is matched to a binary-input AWGN surrogate with the
// same symmetric capacity; the surrogate mean LLR 2/sigma_eq^2 is then pushed
// through the GA recursion (variable node doubles the mean, check node goes
// through phi).  phi and its inverse are evaluated in the log domain because
// polarized means overflow exp() range long before N gets interesting.
//
// Index convention matches the decoders: natural order, no bit-reversal;
// global channel index i in 0..mN-1 belongs to level j = i/N + 1.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "pcm/channel.hpp"
#include "pcm/common.hpp"
#include "pcm/constellation.hpp"
#include "pcm/crc.hpp"
#include "pcm/polar.hpp"

namespace pcm {

inline double q_func(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

namespace detail {

// ln phi(x), two-piece closed form of the GA integral.
inline double ga_lnphi(double x) {
    if (x < 10.0) return -0.4527 * std::pow(x, 0.86) + 0.0218;
    return 0.5 * (std::log(M_PI) - std::log(x)) - x / 4.0 + std::log1p(-10.0 / (7.0 * x));
}

inline double ga_lnphi_inv(double t) {
    const double t10 = ga_lnphi(10.0);
    if (t > t10) return std::pow((0.0218 - t) / 0.4527, 1.0 / 0.86);
    double lo = 10.0, hi = std::max(50.0, -4.0 * t + 50.0);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ga_lnphi(mid) > t ? lo : hi) = mid;
        if (hi - lo <= 1e-9 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

// Check-node mean: phi^-1(1 - (1 - phi(m))^2) = phi^-1(2 phi - phi^2).
inline double ga_check(double mean) {
    const double t = ga_lnphi(mean);
    return ga_lnphi_inv(t + std::log1p(1.0 - std::exp(t)));
}

} // namespace detail

// Mean LLRs of the N polarized channels of one level, natural index order.
inline std::vector<double> ga_evolve(double mean0, std::size_t block_length) {
    require(mean0 > 0.0, "ga_evolve: mean must be positive");
    require(is_power_of_two(block_length), "ga_evolve: N must be a power of two");
    std::vector<double> v{mean0};
    std::vector<double> next;
    while (v.size() < block_length) {
        next.resize(2 * v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            next[2 * i] = detail::ga_check(v[i]);
            next[2 * i + 1] = 2.0 * v[i];
        }
        std::swap(v, next);
    }
    return v;
}

struct SurrogateMean {
    double mean = 0.0;
    bool clamped = false;  // level capacity fell outside (1e-6, 1-1e-6)
};

// Capacity-matched BI-AWGN surrogate for level j.
inline SurrogateMean surrogate_mean(int level, const Labeling& lab, const Constellation& c,
                                    double sigma) {
    double cap = level_capacity(level, lab, c, sigma);
    SurrogateMean s;
    if (cap < 1e-6) { cap = 1e-6; s.clamped = true; }
    if (cap > 1.0 - 1e-6) { cap = 1.0 - 1e-6; s.clamped = true; }
    const double sigma_eq = biawgn_sigma_for_capacity(cap);
    s.mean = 2.0 / (sigma_eq * sigma_eq);
    return s;
}

struct ReliabilityProfile {
    int m = 0;
    std::size_t block_length = 0;         // N per level
    std::vector<double> mean_llr;         // mN entries
    std::vector<double> perr;             // mN entries, Q(sqrt(mean/2))
    std::vector<std::uint8_t> level_clamped;

    int level_of(std::size_t i) const { return static_cast<int>(i / block_length) + 1; }
};

inline ReliabilityProfile build_reliability_profile(const Labeling& lab, const Constellation& c,
                                                    double sigma_design, std::size_t block_length) {
    const int m = c.bits_per_symbol;
    ReliabilityProfile p;
    p.m = m;
    p.block_length = block_length;
    p.mean_llr.resize(m * block_length);
    p.perr.resize(m * block_length);
    p.level_clamped.assign(m, 0);
    for (int j = 1; j <= m; ++j) {
        const SurrogateMean s = surrogate_mean(j, lab, c, sigma_design);
        p.level_clamped[j - 1] = s.clamped;
        const auto means = ga_evolve(s.mean, block_length);
        for (std::size_t t = 0; t < block_length; ++t) {
            const std::size_t i = static_cast<std::size_t>(j - 1) * block_length + t;
            p.mean_llr[i] = means[t];
            p.perr[i] = q_func(std::sqrt(means[t] / 2.0));
        }
    }
    return p;
}

// Smallest-perr-first selection of K info channels over all mN.  Ties (which
// only arise when Q() underflows to zero) fall back to the larger mean, then
// the smaller index.
inline std::vector<std::size_t> select_information_set(const ReliabilityProfile& p, std::size_t k) {
    std::vector<std::size_t> idx(p.perr.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (p.perr[a] != p.perr[b]) return p.perr[a] < p.perr[b];
        if (p.mean_llr[a] != p.mean_llr[b]) return p.mean_llr[a] > p.mean_llr[b];
        return a < b;
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

struct MlcCodeSpec {
    Labeling labeling;
    Constellation constellation;
    std::vector<PolarCodeLevel> levels;   // m entries
    std::size_t total_info = 0;           // K
    double sigma_design = 0.0;
    double predicted_bler = 0.0;
    CrcConfig crc = default_crc16();
    bool crc_inside = true;               // CRC bits counted inside K
    std::string labeling_ref;             // path recorded in the spec file

    int m() const { return constellation.bits_per_symbol; }
    std::size_t block_length() const { return levels.empty() ? 0 : levels[0].block_length; }
    double rate() const {
        return static_cast<double>(total_info) / (static_cast<double>(m()) * block_length());
    }
    std::size_t level_info_count(int j) const { return levels[j - 1].info_count(); }
};

inline MlcCodeSpec build_mlc_code(const Labeling& lab, const Constellation& c, double sigma_design,
                                  std::size_t block_length, std::size_t k) {
    const int m = c.bits_per_symbol;
    require(lab.bits_per_symbol() == m, "build_mlc_code: labeling/constellation mismatch");
    const std::size_t total = m * block_length;
    require(k >= 1 && k <= total, "build_mlc_code: K must be in 1..mN");
    const ReliabilityProfile p = build_reliability_profile(lab, c, sigma_design, block_length);
    const auto selected = select_information_set(p, k);

    MlcCodeSpec spec;
    spec.labeling = lab;
    spec.constellation = c;
    spec.total_info = k;
    spec.sigma_design = sigma_design;
    std::vector<std::uint8_t> frozen(total, 1);
    double pb = 0.0;
    for (std::size_t i : selected) {
        frozen[i] = 0;
        pb += p.perr[i];
    }
    spec.predicted_bler = pb;
    spec.levels.reserve(m);
    for (int j = 0; j < m; ++j) {
        std::vector<std::uint8_t> mask(frozen.begin() + j * block_length,
                                       frozen.begin() + (j + 1) * block_length);
        spec.levels.emplace_back(block_length, std::move(mask));
    }
    return spec;
}

struct RatePoint {
    double capacity;  // I of the BI-AWGN surrogate channel
    double rate;      // largest K/N with union-bound BLER <= target
};

// The maximum-rate-vs-capacity curve for a single binary polar code.
inline std::vector<RatePoint> max_rate_curve(std::size_t block_length, double target_bler,
                                             const std::vector<double>& capacity_grid) {
    require(target_bler > 0.0 && target_bler < 1.0, "max_rate_curve: target BLER in (0,1)");
    std::vector<RatePoint> out;
    out.reserve(capacity_grid.size());
    for (double cap : capacity_grid) {
        require(cap >= 1e-6 && cap <= 1.0 - 1e-6, "max_rate_curve: grid point outside (0,1)");
        const double sigma_eq = biawgn_sigma_for_capacity(cap);
        auto means = ga_evolve(2.0 / (sigma_eq * sigma_eq), block_length);
        std::sort(means.begin(), means.end(), std::greater<double>());
        double sum = 0.0;
        std::size_t k = 0;
        while (k < block_length) {
            sum += q_func(std::sqrt(means[k] / 2.0));
            if (sum > target_bler) break;
            ++k;
        }
        out.push_back({cap, static_cast<double>(k) / static_cast<double>(block_length)});
    }
    return out;
}

// Design noise level: sigma at which I(W) = K/N + margin bits (clamped away
// from the 0..m endpoints).
inline double default_design_sigma(const Constellation& c, std::size_t block_length, std::size_t k,
                                   double margin_bits = 0.4) {
    const double m = c.bits_per_symbol;
    double target = static_cast<double>(k) / static_cast<double>(block_length) + margin_bits;
    target = std::min(target, m - 1e-3);
    target = std::max(target, 1e-3);
    return sigma_for_total_capacity(c, target);
}

// --- code-spec file ----------------------------------------------------------
//
//   key=value header (m, n, k, sigma_design, labeling, crc_*), then one line
//   of mN characters, 'F' frozen / 'I' information, natural index order.

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_code_spec(std::ostream& os, const MlcCodeSpec& spec) {
    os << "m=" << spec.m() << "\n";
    os << "n=" << spec.block_length() << "\n";
    os << "k=" << spec.total_info << "\n";
    os << "sigma_design=" << format_double(spec.sigma_design) << "\n";
    os << "labeling=" << spec.labeling_ref << "\n";
    char hex[16];
    std::snprintf(hex, sizeof(hex), "0x%X", spec.crc.polynomial);
    os << "crc_width=" << spec.crc.width << "\n";
    os << "crc_poly=" << hex << "\n";
    std::snprintf(hex, sizeof(hex), "0x%X", spec.crc.initial);
    os << "crc_init=" << hex << "\n";
    std::snprintf(hex, sizeof(hex), "0x%X", spec.crc.final_xor);
    os << "crc_xorout=" << hex << "\n";
    os << "crc_mode=" << (spec.crc_inside ? "inside" : "outside") << "\n";
    for (int j = 1; j <= spec.m(); ++j)
        for (std::size_t t = 0; t < spec.block_length(); ++t)
            os << (spec.levels[j - 1].frozen_mask[t] ? 'F' : 'I');
    os << "\n";
}

inline void write_code_spec_file(const std::string& path, const MlcCodeSpec& spec) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    write_code_spec(os, spec);
}

inline MlcCodeSpec read_code_spec_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path);
    int m = -1;
    std::size_t n = 0, k = 0;
    double sigma = -1.0;
    std::string labeling_ref, mask_line;
    CrcConfig crc = default_crc16();
    bool crc_inside = true;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& why) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of("FI") != std::string::npos) fail("unrecognized line");
            mask_line = line;
            continue;
        }
        const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        try {
            if (key == "m") m = std::stoi(val);
            else if (key == "n") n = std::stoul(val);
            else if (key == "k") k = std::stoul(val);
            else if (key == "sigma_design") sigma = std::stod(val);
            else if (key == "labeling") labeling_ref = val;
            else if (key == "crc_width") crc.width = std::stoi(val);
            else if (key == "crc_poly") crc.polynomial = std::stoul(val, nullptr, 0);
            else if (key == "crc_init") crc.initial = std::stoul(val, nullptr, 0);
            else if (key == "crc_xorout") crc.final_xor = std::stoul(val, nullptr, 0);
            else if (key == "crc_mode") crc_inside = (val == "inside");
            else fail("unknown key '" + key + "'");
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            fail("bad value for key '" + key + "'");
        }
    }
    auto fail_file = [&](const std::string& why) { throw ParseError(path + ": " + why); };
    if (m < 1) fail_file("missing m");
    if (n == 0) fail_file("missing n");
    if (sigma <= 0.0) fail_file("missing sigma_design");
    if (labeling_ref.empty()) fail_file("missing labeling reference");
    if (mask_line.size() != static_cast<std::size_t>(m) * n) fail_file("mask length != m*n");

    // The labeling reference resolves relative to the spec file's directory.
    namespace fs = std::filesystem;
    fs::path lab_path(labeling_ref);
    if (lab_path.is_relative()) lab_path = fs::path(path).parent_path() / lab_path;
    MlcCodeSpec spec;
    spec.labeling = read_labeling_file(lab_path.string());
    require(spec.labeling.bits_per_symbol() == m, "code spec: labeling has wrong m");
    spec.constellation = make_pam(m);
    spec.total_info = k;
    spec.sigma_design = sigma;
    spec.crc = crc;
    spec.crc_inside = crc_inside;
    spec.labeling_ref = labeling_ref;
    std::size_t info_seen = 0;
    for (int j = 0; j < m; ++j) {
        std::vector<std::uint8_t> mask(n);
        for (std::size_t t = 0; t < n; ++t) {
            mask[t] = (mask_line[j * n + t] == 'F');
            info_seen += !mask[t];
        }
        spec.levels.emplace_back(n, std::move(mask));
    }
    require(info_seen == k, "code spec: mask info count != k");
    return spec;
}

} // namespace pcm

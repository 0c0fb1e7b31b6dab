// Exhaustive search over the canonical labelings.
//
// Figure of merit: union-bound predicted BLER of the GA construction at a
// single design sigma.  The full ranking is kept so the metric stays
// auditable against simulation.  Candidates are evaluated in parallel by
// partitioning the enumeration by index; the assembled report does not
// depend on the worker count.

#pragma once

#include <algorithm>
#include <fstream>
#include <thread>
#include <vector>

#include "pcm/common.hpp"
#include "pcm/constellation.hpp"
#include "pcm/construction.hpp"

namespace pcm {

struct SearchEntry {
    Labeling labeling;
    double predicted_bler = 0.0;
    std::vector<double> level_capacities;  // I(W_1..m) at the design sigma
};

struct SearchReport {
    int m = 0;
    std::size_t block_length = 0;
    std::size_t total_info = 0;
    double sigma_design = 0.0;
    std::size_t evaluated_count = 0;
    std::vector<SearchEntry> ranked;  // ascending predicted BLER

    const Labeling& best() const { return ranked.front().labeling; }
};

inline double evaluate_labeling(const Labeling& lab, const Constellation& c, double sigma_design,
                                std::size_t block_length, std::size_t k) {
    return build_mlc_code(lab, c, sigma_design, block_length, k).predicted_bler;
}

// m = 4 means 6.4e8 constructions; it streams (bounded ranking, single
// worker) and must be requested via allow_large.
inline SearchReport search_optimal_labeling(int m, std::size_t block_length, std::size_t k,
                                            double sigma_design, unsigned workers = 1,
                                            bool allow_large = false) {
    require(m >= 1 && m <= 4, "search_optimal_labeling: m must be in 1..4");
    require(is_power_of_two(block_length), "search_optimal_labeling: N must be a power of two");
    const Constellation c = make_pam(m);

    if (m == 4) {
        require(allow_large, "search_optimal_labeling: m = 4 requires allow_large");
        SearchReport rep;
        rep.m = m;
        rep.block_length = block_length;
        rep.total_info = k;
        rep.sigma_design = sigma_design;
        constexpr std::size_t kMaxRanked = 4096;
        for_each_canonical_labeling(m, [&](const Labeling& lab) {
            SearchEntry e;
            e.labeling = lab;
            e.level_capacities = level_capacity_profile(lab, c, sigma_design);
            e.predicted_bler = evaluate_labeling(lab, c, sigma_design, block_length, k);
            rep.ranked.push_back(std::move(e));
            ++rep.evaluated_count;
            if (rep.ranked.size() > 2 * kMaxRanked) {
                std::sort(rep.ranked.begin(), rep.ranked.end(),
                          [](const SearchEntry& a, const SearchEntry& b) {
                              if (a.predicted_bler != b.predicted_bler)
                                  return a.predicted_bler < b.predicted_bler;
                              return a.labeling < b.labeling;
                          });
                rep.ranked.resize(kMaxRanked);
            }
            return true;
        }, /*allow_large=*/true);
        std::sort(rep.ranked.begin(), rep.ranked.end(),
                  [](const SearchEntry& a, const SearchEntry& b) {
                      if (a.predicted_bler != b.predicted_bler)
                          return a.predicted_bler < b.predicted_bler;
                      return a.labeling < b.labeling;
                  });
        if (rep.ranked.size() > kMaxRanked) rep.ranked.resize(kMaxRanked);
        return rep;
    }

    std::vector<Labeling> cands;
    cands.reserve(static_cast<std::size_t>(count_candidates(m)));
    for_each_canonical_labeling(m, [&](const Labeling& lab) {
        cands.push_back(lab);
        return true;
    });

    std::vector<SearchEntry> entries(cands.size());
    workers = std::max(1u, workers);
    auto eval_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            SearchEntry e;
            e.labeling = cands[i];
            e.level_capacities = level_capacity_profile(cands[i], c, sigma_design);
            e.predicted_bler = evaluate_labeling(cands[i], c, sigma_design, block_length, k);
            entries[i] = std::move(e);
        }
    };
    if (workers == 1 || cands.size() < 2) {
        eval_range(0, cands.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (cands.size() + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t lo = std::min(cands.size(), w * chunk);
            const std::size_t hi = std::min(cands.size(), lo + chunk);
            if (lo < hi) pool.emplace_back(eval_range, lo, hi);
        }
        for (auto& t : pool) t.join();
    }

    std::sort(entries.begin(), entries.end(), [](const SearchEntry& a, const SearchEntry& b) {
        if (a.predicted_bler != b.predicted_bler) return a.predicted_bler < b.predicted_bler;
        return a.labeling < b.labeling;
    });

    SearchReport rep;
    rep.m = m;
    rep.block_length = block_length;
    rep.total_info = k;
    rep.sigma_design = sigma_design;
    rep.evaluated_count = entries.size();
    rep.ranked = std::move(entries);
    return rep;
}

// --- report CSV --------------------------------------------------------------
//
//   rank,labeling,predicted_bler,I_W1,...,I_Wm

inline void write_search_report(std::ostream& os, const SearchReport& rep) {
    os << "rank,labeling,predicted_bler";
    for (int j = 1; j <= rep.m; ++j) os << ",I_W" << j;
    os << "\n";
    for (std::size_t r = 0; r < rep.ranked.size(); ++r) {
        const auto& e = rep.ranked[r];
        os << (r + 1) << "," << e.labeling.to_string() << "," << format_double(e.predicted_bler);
        for (double cap : e.level_capacities) os << "," << format_double(cap);
        os << "\n";
    }
}

inline void write_search_report_file(const std::string& path, const SearchReport& rep) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    write_search_report(os, rep);
}

} // namespace pcm

// PAM constellation geometry and constellation labelings.
//
// A labeling is the bijection between m-bit vectors and constellation point
// indices.  Bit convention, fixed across the whole library: b_1 is the least
// significant bit of the integer value u of a bit vector, so "the j-1 low
// bits of u" are always the bits decided before level j.
//
// Two labelings are equivalent when one maps onto the other by flipping some
// bit b_j conditioned on the value of the lower bits b_1..b_{j-1}; such flips
// leave every level capacity unchanged because the lower bits are part of the
// level-j channel output.  There are 2^(2^m - 1) such operations, so the
// (2^m)! labelings fall into (2^m)!/2^(2^m-1) classes.  The enumeration below
// yields exactly one canonical representative per class: in each recursive
// split the half containing the lowest-indexed remaining point takes bit 0.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "pcm/common.hpp"

namespace pcm {

struct Constellation {
    int bits_per_symbol = 0;            // m
    int order = 0;                      // 2^m
    std::vector<double> points;         // strictly increasing, unit mean square

    double point(std::size_t idx) const { return points[idx]; }
};

// Equally spaced 2^m-PAM scaled to unit average symbol energy.
inline Constellation make_pam(int m) {
    require(m >= 1 && m <= 6, "make_pam: m must be in 1..6");
    Constellation c;
    c.bits_per_symbol = m;
    c.order = 1 << m;
    c.points.resize(c.order);
    double energy = 0.0;
    for (int k = 0; k < c.order; ++k) {
        const double a = 2.0 * k - (c.order - 1);
        c.points[k] = a;
        energy += a * a;
    }
    const double scale = 1.0 / std::sqrt(energy / c.order);
    for (double& p : c.points) p *= scale;
    return c;
}

class Labeling {
public:
    Labeling() = default;

    // table[u] = point index assigned to the bit vector of integer value u.
    Labeling(int m, std::vector<int> table) : m_(m), table_(std::move(table)) {
        require(m_ >= 1, "Labeling: m must be >= 1");
        require(table_.size() == (std::size_t{1} << m_), "Labeling: table size != 2^m");
        std::vector<bool> seen(table_.size(), false);
        for (int p : table_) {
            require(p >= 0 && p < static_cast<int>(table_.size()) && !seen[p],
                    "Labeling: table is not a permutation");
            seen[p] = true;
        }
        inverse_.resize(table_.size());
        for (std::size_t u = 0; u < table_.size(); ++u) inverse_[table_[u]] = static_cast<int>(u);
    }

    int bits_per_symbol() const { return m_; }
    int order() const { return 1 << m_; }
    const std::vector<int>& table() const { return table_; }

    int point_index(unsigned u) const { return table_[u]; }
    int label_of_point(int point) const { return inverse_[point]; }

    bool operator==(const Labeling& o) const { return m_ == o.m_ && table_ == o.table_; }

    // Labelings compare by table, lexicographically; used for tie-breaking.
    bool operator<(const Labeling& o) const { return table_ < o.table_; }

    std::string to_string() const {
        std::string s;
        for (std::size_t u = 0; u < table_.size(); ++u) {
            if (u) s += '-';
            s += std::to_string(table_[u]);
        }
        return s;
    }

private:
    int m_ = 0;
    std::vector<int> table_;
    std::vector<int> inverse_;
};

inline Labeling natural_labeling(int m) {
    require(m >= 1, "natural_labeling: m must be >= 1");
    std::vector<int> t(std::size_t{1} << m);
    std::iota(t.begin(), t.end(), 0);
    return Labeling(m, std::move(t));
}

// Binary-reflected Gray code: point k carries label k ^ (k >> 1), so the
// labels of adjacent points differ in exactly one bit.
inline Labeling gray_labeling(int m) {
    require(m >= 1, "gray_labeling: m must be >= 1");
    std::vector<int> t(std::size_t{1} << m);
    for (int k = 0; k < (1 << m); ++k) t[k ^ (k >> 1)] = k;
    return Labeling(m, std::move(t));
}

// Amplitude transmitted for a bit vector (b_1 = LSB of u).
inline double apply_labeling(const Labeling& lab, const Constellation& c, unsigned u) {
    require(lab.bits_per_symbol() == c.bits_per_symbol,
            "apply_labeling: labeling/constellation dimension mismatch");
    return c.points[lab.point_index(u)];
}

inline double apply_labeling(const Labeling& lab, const Constellation& c, const Bits& bits) {
    require(static_cast<int>(bits.size()) == lab.bits_per_symbol(),
            "apply_labeling: bit vector length mismatch");
    unsigned u = 0;
    for (std::size_t j = 0; j < bits.size(); ++j) u |= static_cast<unsigned>(bits[j] & 1) << j;
    return apply_labeling(lab, c, u);
}

// Number of labeling equivalence classes: (2^m)! / 2^(2^m - 1).
inline unsigned __int128 count_candidates(int m) {
    require(m >= 1 && m <= 5, "count_candidates: m must be in 1..5");
    unsigned __int128 fact = 1;
    for (int k = 2; k <= (1 << m); ++k) fact *= static_cast<unsigned>(k);
    return fact >> ((1 << m) - 1);
}

namespace detail {

struct SplitComponent {
    std::vector<int> points;  // ascending
    unsigned base_u;          // value of the already-assigned low bits
    int next_bit;             // 1-based bit position this component assigns next
};

template <typename Visitor>
bool enumerate_splits(std::vector<SplitComponent>& comps, int m, std::vector<int>& table,
                      Visitor&& visit) {
    std::size_t idx = 0;
    while (idx < comps.size() && comps[idx].points.size() == 1) ++idx;
    if (idx == comps.size()) {
        for (const auto& c : comps) table[c.base_u] = c.points[0];
        return visit(table);
    }
    const SplitComponent comp = comps[idx];
    const std::size_t n = comp.points.size();
    const std::size_t half = n / 2;
    // Choose the half that takes bit value 0; it must contain the lowest
    // point, so we pick the other half-1 members from the rest, in
    // lexicographic subset order.
    std::vector<std::size_t> pick(half - 1);
    std::iota(pick.begin(), pick.end(), 1);  // indices into comp.points, 0 is forced
    for (;;) {
        SplitComponent zero, one;
        zero.base_u = comp.base_u;
        one.base_u = comp.base_u | (1u << (comp.next_bit - 1));
        zero.next_bit = one.next_bit = comp.next_bit + 1;
        std::vector<bool> in_zero(n, false);
        in_zero[0] = true;
        for (std::size_t p : pick) in_zero[p] = true;
        for (std::size_t i = 0; i < n; ++i)
            (in_zero[i] ? zero.points : one.points).push_back(comp.points[i]);
        comps[idx] = std::move(zero);
        comps.insert(comps.begin() + idx + 1, std::move(one));
        if (!enumerate_splits(comps, m, table, visit)) return false;
        comps.erase(comps.begin() + idx + 1);
        comps[idx] = comp;
        // next combination of {1..n-1} choose half-1
        if (half == 1) break;
        int i = static_cast<int>(half) - 2;
        while (i >= 0 && pick[i] == n - (half - 1) + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (std::size_t k = i + 1; k < half - 1; ++k) pick[k] = pick[k - 1] + 1;
    }
    return true;
}

} // namespace detail

// Streams every canonical labeling to the visitor (depth-first over the
// recursive splits, each split in lexicographic subset order).  The visitor
// returns false to stop early.  m = 4 already means 6.4e8 candidates, so it
// must be requested explicitly.
template <typename Visitor>
void for_each_canonical_labeling(int m, Visitor&& visit, bool allow_large = false) {
    require(m >= 1 && m <= 4, "for_each_canonical_labeling: m must be in 1..4");
    require(m < 4 || allow_large,
            "for_each_canonical_labeling: m = 4 enumerates ~6.4e8 labelings; pass allow_large");
    std::vector<detail::SplitComponent> comps(1);
    comps[0].points.resize(std::size_t{1} << m);
    std::iota(comps[0].points.begin(), comps[0].points.end(), 0);
    comps[0].base_u = 0;
    comps[0].next_bit = 1;
    std::vector<int> table(std::size_t{1} << m);
    detail::enumerate_splits(comps, m, table, [&](const std::vector<int>& t) {
        return visit(Labeling(m, t));
    });
}

// Materialized enumeration for desk-scale m.
inline std::vector<Labeling> enumerate_canonical_labelings(int m) {
    require(m >= 1 && m <= 3, "enumerate_canonical_labelings: m must be in 1..3 (use the"
                              " streaming form for m = 4)");
    std::vector<Labeling> out;
    out.reserve(static_cast<std::size_t>(count_candidates(m)));
    for_each_canonical_labeling(m, [&](const Labeling& lab) {
        out.push_back(lab);
        return true;
    });
    return out;
}

// Canonical representative of a labeling's equivalence class.  Walks bit
// positions from b_1 up; for every value c of the lower bits, the half whose
// lowest point sits on the b_j = 1 side gets flipped there.
inline Labeling canonicalize_labeling(const Labeling& lab) {
    const int m = lab.bits_per_symbol();
    std::vector<int> t = lab.table();
    const unsigned M = 1u << m;
    for (int j = 1; j <= m; ++j) {
        const unsigned lo = 1u << (j - 1);
        for (unsigned c = 0; c < lo; ++c) {
            int best = static_cast<int>(M);
            bool best_in_one = false;
            for (unsigned u = c; u < M; u += 2 * lo) {
                if (t[u] < best) { best = t[u]; best_in_one = false; }
                if (t[u + lo] < best) { best = t[u + lo]; best_in_one = true; }
            }
            if (best_in_one)
                for (unsigned u = c; u < M; u += 2 * lo) std::swap(t[u], t[u + lo]);
        }
    }
    return Labeling(m, std::move(t));
}

enum class LabelingKind { Natural, Gray, CanonicalEnumerated, Explicit };

// A labeling source as it appears in configs: a named family, the i-th entry
// of the canonical enumeration, or a full table.
struct LabelingFamily {
    LabelingKind kind = LabelingKind::Natural;
    std::size_t canonical_index = 0;  // used when kind == CanonicalEnumerated
    Labeling explicit_table;          // used when kind == Explicit

    Labeling make(int m) const {
        switch (kind) {
            case LabelingKind::Natural: return natural_labeling(m);
            case LabelingKind::Gray: return gray_labeling(m);
            case LabelingKind::CanonicalEnumerated: {
                Labeling found;
                std::size_t i = 0;
                bool ok = false;
                for_each_canonical_labeling(m, [&](const Labeling& lab) {
                    if (i++ == canonical_index) {
                        found = lab;
                        ok = true;
                        return false;
                    }
                    return true;
                });
                require(ok, "LabelingFamily: canonical index out of range");
                return found;
            }
            case LabelingKind::Explicit:
                require(explicit_table.bits_per_symbol() == m,
                        "LabelingFamily: explicit table has wrong m");
                return explicit_table;
        }
        throw InvalidParameter("LabelingFamily: bad kind");
    }
};

// --- labeling text file -----------------------------------------------------
//
//   m=<int>
//   <b_m..b_1> <point-index>      (2^m lines, u ascending)

inline void write_labeling(std::ostream& os, const Labeling& lab) {
    const int m = lab.bits_per_symbol();
    os << "m=" << m << "\n";
    for (unsigned u = 0; u < (1u << m); ++u) {
        std::string bits(m, '0');
        for (int j = 0; j < m; ++j)
            if (u & (1u << j)) bits[m - 1 - j] = '1';
        os << bits << " " << lab.point_index(u) << "\n";
    }
}

inline void write_labeling_file(const std::string& path, const Labeling& lab) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    write_labeling(os, lab);
}

inline Labeling read_labeling(std::istream& is, const std::string& name = "<labeling>") {
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& why) {
        throw ParseError(name + ":" + std::to_string(lineno) + ": " + why);
    };
    if (!std::getline(is, line)) { lineno = 1; fail("empty file"); }
    ++lineno;
    if (line.rfind("m=", 0) != 0) fail("expected 'm=<int>'");
    int m = 0;
    try {
        m = std::stoi(line.substr(2));
    } catch (const std::exception&) { fail("bad m value"); }
    if (m < 1 || m > 6) fail("m out of range 1..6");
    std::vector<int> table(std::size_t{1} << m, -1);
    for (unsigned u = 0; u < (1u << m); ++u) {
        if (!std::getline(is, line)) { ++lineno; fail("unexpected end of file"); }
        ++lineno;
        std::istringstream ls(line);
        std::string bits;
        int point = -1;
        if (!(ls >> bits >> point)) fail("expected '<bits> <point-index>'");
        if (bits.size() != static_cast<std::size_t>(m)) fail("bit string has wrong length");
        unsigned v = 0;
        for (int j = 0; j < m; ++j) {
            const char ch = bits[m - 1 - j];
            if (ch != '0' && ch != '1') fail("bit string must be binary");
            if (ch == '1') v |= 1u << j;
        }
        if (v != u) fail("labeling lines must be in ascending bit-vector order");
        table[u] = point;
    }
    try {
        return Labeling(m, std::move(table));
    } catch (const InvalidParameter& e) {
        fail(e.what());
    }
    return Labeling();  // unreachable
}

inline Labeling read_labeling_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path);
    return read_labeling(is, path);
}

} // namespace pcm

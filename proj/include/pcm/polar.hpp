// Polar encoding and SC / SCL / CRC-aided SCL decoding for one binary level.
//
// Conventions, shared with the construction side:
//   - G_N = F^{otimes n} in natural order, no bit-reversal permutation;
//   - exact f update (tanh rule) evaluated with stable log identities;
//   - g(a, b, u) = b + (1-2u) a;
//   - LLR >= 0 decides bit 0;
//   - path metric grows by |llr| whenever a decision contradicts the LLR sign.
//
// SCL uses the lazy-copy array structure of Tal & Vardy; scratch buffers
// live in the decoder object, so keep one instance per worker thread.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "pcm/common.hpp"
#include "pcm/crc.hpp"

namespace pcm {

struct PolarCodeLevel {
    std::size_t block_length = 0;           // N = 2^n
    std::vector<std::uint8_t> frozen_mask;  // 1 = frozen
    std::vector<std::uint8_t> frozen_values;

    PolarCodeLevel() = default;
    PolarCodeLevel(std::size_t n_block, std::vector<std::uint8_t> frozen,
                   std::vector<std::uint8_t> values = {})
        : block_length(n_block), frozen_mask(std::move(frozen)), frozen_values(std::move(values)) {
        require(is_power_of_two(block_length), "PolarCodeLevel: N must be a power of two");
        require(frozen_mask.size() == block_length, "PolarCodeLevel: frozen mask size != N");
        if (frozen_values.empty()) frozen_values.assign(block_length, 0);
        require(frozen_values.size() == block_length, "PolarCodeLevel: frozen values size != N");
    }

    std::size_t info_count() const {
        std::size_t k = 0;
        for (auto f : frozen_mask) k += (f == 0);
        return k;
    }

    std::vector<std::size_t> info_positions() const {
        std::vector<std::size_t> pos;
        pos.reserve(info_count());
        for (std::size_t i = 0; i < block_length; ++i)
            if (!frozen_mask[i]) pos.push_back(i);
        return pos;
    }
};

// In-place butterfly: x = u F^{otimes n}.  Involution over GF(2).
inline void polar_transform_inplace(Bits& x) {
    const std::size_t n = x.size();
    require(is_power_of_two(n), "polar_transform: length must be a power of two");
    for (std::size_t len = 1; len < n; len <<= 1)
        for (std::size_t i = 0; i < n; i += 2 * len)
            for (std::size_t j = 0; j < len; ++j) x[i + j] ^= x[i + j + len];
}

inline Bits polar_transform(Bits u) {
    polar_transform_inplace(u);
    return u;
}

inline Bits polar_encode(const PolarCodeLevel& code, const Bits& u) {
    require(u.size() == code.block_length, "polar_encode: u length != N");
    for (std::size_t i = 0; i < u.size(); ++i)
        if (code.frozen_mask[i])
            require(u[i] == code.frozen_values[i], "polar_encode: frozen position violated");
    return polar_transform(u);
}

// Scatter info bits into the non-frozen positions.
inline Bits expand_info_bits(const PolarCodeLevel& code, const Bits& info) {
    require(info.size() == code.info_count(), "expand_info_bits: wrong info length");
    Bits u(code.frozen_values);
    std::size_t k = 0;
    for (std::size_t i = 0; i < code.block_length; ++i)
        if (!code.frozen_mask[i]) u[i] = info[k++];
    return u;
}

inline Bits extract_info_bits(const PolarCodeLevel& code, const Bits& u) {
    Bits info;
    info.reserve(code.info_count());
    for (std::size_t i = 0; i < code.block_length; ++i)
        if (!code.frozen_mask[i]) info.push_back(u[i]);
    return info;
}

// Exact boxplus: 2 atanh(tanh(a/2) tanh(b/2)), in the stable log form
// sgn(a)sgn(b) min(|a|,|b|) + log1p(e^{-|a+b|}) - log1p(e^{-|a-b|}).
inline double boxplus(double a, double b) {
    const double aa = std::abs(a), ab = std::abs(b);
    const double sign = ((a < 0) != (b < 0)) ? -1.0 : 1.0;
    return sign * std::min(aa, ab) + std::log1p(std::exp(-std::abs(a + b))) -
           std::log1p(std::exp(-std::abs(a - b)));
}

struct DecodeResult {
    Bits u_hat;
    Bits info_bits;
    double path_metric = 0.0;
    bool crc_ok = true;
};

// One surviving list path.
struct ScPath {
    Bits u_hat;
    double metric = 0.0;
};

namespace detail {

inline void check_llr_finite(const std::vector<double>& llr, std::size_t n) {
    require(llr.size() == n, "decode: LLR length != N");
    for (double v : llr)
        require(std::isfinite(v), "decode: LLR input must be finite");
}

inline double decision_penalty(std::uint8_t bit, double llr) {
    return ((bit ? -llr : llr) < 0.0) ? std::abs(llr) : 0.0;
}

} // namespace detail

class ScDecoder {
public:
    explicit ScDecoder(std::size_t block_length) { resize(block_length); }

    DecodeResult decode(const PolarCodeLevel& code, const std::vector<double>& llr) {
        detail::check_llr_finite(llr, code.block_length);
        resize(code.block_length);
        code_ = &code;
        metric_ = 0.0;
        std::copy(llr.begin(), llr.end(), alpha_[0].begin());
        recurse(0, 0);
        DecodeResult r;
        r.u_hat = u_;
        r.info_bits = extract_info_bits(code, u_);
        r.path_metric = metric_;
        return r;
    }

private:
    void resize(std::size_t n) {
        if (!alpha_.empty() && alpha_[0].size() == n) return;
        const int levels = log2_exact(n) + 1;
        alpha_.assign(levels, {});
        beta_.assign(levels, {});
        beta_left_.assign(levels, {});
        for (int s = 0; s < levels; ++s) {
            alpha_[s].assign(n >> s, 0.0);
            beta_[s].assign(n >> s, 0);
            beta_left_[s].assign(n >> s, 0);
        }
        u_.assign(n, 0);
    }

    // Works on alpha_[s]; leaves the subtree's re-encoded bits in beta_[s].
    void recurse(int s, std::size_t u_base) {
        const std::size_t len = alpha_[s].size();
        if (len == 1) {
            const double a = alpha_[s][0];
            std::uint8_t bit;
            if (code_->frozen_mask[u_base]) {
                bit = code_->frozen_values[u_base];
            } else {
                bit = (a < 0.0) ? 1 : 0;
            }
            metric_ += detail::decision_penalty(bit, a);
            u_[u_base] = bit;
            beta_[s][0] = bit;
            return;
        }
        const std::size_t half = len / 2;
        for (std::size_t i = 0; i < half; ++i)
            alpha_[s + 1][i] = boxplus(alpha_[s][i], alpha_[s][i + half]);
        recurse(s + 1, u_base);
        std::copy(beta_[s + 1].begin(), beta_[s + 1].end(), beta_left_[s + 1].begin());
        for (std::size_t i = 0; i < half; ++i)
            alpha_[s + 1][i] =
                alpha_[s][i + half] + (1.0 - 2.0 * beta_left_[s + 1][i]) * alpha_[s][i];
        recurse(s + 1, u_base + half);
        for (std::size_t i = 0; i < half; ++i) {
            beta_[s][i] = beta_left_[s + 1][i] ^ beta_[s + 1][i];
            beta_[s][i + half] = beta_[s + 1][i];
        }
    }

    const PolarCodeLevel* code_ = nullptr;
    std::vector<std::vector<double>> alpha_;
    std::vector<std::vector<std::uint8_t>> beta_, beta_left_;
    Bits u_;
    double metric_ = 0.0;
};

// LLR-based successive cancellation list decoder (lazy array copies).
class SclDecoder {
public:
    SclDecoder(std::size_t block_length, std::size_t list_size) {
        configure(block_length, list_size);
    }

    // All surviving paths, best metric first (ties: smaller path index).
    std::vector<ScPath> decode_list(const PolarCodeLevel& code, const std::vector<double>& llr) {
        detail::check_llr_finite(llr, code.block_length);
        configure(code.block_length, L_);
        code_ = &code;
        reset();

        const std::uint16_t l0 = assign_initial_path();
        std::copy(llr.begin(), llr.end(), llr_[0].begin() + slot_of(0, l0) * N_);

        for (std::size_t phi = 0; phi < N_; ++phi) {
            calc_llr(n_, phi);
            if (code.frozen_mask[phi])
                continue_frozen(phi);
            else
                continue_info(phi);
            if (phi % 2 == 1) update_bits(n_, phi);
        }

        std::vector<std::uint16_t> order;
        for (std::uint16_t l = 0; l < L_; ++l)
            if (active_[l]) order.push_back(l);
        std::sort(order.begin(), order.end(), [&](std::uint16_t a, std::uint16_t b) {
            if (metric_[a] != metric_[b]) return metric_[a] < metric_[b];
            return a < b;
        });
        std::vector<ScPath> out;
        out.reserve(order.size());
        for (std::uint16_t l : order) out.push_back(ScPath{u_hist_[l], metric_[l]});
        return out;
    }

    std::size_t list_size() const { return L_; }

private:
    std::size_t sz(int lambda) const { return N_ >> lambda; }

    void configure(std::size_t n_block, std::size_t list) {
        require(is_power_of_two(list) && list >= 1 && list <= 64,
                "SclDecoder: list size must be a power of two in 1..64");
        if (N_ == n_block && L_ == list) return;
        N_ = n_block;
        n_ = log2_exact(N_);
        L_ = list;
        llr_.assign(n_ + 1, {});
        bits_.assign(n_ + 1, {});
        slot_of_.assign(n_ + 1, std::vector<std::uint16_t>(L_, 0));
        refs_.assign(n_ + 1, std::vector<std::uint16_t>(L_, 0));
        free_slots_.assign(n_ + 1, {});
        for (int s = 0; s <= n_; ++s) {
            llr_[s].assign(L_ * sz(s), 0.0);
            bits_[s].assign(L_ * 2 * sz(s), 0);
        }
        active_.assign(L_, 0);
        metric_.assign(L_, 0.0);
        u_hist_.assign(L_, Bits(N_, 0));
        fork_.resize(2 * L_);
    }

    void reset() {
        free_paths_.clear();
        for (int s = 0; s <= n_; ++s) {
            free_slots_[s].clear();
            for (std::uint16_t i = 0; i < L_; ++i) {
                free_slots_[s].push_back(static_cast<std::uint16_t>(L_ - 1 - i));
                refs_[s][i] = 0;
            }
        }
        for (std::uint16_t l = 0; l < L_; ++l) {
            active_[l] = 0;
            metric_[l] = 0.0;
            free_paths_.push_back(static_cast<std::uint16_t>(L_ - 1 - l));
        }
    }

    std::uint16_t assign_initial_path() {
        const std::uint16_t l = free_paths_.back();
        free_paths_.pop_back();
        active_[l] = 1;
        std::fill(u_hist_[l].begin(), u_hist_[l].end(), 0);
        for (int s = 0; s <= n_; ++s) {
            const std::uint16_t slot = free_slots_[s].back();
            free_slots_[s].pop_back();
            slot_of_[s][l] = slot;
            refs_[s][slot] = 1;
        }
        return l;
    }

    std::uint16_t clone_path(std::uint16_t l) {
        const std::uint16_t lp = free_paths_.back();
        free_paths_.pop_back();
        active_[lp] = 1;
        metric_[lp] = metric_[l];
        u_hist_[lp] = u_hist_[l];
        for (int s = 0; s <= n_; ++s) {
            slot_of_[s][lp] = slot_of_[s][l];
            ++refs_[s][slot_of_[s][l]];
        }
        return lp;
    }

    void kill_path(std::uint16_t l) {
        active_[l] = 0;
        free_paths_.push_back(l);
        for (int s = 0; s <= n_; ++s) {
            const std::uint16_t slot = slot_of_[s][l];
            if (--refs_[s][slot] == 0) free_slots_[s].push_back(slot);
        }
    }

    std::uint16_t slot_of(int lambda, std::uint16_t l) const { return slot_of_[lambda][l]; }

    // Copy-on-write access to a path's arrays at one level.
    std::uint16_t writable_slot(int lambda, std::uint16_t l) {
        const std::uint16_t slot = slot_of_[lambda][l];
        if (refs_[lambda][slot] == 1) return slot;
        const std::uint16_t fresh = free_slots_[lambda].back();
        free_slots_[lambda].pop_back();
        const std::size_t s = sz(lambda);
        std::copy_n(llr_[lambda].begin() + slot * s, s, llr_[lambda].begin() + fresh * s);
        std::copy_n(bits_[lambda].begin() + slot * 2 * s, 2 * s,
                    bits_[lambda].begin() + fresh * 2 * s);
        --refs_[lambda][slot];
        refs_[lambda][fresh] = 1;
        slot_of_[lambda][l] = fresh;
        return fresh;
    }

    void calc_llr(int lambda, std::size_t phi) {
        if (lambda == 0) return;
        if (phi % 2 == 0) calc_llr(lambda - 1, phi / 2);
        const std::size_t s = sz(lambda);
        for (std::uint16_t l = 0; l < L_; ++l) {
            if (!active_[l]) continue;
            const std::uint16_t child = writable_slot(lambda, l);
            const std::uint16_t parent = slot_of_[lambda - 1][l];
            double* out = llr_[lambda].data() + child * s;
            const double* in = llr_[lambda - 1].data() + parent * 2 * s;
            if (phi % 2 == 0) {
                for (std::size_t i = 0; i < s; ++i) out[i] = boxplus(in[i], in[i + s]);
            } else {
                const std::uint8_t* left = bits_[lambda].data() + child * 2 * s;  // bank 0
                for (std::size_t i = 0; i < s; ++i)
                    out[i] = in[i + s] + (1.0 - 2.0 * left[i]) * in[i];
            }
        }
    }

    void update_bits(int lambda, std::size_t phi) {
        const std::size_t psi = phi / 2;
        const std::size_t s = sz(lambda);
        for (std::uint16_t l = 0; l < L_; ++l) {
            if (!active_[l]) continue;
            const std::uint16_t child = slot_of_[lambda][l];
            const std::uint16_t parent = writable_slot(lambda - 1, l);
            const std::uint8_t* c = bits_[lambda].data() + child * 2 * s;
            std::uint8_t* p = bits_[lambda - 1].data() + parent * 2 * (2 * s) + (psi % 2) * 2 * s;
            for (std::size_t i = 0; i < s; ++i) {
                p[i] = c[i] ^ c[i + s];
                p[i + s] = c[i + s];
            }
        }
        if (psi % 2 == 1) update_bits(lambda - 1, psi);
    }

    void set_leaf_bit(std::uint16_t l, std::size_t phi, std::uint8_t bit) {
        const std::uint16_t slot = writable_slot(n_, l);
        bits_[n_][slot * 2 + (phi % 2)] = bit;
        u_hist_[l][phi] = bit;
    }

    void continue_frozen(std::size_t phi) {
        for (std::uint16_t l = 0; l < L_; ++l) {
            if (!active_[l]) continue;
            const double a = llr_[n_][slot_of_[n_][l]];
            const std::uint8_t bit = code_->frozen_values[phi];
            metric_[l] += detail::decision_penalty(bit, a);
            set_leaf_bit(l, phi, bit);
        }
    }

    struct Fork {
        double metric;
        std::uint16_t path;
        std::uint8_t bit;
    };

    void continue_info(std::size_t phi) {
        std::size_t n_forks = 0;
        for (std::uint16_t l = 0; l < L_; ++l) {
            if (!active_[l]) continue;
            const double a = llr_[n_][slot_of_[n_][l]];
            fork_[n_forks++] = Fork{metric_[l] + detail::decision_penalty(0, a), l, 0};
            fork_[n_forks++] = Fork{metric_[l] + detail::decision_penalty(1, a), l, 1};
        }
        const std::size_t keep = std::min<std::size_t>(L_, n_forks);
        std::sort(fork_.begin(), fork_.begin() + n_forks, [](const Fork& x, const Fork& y) {
            if (x.metric != y.metric) return x.metric < y.metric;
            if (x.path != y.path) return x.path < y.path;
            return x.bit < y.bit;
        });
        // keep[l][bit]
        std::array<std::uint64_t, 2> kept{0, 0};
        for (std::size_t i = 0; i < keep; ++i)
            kept[fork_[i].bit] |= std::uint64_t{1} << fork_[i].path;

        for (std::uint16_t l = 0; l < L_; ++l) {
            if (!active_[l]) continue;
            const bool k0 = (kept[0] >> l) & 1, k1 = (kept[1] >> l) & 1;
            if (!k0 && !k1) kill_path(l);
        }
        std::array<std::uint64_t, 2> pend = kept;
        for (std::uint16_t l = 0; l < L_; ++l) {
            const bool k0 = (pend[0] >> l) & 1, k1 = (pend[1] >> l) & 1;
            if (!k0 && !k1) continue;
            const double a = llr_[n_][slot_of_[n_][l]];
            if (k0 && k1) {
                const std::uint16_t lp = clone_path(l);
                metric_[l] += detail::decision_penalty(0, a);
                set_leaf_bit(l, phi, 0);
                metric_[lp] += detail::decision_penalty(1, a);
                set_leaf_bit(lp, phi, 1);
            } else {
                const std::uint8_t bit = k1 ? 1 : 0;
                metric_[l] += detail::decision_penalty(bit, a);
                set_leaf_bit(l, phi, bit);
            }
        }
    }

    const PolarCodeLevel* code_ = nullptr;
    std::size_t N_ = 0, L_ = 0;
    int n_ = 0;
    std::vector<std::vector<double>> llr_;
    std::vector<std::vector<std::uint8_t>> bits_;
    std::vector<std::vector<std::uint16_t>> slot_of_, refs_;
    std::vector<std::vector<std::uint16_t>> free_slots_;
    std::vector<std::uint16_t> free_paths_;
    std::vector<std::uint8_t> active_;
    std::vector<double> metric_;
    std::vector<Bits> u_hist_;
    std::vector<Fork> fork_;
};

inline DecodeResult sc_decode(const PolarCodeLevel& code, const std::vector<double>& llr) {
    ScDecoder dec(code.block_length);
    return dec.decode(code, llr);
}

inline DecodeResult scl_decode(const PolarCodeLevel& code, const std::vector<double>& llr,
                               std::size_t list_size) {
    SclDecoder dec(code.block_length, list_size);
    const auto paths = dec.decode_list(code, llr);
    DecodeResult r;
    r.u_hat = paths.front().u_hat;
    r.info_bits = extract_info_bits(code, r.u_hat);
    r.path_metric = paths.front().metric;
    return r;
}

// Best CRC-passing path; falls back to the best path with crc_ok = false.
inline DecodeResult ca_scl_decode(const PolarCodeLevel& code, const std::vector<double>& llr,
                                  std::size_t list_size, const CrcConfig& crc) {
    require(code.info_count() > static_cast<std::size_t>(crc.width),
            "ca_scl_decode: info length must exceed the CRC width");
    SclDecoder dec(code.block_length, list_size);
    const auto paths = dec.decode_list(code, llr);
    for (const auto& p : paths) {
        Bits info = extract_info_bits(code, p.u_hat);
        if (crc_check(info, crc)) {
            return DecodeResult{p.u_hat, std::move(info), p.metric, true};
        }
    }
    const auto& best = paths.front();
    return DecodeResult{best.u_hat, extract_info_bits(code, best.u_hat), best.metric, false};
}

} // namespace pcm

// Monte Carlo BLER measurement of the multi-level PCM chain and the
// bit-interleaved (BIPCM) baseline.
//
// Determinism contract: every frame is a pure function of
// (master seed, SNR point index, frame index).  Frames are simulated in
// fixed-size blocks and the stop rule is checked at block boundaries, so the
// set of simulated frames -- and therefore every count in the output -- is
// invariant under the worker count.
//
// BIPCM note: mN is not a power of two for odd m, so the "one long polar
// code" is realized as the direct sum of m length-N polar transforms under a
// single global frozen mask, with one random interleaver across all mN coded
// bits and fully parallel (prior-free) demapping.  This keeps symbol count,
// rate and mapping identical to the PCM runs it is compared against.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include "pcm/channel.hpp"
#include "pcm/common.hpp"
#include "pcm/constellation.hpp"
#include "pcm/construction.hpp"
#include "pcm/crc.hpp"
#include "pcm/polar.hpp"
#include "pcm/rng.hpp"

namespace pcm {

enum class Scheme { PCM, BIPCM };
enum class DecoderKind { SC, SCL, CASCL };

inline const char* to_string(Scheme s) { return s == Scheme::PCM ? "pcm" : "bipcm"; }
inline const char* to_string(DecoderKind d) {
    switch (d) {
        case DecoderKind::SC: return "sc";
        case DecoderKind::SCL: return "scl";
        case DecoderKind::CASCL: return "cascl";
    }
    return "?";
}

struct StopRule {
    std::uint64_t max_frames = 100000;
    std::uint64_t target_errors = 100;
};

// BIPCM code: m identical-length polar blocks under one global frozen mask.
struct BipcmCodeSpec {
    Labeling labeling;  // Gray by construction
    Constellation constellation;
    std::vector<PolarCodeLevel> blocks;
    std::size_t total_info = 0;
    double sigma_design = 0.0;
    double predicted_bler = 0.0;
    CrcConfig crc = default_crc16();
    bool crc_inside = true;
    std::uint64_t interleaver_seed = 1;

    int m() const { return constellation.bits_per_symbol; }
    std::size_t block_length() const { return blocks.empty() ? 0 : blocks[0].block_length; }
};

// GA construction over the averaged BI-AWGN surrogate of the parallel
// (prior-free) bit channels, K best of all mN.
inline BipcmCodeSpec build_bipcm_code(int m, std::size_t block_length, std::size_t k,
                                      double sigma_design, std::uint64_t interleaver_seed) {
    const Constellation c = make_pam(m);
    const Labeling lab = gray_labeling(m);
    const std::size_t total = m * block_length;
    require(k >= 1 && k <= total, "build_bipcm_code: K must be in 1..mN");
    double mean_sum = 0.0;
    for (int j = 1; j <= m; ++j) {
        double cap = parallel_bit_capacity(j, lab, c, sigma_design);
        cap = std::clamp(cap, 1e-6, 1.0 - 1e-6);
        const double se = biawgn_sigma_for_capacity(cap);
        mean_sum += 2.0 / (se * se);
    }
    const auto block_means = ga_evolve(mean_sum / m, block_length);

    ReliabilityProfile p;
    p.m = m;
    p.block_length = block_length;
    p.mean_llr.resize(total);
    p.perr.resize(total);
    p.level_clamped.assign(m, 0);
    for (int j = 0; j < m; ++j)
        for (std::size_t t = 0; t < block_length; ++t) {
            p.mean_llr[j * block_length + t] = block_means[t];
            p.perr[j * block_length + t] = q_func(std::sqrt(block_means[t] / 2.0));
        }
    const auto selected = select_information_set(p, k);

    BipcmCodeSpec spec;
    spec.labeling = lab;
    spec.constellation = c;
    spec.total_info = k;
    spec.sigma_design = sigma_design;
    spec.interleaver_seed = interleaver_seed;
    std::vector<std::uint8_t> frozen(total, 1);
    for (std::size_t i : selected) {
        frozen[i] = 0;
        spec.predicted_bler += p.perr[i];
    }
    for (int j = 0; j < m; ++j) {
        std::vector<std::uint8_t> mask(frozen.begin() + j * block_length,
                                       frozen.begin() + (j + 1) * block_length);
        spec.blocks.emplace_back(block_length, std::move(mask));
    }
    return spec;
}

struct SimConfig {
    Scheme scheme = Scheme::PCM;
    DecoderKind decoder = DecoderKind::SC;
    std::size_t list_size = 1;
    MlcCodeSpec mlc;         // scheme == PCM
    BipcmCodeSpec bipcm;     // scheme == BIPCM
    std::vector<double> esn0_db;
    StopRule stop;
    std::uint64_t master_seed = 1;
    unsigned workers = 1;

    int m() const { return scheme == Scheme::PCM ? mlc.m() : bipcm.m(); }
    std::size_t block_length() const {
        return scheme == Scheme::PCM ? mlc.block_length() : bipcm.block_length();
    }
    std::size_t total_info() const {
        return scheme == Scheme::PCM ? mlc.total_info : bipcm.total_info;
    }
    const CrcConfig& crc() const { return scheme == Scheme::PCM ? mlc.crc : bipcm.crc; }
    bool crc_inside() const { return scheme == Scheme::PCM ? mlc.crc_inside : bipcm.crc_inside; }

    // CRC bits ride along only under CA-SCL decoding.  K always counts the
    // information positions of the masks; the inside/outside accounting knob
    // is applied when the code is built (outside grows K by the CRC width).
    std::size_t payload_length() const {
        if (decoder != DecoderKind::CASCL) return total_info();
        return total_info() - crc().width;
    }

    void validate() const {
        require(!esn0_db.empty(), "SimConfig: SNR list must be non-empty");
        require(stop.max_frames > 0 && stop.target_errors > 0, "SimConfig: stop rule positive");
        require(list_size >= 1, "SimConfig: list size must be >= 1");
        if (decoder == DecoderKind::SC)
            require(list_size == 1, "SimConfig: SC takes list size 1");
        if (decoder == DecoderKind::CASCL)
            require(total_info() > static_cast<std::size_t>(crc().width),
                    "SimConfig: K must exceed the CRC width under CA-SCL");
    }
};

struct BlerPoint {
    double esn0_db = 0.0;
    double ebn0_db = 0.0;
    std::uint64_t frames = 0;
    std::uint64_t frame_errors = 0;
    std::uint64_t bit_errors = 0;
    double bler = 0.0;
};

// --- PCM encode / modulate ---------------------------------------------------

// info_stream (K bits: payload plus any CRC) -> N channel amplitudes.
inline std::vector<double> pcm_encode_modulate(const MlcCodeSpec& spec, const Bits& info_stream) {
    const int m = spec.m();
    const std::size_t n = spec.block_length();
    require(info_stream.size() == spec.total_info, "pcm_encode_modulate: payload length != K");
    std::vector<Bits> coded(m);
    std::size_t consumed = 0;
    for (int j = 0; j < m; ++j) {
        const std::size_t kj = spec.levels[j].info_count();
        Bits info(info_stream.begin() + consumed, info_stream.begin() + consumed + kj);
        consumed += kj;
        coded[j] = polar_encode(spec.levels[j], expand_info_bits(spec.levels[j], info));
    }
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) {
        unsigned u = 0;
        for (int j = 0; j < m; ++j) u |= static_cast<unsigned>(coded[j][t]) << j;
        x[t] = spec.constellation.points[spec.labeling.point_index(u)];
    }
    return x;
}

struct MsdResult {
    Bits info_stream;  // K bits in level order
    bool crc_ok = true;
};

namespace detail {

// Candidate amplitudes per (level, prior value, bit hypothesis).
using DemapTable = std::vector<std::vector<std::array<std::vector<double>, 2>>>;

inline DemapTable make_msd_tables(const Labeling& lab, const Constellation& c) {
    const int m = c.bits_per_symbol;
    DemapTable tabs(m);
    for (int j = 1; j <= m; ++j) {
        tabs[j - 1].resize(std::size_t{1} << (j - 1));
        for (unsigned prior = 0; prior < (1u << (j - 1)); ++prior)
            for (unsigned v = 0; v < 2; ++v)
                tabs[j - 1][prior][v] = level_candidates(lab, c, j, prior, v);
    }
    return tabs;
}

// Decodes one block with the requested decoder; CA-SCL selection against the
// accumulated info prefix happens only at the final information block.
template <typename GetScl>
Bits decode_block(const PolarCodeLevel& code, const std::vector<double>& llr, DecoderKind decoder,
                  bool final_info_block, const CrcConfig& crc, ScDecoder& sc, GetScl&& get_scl,
                  Bits& info_stream, bool& crc_ok) {
    Bits u_hat;
    if (decoder == DecoderKind::SC) {
        u_hat = sc.decode(code, llr).u_hat;
    } else if (decoder == DecoderKind::SCL || !final_info_block) {
        auto paths = get_scl().decode_list(code, llr);
        u_hat = std::move(paths.front().u_hat);
    } else {
        auto paths = get_scl().decode_list(code, llr);
        bool found = false;
        for (const auto& path : paths) {
            Bits candidate = info_stream;
            const Bits tail = extract_info_bits(code, path.u_hat);
            candidate.insert(candidate.end(), tail.begin(), tail.end());
            if (crc_check(candidate, crc)) {
                u_hat = path.u_hat;
                found = true;
                break;
            }
        }
        if (!found) {
            u_hat = paths.front().u_hat;
            crc_ok = false;
        }
    }
    const Bits info = extract_info_bits(code, u_hat);
    info_stream.insert(info_stream.end(), info.begin(), info.end());
    return u_hat;
}

} // namespace detail

// Multistage decoder with persistent scratch; keep one per worker.
class MsdDecoder {
public:
    explicit MsdDecoder(const MlcCodeSpec& spec, std::size_t list_size = 1)
        : spec_(&spec), list_size_(list_size),
          tabs_(detail::make_msd_tables(spec.labeling, spec.constellation)),
          sc_(spec.block_length()) {
        for (int j = 1; j <= spec.m(); ++j)
            if (spec.levels[j - 1].info_count() > 0) last_info_level_ = j;
    }

    MsdResult decode(const std::vector<double>& y, DecoderKind decoder, double noise_std) {
        const int m = spec_->m();
        const std::size_t n = spec_->block_length();
        require(y.size() == n, "msd_decode: received length != N");
        const double inv2s2 = 1.0 / (2.0 * noise_std * noise_std);
        std::vector<double> llr(n);
        std::vector<unsigned> prior(n, 0);
        MsdResult out;
        out.info_stream.reserve(spec_->total_info);
        auto get_scl = [&]() -> SclDecoder& {
            if (!scl_) scl_.emplace(spec_->block_length(), list_size_);
            return *scl_;
        };
        for (int j = 1; j <= m; ++j) {
            const auto& tab = tabs_[j - 1];
            for (std::size_t t = 0; t < n; ++t)
                llr[t] = detail::level_llr_core(tab[prior[t]][0], tab[prior[t]][1], y[t], inv2s2);
            Bits u_hat = detail::decode_block(spec_->levels[j - 1], llr, decoder,
                                              j == last_info_level_, spec_->crc, sc_, get_scl,
                                              out.info_stream, out.crc_ok);
            if (j < m) {
                const Bits coded = polar_transform(std::move(u_hat));
                for (std::size_t t = 0; t < n; ++t)
                    prior[t] |= static_cast<unsigned>(coded[t]) << (j - 1);
            }
        }
        return out;
    }

private:
    const MlcCodeSpec* spec_;
    std::size_t list_size_;
    detail::DemapTable tabs_;
    ScDecoder sc_;
    std::optional<SclDecoder> scl_;
    int last_info_level_ = 0;
};

// Level j conditions on the re-encoded hard decisions of levels 1..j-1.
// Under CA-SCL a single stream-wide CRC selects among the surviving paths of
// the last information-bearing level.
inline MsdResult msd_decode(const MlcCodeSpec& spec, const std::vector<double>& y,
                            DecoderKind decoder, std::size_t list_size, double noise_std) {
    MsdDecoder dec(spec, list_size);
    return dec.decode(y, decoder, noise_std);
}

// --- BIPCM -------------------------------------------------------------------

inline std::vector<std::size_t> make_interleaver(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
        std::swap(perm[i], perm[j]);
    }
    return perm;
}

// transmitted position p carries coded bit interleaver[p]
inline std::vector<double> bipcm_encode_modulate(const BipcmCodeSpec& spec,
                                                 const Bits& info_stream,
                                                 const std::vector<std::size_t>& interleaver) {
    const int m = spec.m();
    const std::size_t n = spec.block_length();
    require(info_stream.size() == spec.total_info, "bipcm_encode_modulate: payload length != K");
    require(interleaver.size() == m * n, "bipcm_encode_modulate: interleaver length != mN");
    Bits coded;
    coded.reserve(m * n);
    std::size_t consumed = 0;
    for (int j = 0; j < m; ++j) {
        const std::size_t kj = spec.blocks[j].info_count();
        Bits info(info_stream.begin() + consumed, info_stream.begin() + consumed + kj);
        consumed += kj;
        const Bits c = polar_encode(spec.blocks[j], expand_info_bits(spec.blocks[j], info));
        coded.insert(coded.end(), c.begin(), c.end());
    }
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) {
        unsigned u = 0;
        for (int j = 0; j < m; ++j)
            u |= static_cast<unsigned>(coded[interleaver[m * t + j]]) << j;
        x[t] = spec.constellation.points[spec.labeling.point_index(u)];
    }
    return x;
}

class BipcmDecoder {
public:
    explicit BipcmDecoder(const BipcmCodeSpec& spec, const std::vector<std::size_t>& interleaver,
                          std::size_t list_size = 1)
        : spec_(&spec), interleaver_(&interleaver), list_size_(list_size),
          sc_(spec.block_length()) {
        const int m = spec.m();
        cand_.resize(m);
        for (int j = 1; j <= m; ++j)
            for (unsigned u = 0; u < (1u << m); ++u)
                cand_[j - 1][(u >> (j - 1)) & 1u].push_back(
                    spec.constellation.points[spec.labeling.point_index(u)]);
        for (int j = 1; j <= m; ++j)
            if (spec.blocks[j - 1].info_count() > 0) last_info_block_ = j;
    }

    MsdResult decode(const std::vector<double>& y, DecoderKind decoder, double noise_std) {
        const int m = spec_->m();
        const std::size_t n = spec_->block_length();
        require(y.size() == n, "bipcm_decode: received length != N");
        const double inv2s2 = 1.0 / (2.0 * noise_std * noise_std);
        std::vector<double> llr(m * n);
        for (std::size_t t = 0; t < n; ++t)
            for (int j = 0; j < m; ++j)
                llr[(*interleaver_)[m * t + j]] =
                    detail::level_llr_core(cand_[j][0], cand_[j][1], y[t], inv2s2);

        MsdResult out;
        out.info_stream.reserve(spec_->total_info);
        std::vector<double> block_llr(n);
        auto get_scl = [&]() -> SclDecoder& {
            if (!scl_) scl_.emplace(spec_->block_length(), list_size_);
            return *scl_;
        };
        for (int j = 1; j <= m; ++j) {
            std::copy_n(llr.begin() + (j - 1) * n, n, block_llr.begin());
            detail::decode_block(spec_->blocks[j - 1], block_llr, decoder, j == last_info_block_,
                                 spec_->crc, sc_, get_scl, out.info_stream, out.crc_ok);
        }
        return out;
    }

private:
    const BipcmCodeSpec* spec_;
    const std::vector<std::size_t>* interleaver_;
    std::size_t list_size_;
    std::vector<std::array<std::vector<double>, 2>> cand_;
    ScDecoder sc_;
    std::optional<SclDecoder> scl_;
    int last_info_block_ = 0;
};

inline MsdResult bipcm_decode(const BipcmCodeSpec& spec, const std::vector<double>& y,
                              DecoderKind decoder, std::size_t list_size, double noise_std,
                              const std::vector<std::size_t>& interleaver) {
    BipcmDecoder dec(spec, interleaver, list_size);
    return dec.decode(y, decoder, noise_std);
}

// --- Monte Carlo harness -----------------------------------------------------

namespace detail {

struct FrameOutcome {
    bool frame_error = false;
    std::uint32_t bit_errors = 0;
};

// One frame, fully determined by its seed.  ctx points at the worker's
// persistent decoder (MsdDecoder or BipcmDecoder).
template <typename Decoder>
FrameOutcome simulate_frame(const SimConfig& cfg, double sigma,
                            const std::vector<std::size_t>& interleaver, Decoder& dec,
                            std::uint64_t point_index, std::uint64_t frame_index) {
    Rng rng = Rng::derive(cfg.master_seed, point_index, frame_index);
    const std::size_t payload_len = cfg.payload_length();
    Bits payload(payload_len);
    for (auto& b : payload) b = rng.bit();
    const Bits info_stream =
        (cfg.decoder == DecoderKind::CASCL) ? crc_attach(payload, cfg.crc()) : payload;

    std::vector<double> x;
    if constexpr (std::is_same_v<Decoder, MsdDecoder>) {
        x = pcm_encode_modulate(cfg.mlc, info_stream);
    } else {
        x = bipcm_encode_modulate(cfg.bipcm, info_stream, interleaver);
    }
    for (double& v : x) v += sigma * rng.gaussian();
    const MsdResult res = dec.decode(x, cfg.decoder, sigma);

    FrameOutcome out;
    std::uint32_t errs = 0;
    for (std::size_t i = 0; i < payload_len; ++i)
        errs += (res.info_stream[i] != payload[i]);
    out.bit_errors = errs;
    out.frame_error = errs != 0;
    return out;
}

template <typename Decoder, typename MakeDecoder>
std::vector<BlerPoint> run_points(const SimConfig& cfg,
                                  const std::vector<std::size_t>& interleaver,
                                  MakeDecoder&& make_decoder,
                                  const std::function<void(const BlerPoint&)>& on_point) {
    constexpr std::uint64_t kBlockFrames = 256;
    const double rate_bits_per_symbol =
        static_cast<double>(cfg.total_info()) / static_cast<double>(cfg.block_length());
    const unsigned workers = std::max(1u, cfg.workers);

    std::vector<BlerPoint> points;
    for (std::size_t pi = 0; pi < cfg.esn0_db.size(); ++pi) {
        const double esn0 = cfg.esn0_db[pi];
        const double sigma = sigma_from_esn0_db(esn0);
        std::uint64_t frames = 0, frame_errors = 0, bit_errors = 0;
        if (workers == 1) {
            Decoder dec = make_decoder();
            while (frames < cfg.stop.max_frames && frame_errors < cfg.stop.target_errors) {
                const std::uint64_t block =
                    std::min<std::uint64_t>(kBlockFrames, cfg.stop.max_frames - frames);
                for (std::uint64_t f = 0; f < block; ++f) {
                    const auto o = simulate_frame(cfg, sigma, interleaver, dec, pi, frames + f);
                    frame_errors += o.frame_error;
                    bit_errors += o.bit_errors;
                }
                frames += block;
            }
        } else {
            // Same fixed block size as the single-worker path; workers only
            // split the frame indices inside a block.
            std::vector<Decoder> decs;
            decs.reserve(workers);
            for (unsigned w = 0; w < workers; ++w) decs.push_back(make_decoder());
            while (frames < cfg.stop.max_frames && frame_errors < cfg.stop.target_errors) {
                const std::uint64_t block =
                    std::min<std::uint64_t>(kBlockFrames, cfg.stop.max_frames - frames);
                std::vector<std::uint64_t> fe(workers, 0), be(workers, 0);
                std::vector<std::thread> pool;
                for (unsigned w = 0; w < workers; ++w) {
                    pool.emplace_back([&, w]() {
                        for (std::uint64_t f = w; f < block; f += workers) {
                            const auto o =
                                simulate_frame(cfg, sigma, interleaver, decs[w], pi, frames + f);
                            fe[w] += o.frame_error;
                            be[w] += o.bit_errors;
                        }
                    });
                }
                for (auto& t : pool) t.join();
                for (unsigned w = 0; w < workers; ++w) {
                    frame_errors += fe[w];
                    bit_errors += be[w];
                }
                frames += block;
            }
        }
        BlerPoint p;
        p.esn0_db = esn0;
        p.ebn0_db = esn0 - 10.0 * std::log10(rate_bits_per_symbol);
        p.frames = frames;
        p.frame_errors = frame_errors;
        p.bit_errors = bit_errors;
        p.bler = static_cast<double>(frame_errors) / static_cast<double>(frames);
        points.push_back(p);
        if (on_point) on_point(p);
    }
    return points;
}

} // namespace detail

inline std::vector<BlerPoint> run_bler(const SimConfig& cfg,
                                       const std::function<void(const BlerPoint&)>& on_point = {}) {
    require(cfg.scheme == Scheme::PCM, "run_bler: config is not a PCM setup");
    cfg.validate();
    static const std::vector<std::size_t> no_interleaver;
    return detail::run_points<MsdDecoder>(
        cfg, no_interleaver, [&] { return MsdDecoder(cfg.mlc, cfg.list_size); }, on_point);
}

inline std::vector<BlerPoint> run_bipcm_bler(
    const SimConfig& cfg, const std::function<void(const BlerPoint&)>& on_point = {}) {
    require(cfg.scheme == Scheme::BIPCM, "run_bipcm_bler: config is not a BIPCM setup");
    cfg.validate();
    const auto interleaver =
        make_interleaver(cfg.m() * cfg.block_length(), cfg.bipcm.interleaver_seed);
    return detail::run_points<BipcmDecoder>(
        cfg, interleaver, [&] { return BipcmDecoder(cfg.bipcm, interleaver, cfg.list_size); },
        on_point);
}

// CSV row format shared by the CLI and the acceptance suite.
inline std::string bler_csv_header() {
    return "scheme,decoder,list,m,N,K,esn0_db,ebn0_db,frames,frame_errors,bit_errors,bler";
}

inline std::string bler_csv_row(const SimConfig& cfg, const BlerPoint& p) {
    std::string row;
    row += to_string(cfg.scheme);
    row += ',';
    row += to_string(cfg.decoder);
    row += ',' + std::to_string(cfg.list_size);
    row += ',' + std::to_string(cfg.m());
    row += ',' + std::to_string(cfg.block_length());
    row += ',' + std::to_string(cfg.total_info());
    row += ',' + format_double(p.esn0_db);
    row += ',' + format_double(p.ebn0_db);
    row += ',' + std::to_string(p.frames);
    row += ',' + std::to_string(p.frame_errors);
    row += ',' + std::to_string(p.bit_errors);
    row += ',' + format_double(p.bler);
    return row;
}

} // namespace pcm

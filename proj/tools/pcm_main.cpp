// pcm: capacity tables, labeling search, code construction, rate curves and
// BLER simulation for polar coded modulation over PAM/AWGN.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pcm/manifest.hpp"
#include "pcm/pcm.hpp"

namespace {

namespace fs = std::filesystem;

std::vector<double> parse_value_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        // lo:hi:step (inclusive, small epsilon on the top end)
        double lo = 0, hi = 0, step = 0;
        char c1 = 0, c2 = 0;
        std::istringstream ss(text);
        if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
            throw pcm::InvalidParameter(what + ": expected 'lo:hi:step' or comma list");
        for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
    } else {
        std::istringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            out.push_back(std::stod(tok));
        }
    }
    if (out.empty()) throw pcm::InvalidParameter(what + ": empty list");
    return out;
}

pcm::LabelingFamily parse_labeling_source(const std::string& text) {
    pcm::LabelingFamily fam;
    if (text == "natural") {
        fam.kind = pcm::LabelingKind::Natural;
    } else if (text == "gray") {
        fam.kind = pcm::LabelingKind::Gray;
    } else if (text.rfind("canonical:", 0) == 0) {
        fam.kind = pcm::LabelingKind::CanonicalEnumerated;
        fam.canonical_index = std::stoul(text.substr(10));
    } else {
        fam.kind = pcm::LabelingKind::Explicit;
        const std::string path = text.rfind("file:", 0) == 0 ? text.substr(5) : text;
        fam.explicit_table = pcm::read_labeling_file(path);
    }
    return fam;
}

struct DesignPoint {
    double sigma = 0.0;
    bool automatic = false;
};

DesignPoint resolve_design(const pcm::Constellation& c, std::size_t n, std::size_t k,
                           double design_esn0, double design_sigma) {
    DesignPoint d;
    if (design_sigma > 0.0) {
        d.sigma = design_sigma;
    } else if (design_esn0 > -1e8) {
        d.sigma = pcm::sigma_from_esn0_db(design_esn0);
    } else {
        d.sigma = pcm::default_design_sigma(c, n, k);
        d.automatic = true;
    }
    return d;
}

pcm::DecoderKind parse_decoder(const std::string& name) {
    if (name == "sc") return pcm::DecoderKind::SC;
    if (name == "scl") return pcm::DecoderKind::SCL;
    if (name == "cascl") return pcm::DecoderKind::CASCL;
    throw pcm::InvalidParameter("decoder must be sc, scl or cascl");
}

std::string labeling_source_string(const std::string& raw) { return raw.empty() ? "natural" : raw; }

int cmd_capacity(int m, const std::string& labeling_src, const std::string& snr_list,
                 const std::string& out_path) {
    const auto c = pcm::make_pam(m);
    const auto lab = parse_labeling_source(labeling_source_string(labeling_src)).make(m);
    const auto snrs = parse_value_list(snr_list, "--snr");

    std::ofstream os(out_path);
    if (!os) throw pcm::ParseError("cannot open for writing: " + out_path);
    os << "esn0_db,sigma";
    for (int j = 1; j <= m; ++j) os << ",I_W" << j;
    os << ",I_total\n";
    for (double esn0 : snrs) {
        const double sigma = pcm::sigma_from_esn0_db(esn0);
        const auto caps = pcm::level_capacity_profile(lab, c, sigma);
        const double total = pcm::total_capacity(lab, c, sigma);
        os << pcm::format_double(esn0) << "," << pcm::format_double(sigma);
        for (double v : caps) os << "," << pcm::format_double(v);
        os << "," << pcm::format_double(total) << "\n";
    }
    os.close();

    pcm::RunManifest man;
    man.command = "capacity";
    man.tool_version = pcm::kVersion;
    man.timestamp = pcm::now_iso8601();
    man.add("m", std::to_string(m));
    man.add("labeling", labeling_source_string(labeling_src));
    man.add("snr", snr_list);
    man.add("out", out_path);
    man.outputs.push_back(out_path);
    pcm::write_manifest(man, out_path);
    std::cout << "wrote " << out_path << " (" << snrs.size() << " rows)\n";
    return 0;
}

int cmd_search(int m, std::size_t n, std::size_t k, double design_esn0, double design_sigma,
               unsigned workers, bool allow_large, const std::string& out_path,
               const std::string& best_out) {
    const auto c = pcm::make_pam(m);
    const DesignPoint d = resolve_design(c, n, k, design_esn0, design_sigma);
    const auto rep = pcm::search_optimal_labeling(m, n, k, d.sigma, workers, allow_large);
    pcm::write_search_report_file(out_path, rep);
    const std::string best_path = best_out.empty() ? out_path + ".best.lab" : best_out;
    pcm::write_labeling_file(best_path, rep.best());

    pcm::RunManifest man;
    man.command = "search";
    man.tool_version = pcm::kVersion;
    man.timestamp = pcm::now_iso8601();
    man.add("m", std::to_string(m));
    man.add("n", std::to_string(n));
    man.add("k", std::to_string(k));
    man.add("design-sigma", pcm::format_double(d.sigma));
    man.add("workers", std::to_string(workers));
    if (allow_large) man.add("allow-large", "");
    man.add("out", out_path);
    man.add("best-out", best_path);
    man.outputs.push_back(out_path);
    man.outputs.push_back(best_path);
    pcm::write_manifest(man, out_path);

    std::cout << "evaluated " << rep.evaluated_count << " candidate labelings at sigma="
              << pcm::format_double(d.sigma) << (d.automatic ? " (auto)" : "") << "\n";
    std::cout << "best labeling " << rep.best().to_string()
              << " predicted_bler=" << pcm::format_double(rep.ranked.front().predicted_bler)
              << "\n";
    std::cout << "wrote " << out_path << " and " << best_path << "\n";
    return 0;
}

int cmd_construct(int m, std::size_t n, std::size_t k, const std::string& labeling_src,
                  double design_esn0, double design_sigma, int crc_width,
                  const std::string& crc_mode, const std::string& out_path) {
    const auto c = pcm::make_pam(m);
    const auto fam = parse_labeling_source(labeling_source_string(labeling_src));
    const auto lab = fam.make(m);

    pcm::CrcConfig crc = pcm::default_crc16();
    crc.width = crc_width;
    if (crc_width == 8) { crc.polynomial = 0x07; crc.initial = 0x00; }
    if (crc_width == 24) { crc.polynomial = 0x864CFB; crc.initial = 0x000000; }
    const bool crc_inside = crc_mode != "outside";
    const std::size_t info_positions = crc_inside ? k : k + crc.width;

    const DesignPoint d = resolve_design(c, n, info_positions, design_esn0, design_sigma);
    auto spec = pcm::build_mlc_code(lab, c, d.sigma, n, info_positions);
    spec.crc = crc;
    spec.crc_inside = crc_inside;

    // The spec file references a labeling file; emit one next to the spec
    // unless the source already was a file.
    std::string lab_ref;
    if (fam.kind == pcm::LabelingKind::Explicit) {
        const std::string raw = labeling_source_string(labeling_src);
        lab_ref = raw.rfind("file:", 0) == 0 ? raw.substr(5) : raw;
    } else {
        lab_ref = out_path + ".lab";
        pcm::write_labeling_file(lab_ref, lab);
        // store relative to the spec file's directory
        lab_ref = fs::path(lab_ref).filename().string();
    }
    spec.labeling_ref = lab_ref;
    pcm::write_code_spec_file(out_path, spec);

    pcm::RunManifest man;
    man.command = "construct";
    man.tool_version = pcm::kVersion;
    man.timestamp = pcm::now_iso8601();
    man.add("m", std::to_string(m));
    man.add("n", std::to_string(n));
    man.add("k", std::to_string(k));
    man.add("labeling", labeling_source_string(labeling_src));
    man.add("design-sigma", pcm::format_double(d.sigma));
    man.add("crc-width", std::to_string(crc_width));
    man.add("crc-mode", crc_inside ? "inside" : "outside");
    man.add("out", out_path);
    man.outputs.push_back(out_path);
    pcm::write_manifest(man, out_path);

    std::size_t frozen = 0;
    for (const auto& lvl : spec.levels) frozen += lvl.block_length - lvl.info_count();
    std::cout << "constructed m=" << m << " N=" << n << " K=" << info_positions
              << " (frozen " << frozen << ") predicted_bler="
              << pcm::format_double(spec.predicted_bler) << "\n";
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_ratecurve(std::size_t n, double target_bler, const std::string& grid,
                  const std::string& out_path) {
    const auto caps = parse_value_list(grid, "--grid");
    const auto curve = pcm::max_rate_curve(n, target_bler, caps);
    std::ofstream os(out_path);
    if (!os) throw pcm::ParseError("cannot open for writing: " + out_path);
    os << "capacity,rate\n";
    for (const auto& pt : curve)
        os << pcm::format_double(pt.capacity) << "," << pcm::format_double(pt.rate) << "\n";
    os.close();

    pcm::RunManifest man;
    man.command = "ratecurve";
    man.tool_version = pcm::kVersion;
    man.timestamp = pcm::now_iso8601();
    man.add("n", std::to_string(n));
    man.add("target-bler", pcm::format_double(target_bler));
    man.add("grid", grid);
    man.add("out", out_path);
    man.outputs.push_back(out_path);
    pcm::write_manifest(man, out_path);
    std::cout << "wrote " << out_path << " (" << curve.size() << " rows)\n";
    return 0;
}

int cmd_simulate(const std::string& spec_path, bool bipcm, int m, std::size_t n, std::size_t k,
                 double design_esn0, double design_sigma, std::uint64_t interleaver_seed,
                 const std::string& decoder_name, std::size_t list_size,
                 const std::string& snr_list, bool snr_is_ebn0, std::uint64_t max_frames,
                 std::uint64_t target_errors, std::uint64_t seed, unsigned workers,
                 const std::string& out_path) {
    pcm::SimConfig cfg;
    cfg.decoder = parse_decoder(decoder_name);
    cfg.list_size = cfg.decoder == pcm::DecoderKind::SC ? 1 : list_size;
    cfg.stop = {max_frames, target_errors};
    cfg.master_seed = seed;
    cfg.workers = workers;

    if (bipcm) {
        pcm::require(spec_path.empty(), "--spec and --bipcm are mutually exclusive");
        const auto c = pcm::make_pam(m);
        const DesignPoint d = resolve_design(c, n, k, design_esn0, design_sigma);
        cfg.scheme = pcm::Scheme::BIPCM;
        cfg.bipcm = pcm::build_bipcm_code(m, n, k, d.sigma, interleaver_seed);
    } else {
        pcm::require(!spec_path.empty(), "simulate needs --spec or --bipcm");
        cfg.scheme = pcm::Scheme::PCM;
        cfg.mlc = pcm::read_code_spec_file(spec_path);
    }

    const double rate =
        static_cast<double>(cfg.payload_length()) / static_cast<double>(cfg.block_length());
    auto snrs = parse_value_list(snr_list, "--snr");
    if (snr_is_ebn0)
        for (double& v : snrs) v += 10.0 * std::log10(rate);
    cfg.esn0_db = snrs;

    std::ofstream os(out_path);
    if (!os) throw pcm::ParseError("cannot open for writing: " + out_path);
    os << pcm::bler_csv_header() << "\n";
    os.flush();
    auto on_point = [&](const pcm::BlerPoint& p) {
        os << pcm::bler_csv_row(cfg, p) << "\n";
        os.flush();  // long sweeps stay inspectable
        std::cout << pcm::bler_csv_row(cfg, p) << "\n";
    };
    if (bipcm)
        pcm::run_bipcm_bler(cfg, on_point);
    else
        pcm::run_bler(cfg, on_point);
    os.close();

    pcm::RunManifest man;
    man.command = "simulate";
    man.tool_version = pcm::kVersion;
    man.timestamp = pcm::now_iso8601();
    if (bipcm) {
        man.add("bipcm", "");
        man.add("m", std::to_string(m));
        man.add("n", std::to_string(n));
        man.add("k", std::to_string(k));
        man.add("design-sigma", pcm::format_double(cfg.bipcm.sigma_design));
        man.add("interleaver-seed", std::to_string(interleaver_seed));
    } else {
        man.add("spec", spec_path);
    }
    man.add("decoder", decoder_name);
    man.add("list", std::to_string(cfg.list_size));
    man.add("snr", snr_list);
    if (snr_is_ebn0) man.add("ebn0", "");
    man.add("max-frames", std::to_string(max_frames));
    man.add("target-errors", std::to_string(target_errors));
    man.add("seed", std::to_string(seed));
    man.add("workers", std::to_string(workers));
    man.add("out", out_path);
    man.outputs.push_back(out_path);
    pcm::write_manifest(man, out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"polar coded modulation toolbox"};
    app.require_subcommand(1);

    // capacity
    auto* cap = app.add_subcommand("capacity", "per-level and total channel capacities");
    cap->set_config("--config", "", "key=value config file; command-line flags take precedence");
    int cap_m = 3;
    std::string cap_lab, cap_snr = "0:10:1", cap_out = "capacity.csv";
    cap->add_option("--m", cap_m, "bits per symbol");
    cap->add_option("--labeling", cap_lab, "natural | gray | canonical:IDX | <file>");
    cap->add_option("--snr", cap_snr, "Es/N0 list in dB (comma list or lo:hi:step)");
    cap->add_option("--out", cap_out, "output CSV");

    // search
    auto* sea = app.add_subcommand("search", "exhaustive optimal-labeling search");
    sea->set_config("--config", "", "key=value config file; command-line flags take precedence");
    int sea_m = 3;
    std::size_t sea_n = 512, sea_k = 512;
    double sea_esn0 = -1e9, sea_sigma = 0.0;
    unsigned sea_workers = 1;
    bool sea_large = false;
    std::string sea_out = "search.csv", sea_best;
    sea->add_option("--m", sea_m, "bits per symbol");
    sea->add_option("--n", sea_n, "per-level block length (power of two)");
    sea->add_option("--k", sea_k, "information bits");
    sea->add_option("--design-esn0", sea_esn0, "design Es/N0 in dB (default: auto)");
    sea->add_option("--design-sigma", sea_sigma, "design noise std (overrides --design-esn0)");
    sea->add_option("--workers", sea_workers, "parallel workers");
    sea->add_flag("--allow-large", sea_large, "permit the m=4 enumeration");
    sea->add_option("--out", sea_out, "report CSV");
    sea->add_option("--best-out", sea_best, "best labeling file (default: <out>.best.lab)");

    // construct
    auto* con = app.add_subcommand("construct", "build a code spec from a labeling");
    con->set_config("--config", "", "key=value config file; command-line flags take precedence");
    int con_m = 3, con_crc_width = 16;
    std::size_t con_n = 512, con_k = 512;
    double con_esn0 = -1e9, con_sigma = 0.0;
    std::string con_lab, con_crc_mode = "inside", con_out = "code.pcs";
    con->add_option("--m", con_m, "bits per symbol");
    con->add_option("--n", con_n, "per-level block length (power of two)");
    con->add_option("--k", con_k, "information bits (payload accounting per --crc-mode)");
    con->add_option("--labeling", con_lab, "natural | gray | canonical:IDX | <file>");
    con->add_option("--design-esn0", con_esn0, "design Es/N0 in dB (default: auto)");
    con->add_option("--design-sigma", con_sigma, "design noise std (overrides --design-esn0)");
    con->add_option("--crc-width", con_crc_width, "CRC width for CA-SCL (8, 16 or 24)");
    con->add_option("--crc-mode", con_crc_mode, "inside: CRC bits count toward K; outside: on top");
    con->add_option("--out", con_out, "output code-spec file");

    // ratecurve
    auto* rat = app.add_subcommand("ratecurve", "max polar code rate vs channel capacity");
    rat->set_config("--config", "", "key=value config file; command-line flags take precedence");
    std::size_t rat_n = 1024;
    double rat_target = 1e-3;
    std::string rat_grid = "0.05:0.95:0.05", rat_out = "ratecurve.csv";
    rat->add_option("--n", rat_n, "block length (power of two)");
    rat->add_option("--target-bler", rat_target, "union-bound BLER budget");
    rat->add_option("--grid", rat_grid, "capacity grid (comma list or lo:hi:step)");
    rat->add_option("--out", rat_out, "output CSV");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo BLER");
    sim->set_config("--config", "", "key=value config file; command-line flags take precedence");
    std::string sim_spec, sim_decoder = "sc", sim_snr, sim_out = "bler.csv";
    bool sim_bipcm = false, sim_ebn0 = false;
    int sim_m = 3;
    std::size_t sim_n = 512, sim_k = 512, sim_list = 32;
    double sim_esn0 = -1e9, sim_sigma = 0.0;
    std::uint64_t sim_ilseed = 1, sim_maxf = 100000, sim_terr = 100, sim_seed = 1;
    unsigned sim_workers = 1;
    sim->add_option("--spec", sim_spec, "PCM code-spec file (from construct)");
    sim->add_flag("--bipcm", sim_bipcm, "simulate the bit-interleaved baseline instead");
    sim->add_option("--m", sim_m, "bits per symbol (BIPCM)");
    sim->add_option("--n", sim_n, "symbols per frame (BIPCM)");
    sim->add_option("--k", sim_k, "information bits (BIPCM)");
    sim->add_option("--design-esn0", sim_esn0, "BIPCM construction Es/N0 in dB (default: auto)");
    sim->add_option("--design-sigma", sim_sigma, "BIPCM construction noise std");
    sim->add_option("--interleaver-seed", sim_ilseed, "BIPCM interleaver seed");
    sim->add_option("--decoder", sim_decoder, "sc | scl | cascl");
    sim->add_option("--list", sim_list, "list size for scl/cascl");
    sim->add_option("--snr", sim_snr, "SNR list in dB (comma list or lo:hi:step)")->required();
    sim->add_flag("--ebn0", sim_ebn0, "interpret --snr as Eb/N0 (default Es/N0)");
    sim->add_option("--max-frames", sim_maxf, "frame budget per point");
    sim->add_option("--target-errors", sim_terr, "stop after this many frame errors");
    sim->add_option("--seed", sim_seed, "master seed");
    sim->add_option("--workers", sim_workers, "parallel workers");
    sim->add_option("--out", sim_out, "output CSV");

    try {
        app.parse(argc, argv);
        if (cap->parsed())
            return cmd_capacity(cap_m, cap_lab, cap_snr, cap_out);
        if (sea->parsed())
            return cmd_search(sea_m, sea_n, sea_k, sea_esn0, sea_sigma, sea_workers, sea_large,
                              sea_out, sea_best);
        if (con->parsed())
            return cmd_construct(con_m, con_n, con_k, con_lab, con_esn0, con_sigma, con_crc_width,
                                 con_crc_mode, con_out);
        if (rat->parsed())
            return cmd_ratecurve(rat_n, rat_target, rat_grid, rat_out);
        if (sim->parsed())
            return cmd_simulate(sim_spec, sim_bipcm, sim_m, sim_n, sim_k, sim_esn0, sim_sigma,
                                sim_ilseed, sim_decoder, sim_list, sim_snr, sim_ebn0, sim_maxf,
                                sim_terr, sim_seed, sim_workers, sim_out);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

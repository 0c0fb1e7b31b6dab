// Integration tests for the pcm command-line tool (invoked as a subprocess).

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcm/manifest.hpp"
#include "pcm/pcm.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
};

RunResult run_cli(const std::string& args, const fs::path& cwd) {
    const fs::path out = cwd / "stdout.txt";
    const std::string cmd = "cd " + cwd.string() + " && " + PCM_CLI_PATH + " " + args + " > " +
                            out.string() + " 2> " + (cwd / "stderr.txt").string();
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(rc);
    std::ifstream is(out);
    std::stringstream ss;
    ss << is.rdbuf();
    r.stdout_text = ss.str();
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "pcm_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(is.good());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("cli capacity: per-level columns sum to the total") {
    const auto dir = fresh_dir("capacity");
    const auto r = run_cli("capacity --m 3 --labeling natural --snr 0,3,6 --out caps.csv", dir);
    REQUIRE(r.exit_code == 0);
    const auto rows = parse_csv(slurp(dir / "caps.csv"));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"esn0_db", "sigma", "I_W1", "I_W2", "I_W3",
                                              "I_total"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double sum = std::stod(rows[i][2]) + std::stod(rows[i][3]) + std::stod(rows[i][4]);
        CHECK(std::abs(sum - std::stod(rows[i][5])) <= 1e-6);
    }
    // library equivalence of one row
    const double sigma = pcm::sigma_from_esn0_db(3.0);
    const auto caps = pcm::level_capacity_profile(pcm::natural_labeling(3), pcm::make_pam(3), sigma);
    CHECK(std::stod(rows[2][2]) == Catch::Approx(caps[0]).margin(1e-15));
    CHECK(fs::exists(dir / "caps.csv.manifest"));
}

TEST_CASE("cli capacity: m=1 level equals total") {
    const auto dir = fresh_dir("capacity1");
    const auto r = run_cli("capacity --m 1 --snr 0:4:2 --out c1.csv", dir);
    REQUIRE(r.exit_code == 0);
    const auto rows = parse_csv(slurp(dir / "c1.csv"));
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(std::stod(rows[i][2]) == Catch::Approx(std::stod(rows[i][3])).margin(1e-12));
}

TEST_CASE("cli search prints the evaluated count and emits the best labeling") {
    const auto dir = fresh_dir("search");
    auto r = run_cli("search --m 2 --n 16 --k 16 --design-sigma 0.5 --out rep.csv", dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.stdout_text.find("evaluated 3") != std::string::npos);

    r = run_cli("search --m 1 --n 16 --k 8 --design-sigma 0.8 --out rep1.csv", dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.stdout_text.find("evaluated 1") != std::string::npos);

    // the emitted best labeling file re-parses to the report's first row
    const auto rows = parse_csv(slurp(dir / "rep.csv"));
    REQUIRE(rows.size() >= 2);
    const auto best = pcm::read_labeling_file((dir / "rep.csv.best.lab").string());
    std::string s;
    for (unsigned u = 0; u < 4; ++u) {
        if (u) s += '-';
        s += std::to_string(best.point_index(u));
    }
    CHECK(rows[1][1] == s);
}

TEST_CASE("cli construct: masks, round trip, frozen count") {
    const auto dir = fresh_dir("construct");
    auto r = run_cli("construct --m 2 --n 16 --k 32 --labeling natural --design-sigma 0.6"
                     " --out full.pcs", dir);
    REQUIRE(r.exit_code == 0);
    const std::string text = slurp(dir / "full.pcs");
    // K = mN: the mask line is all information
    CHECK(text.find(std::string(32, 'I')) != std::string::npos);

    r = run_cli("construct --m 3 --n 32 --k 40 --labeling gray --design-sigma 0.5 --out c.pcs",
                dir);
    REQUIRE(r.exit_code == 0);
    const auto spec = pcm::read_code_spec_file((dir / "c.pcs").string());
    CHECK(spec.total_info == 40);
    std::size_t frozen = 0;
    for (const auto& lvl : spec.levels) frozen += lvl.block_length - lvl.info_count();
    CHECK(frozen == 3 * 32 - 40);
    // spec file re-parse equals the in-memory construction
    const auto want = pcm::build_mlc_code(pcm::gray_labeling(3), pcm::make_pam(3), 0.5, 32, 40);
    for (int j = 0; j < 3; ++j)
        CHECK(spec.levels[j].frozen_mask == want.levels[j].frozen_mask);
    // rewrite is byte-identical
    std::ostringstream os;
    pcm::write_code_spec(os, spec);
    CHECK(os.str() == slurp(dir / "c.pcs"));
}

TEST_CASE("cli ratecurve stays below capacity and is monotone") {
    const auto dir = fresh_dir("ratecurve");
    const auto r = run_cli("ratecurve --n 256 --target-bler 1e-3 --grid 0.1:0.9:0.1 --out rc.csv",
                           dir);
    REQUIRE(r.exit_code == 0);
    const auto rows = parse_csv(slurp(dir / "rc.csv"));
    REQUIRE(rows.size() >= 9);
    double prev = -1;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double cap = std::stod(rows[i][0]), rate = std::stod(rows[i][1]);
        CHECK(rate <= cap);
        CHECK(rate >= prev);
        prev = rate;
    }
    // spot check against the library
    const auto pt = pcm::max_rate_curve(256, 1e-3, {0.5});
    CHECK(std::stod(rows[5][1]) == Catch::Approx(pt[0].rate).margin(1e-12));
}

TEST_CASE("cli simulate: determinism, manifest reproduction, noiseless point") {
    const auto dir = fresh_dir("simulate");
    auto r = run_cli("construct --m 2 --n 16 --k 20 --labeling natural --design-sigma 0.55"
                     " --out sim.pcs", dir);
    REQUIRE(r.exit_code == 0);

    const std::string simargs = "simulate --spec sim.pcs --decoder sc --snr 100,5"
                                " --max-frames 512 --target-errors 1000 --seed 7 --out b.csv";
    r = run_cli(simargs, dir);
    REQUIRE(r.exit_code == 0);
    const std::string first = slurp(dir / "b.csv");
    const auto rows = parse_csv(first);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][0] == "scheme");
    CHECK(std::stod(rows[1][11]) == 0.0);  // noiseless point

    // worker-count invariance of the file contents
    r = run_cli("simulate --spec sim.pcs --decoder sc --snr 100,5 --max-frames 512"
                " --target-errors 1000 --seed 7 --workers 3 --out b3.csv", dir);
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(dir / "b3.csv") == first);

    // library cross-check of the noisy point
    pcm::SimConfig cfg;
    cfg.scheme = pcm::Scheme::PCM;
    cfg.mlc = pcm::read_code_spec_file((dir / "sim.pcs").string());
    cfg.decoder = pcm::DecoderKind::SC;
    cfg.esn0_db = {100.0, 5.0};
    cfg.stop = {512, 1000};
    cfg.master_seed = 7;
    const auto pts = pcm::run_bler(cfg);
    CHECK(std::to_string(pts[1].frame_errors) == rows[2][9]);

    // re-run from the manifest alone; primary output must be bit-identical
    const std::string repro = pcm::read_manifest_reproduce((dir / "b.csv.manifest").string());
    CHECK(repro.find("simulate") == 0);
    r = run_cli(repro, dir);
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(dir / "b.csv") == first);
}

TEST_CASE("cli config file: flags take precedence") {
    const auto dir = fresh_dir("config");
    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "m=1\nsnr=0,2\nout=fromcfg.csv\n";
    }
    auto r = run_cli("capacity --config run.cfg", dir);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(dir / "fromcfg.csv"));
    r = run_cli("capacity --config run.cfg --out override.csv", dir);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(dir / "override.csv"));
}

TEST_CASE("cli errors are one-line and nonzero") {
    const auto dir = fresh_dir("errors");
    auto r = run_cli("capacity --m 9 --snr 0 --out x.csv", dir);
    CHECK(r.exit_code != 0);
    const std::string err = slurp(dir / "stderr.txt");
    CHECK(err.rfind("error:", 0) == 0);

    std::ofstream bad(dir / "bad.lab");
    bad << "m=2\n00 0\n01 0\n10 2\n11 3\n";
    bad.close();
    r = run_cli("capacity --m 2 --labeling bad.lab --snr 0 --out x.csv", dir);
    CHECK(r.exit_code != 0);

    r = run_cli("simulate --decoder sc --snr 1 --out x.csv", dir);  // no spec, no --bipcm
    CHECK(r.exit_code != 0);
}

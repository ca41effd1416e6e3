#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "memfir/errors.hpp"
#include "memfir/scenario.hpp"

using namespace memfir;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("memfir_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string without_created(const std::string& manifest) {
    std::istringstream in(manifest);
    std::string out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("created=", 0) != 0) out += line + "\n";
    }
    return out;
}

double metric(const ScenarioResult& r, std::string_view key) {
    const std::string* v = r.metric(key);
    REQUIRE(v != nullptr);
    return std::stod(*v);
}

std::vector<std::string> csv_rows(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(in, line)) rows.push_back(line);
    return rows;
}

} // namespace

TEST_CASE("run_scenario: paper-exp1 artifacts, metrics and manifest") {
    auto cfg = scenario_preset("paper-exp1");
    cfg.out_dir = scratch("exp1");
    const auto r = run_scenario(cfg);
    CHECK(r.status == ExitStatus::Ok);
    const double nrf = metric(r, "noise_reduction_factor");
    CHECK(nrf >= 2.2);
    CHECK(nrf <= 3.2);
    CHECK(metric(r, "binary_bank_max_deviation_v") <= 1e-9);
    CHECK(metric(r, "measured_response_max_rel_dev") <= 0.02);
    CHECK(*r.metric("taps_converged") == "6/6");

    for (const char* f : {"config.ini", "tune_tap0.csv", "tune_tap5.csv", "tune_summary.csv", "signal.csv",
                          "response_analytic.csv", "response_measured.csv", "metrics.txt", "manifest.txt"}) {
        CHECK(fs::exists(cfg.out_dir / f));
    }
    const auto manifest = slurp(cfg.out_dir / "manifest.txt");
    CHECK(manifest.find("config_sha256=" + sha256_hex(slurp(cfg.out_dir / "config.ini"))) != std::string::npos);
    CHECK(manifest.find("seed=2013\n") != std::string::npos);
    for (const auto& f : r.files) {
        if (f == "manifest.txt") continue;
        CHECK(manifest.find("file=" + f.generic_string() + " sha256=" + sha256_hex(slurp(cfg.out_dir / f))) !=
              std::string::npos);
    }
    CHECK(csv_rows(cfg.out_dir / "signal.csv").front() == "index,time_s,input_v,output_v");
    CHECK(csv_rows(cfg.out_dir / "signal.csv").size() == 45001);
    CHECK(csv_rows(cfg.out_dir / "response_analytic.csv").front() == "freq_hz,magnitude");
    CHECK(parse_config(slurp(cfg.out_dir / "config.ini")) == cfg);
}

TEST_CASE("run_scenario: identical seeds give byte-identical artifacts") {
    auto cfg = scenario_preset("paper-exp1");
    cfg.out_dir = scratch("det");
    const auto first = run_scenario(cfg);
    std::vector<std::string> before;
    for (const auto& f : first.files) before.push_back(slurp(cfg.out_dir / f));
    const auto second = run_scenario(cfg);
    REQUIRE(second.files == first.files);
    for (std::size_t k = 0; k < first.files.size(); ++k) {
        const auto& f = first.files[k];
        const auto now = slurp(cfg.out_dir / f);
        if (f == "manifest.txt") {
            CHECK(without_created(now) == without_created(before[k]));
        } else {
            CHECK_MESSAGE(now == before[k], f.string());
        }
    }
}

TEST_CASE("run_scenario: different seeds change the stimulus") {
    auto a = scenario_preset("paper-exp1");
    auto b = a;
    apply_master_seed(b, 99);
    a.out_dir = scratch("seed_a");
    b.out_dir = scratch("seed_b");
    run_scenario(a);
    run_scenario(b);
    CHECK(slurp(a.out_dir / "signal.csv") != slurp(b.out_dir / "signal.csv"));
}

TEST_CASE("run_scenario: non-convergence yields status 2 with partial artifacts") {
    auto cfg = scenario_preset("paper-exp1");
    cfg.tune.max_pulses = 2;
    cfg.out_dir = scratch("nonconv");
    const auto r = run_scenario(cfg);
    CHECK(r.status == ExitStatus::NonConvergence);
    CHECK(fs::exists(cfg.out_dir / "tune_summary.csv"));
    CHECK(fs::exists(cfg.out_dir / "manifest.txt"));
}

TEST_CASE("run_scenario: unwritable output is an IO error") {
    const fs::path blocker = scratch("blocker");
    std::ofstream(blocker) << "file, not a directory";
    auto cfg = scenario_preset("paper-exp1");
    cfg.out_dir = blocker / "sub";
    CHECK_THROWS_AS(run_scenario(cfg), IoError);
}

TEST_CASE("run_demo_paper: cutoff ratio and combined metrics") {
    const fs::path out = scratch("demo");
    const auto r = run_demo_paper(2013, out);
    CHECK(r.status == ExitStatus::Ok);
    const double ratio = metric(r, "cutoff_ratio");
    CHECK(ratio == doctest::Approx(metric(r, "cutoff_hz_config2") / metric(r, "cutoff_hz_config1")));
    CHECK(std::abs(ratio - 2.0) <= 0.3);
    CHECK(fs::exists(out / "exp1" / "metrics.txt"));
    CHECK(fs::exists(out / "exp2" / "metrics.txt"));
    const auto text = slurp(out / "metrics.txt");
    for (const char* key : {"noise_reduction_factor=", "cutoff_hz_config1=", "cutoff_hz_config2=", "cutoff_ratio=",
                            "sine_amplitude_ratio="}) {
        CHECK(text.find(key) != std::string::npos);
    }
    CHECK(slurp(out / "manifest.txt").find("file=exp1/signal.csv sha256=") != std::string::npos);
}

TEST_CASE("run_tune and run_freqresp write their artifact subsets") {
    auto cfg = scenario_preset("paper-exp2");
    cfg.out_dir = scratch("tune");
    const auto t = run_tune(cfg);
    CHECK(t.status == ExitStatus::Ok);
    CHECK(csv_rows(cfg.out_dir / "tune_tap0.csv").front() == "pulse_index,pulse_voltage_v,measured_r_ohms");
    CHECK(csv_rows(cfg.out_dir / "tune_summary.csv").size() == 7);

    cfg.out_dir = scratch("freq");
    const auto f = run_freqresp(cfg);
    CHECK(f.status == ExitStatus::Ok);
    CHECK(csv_rows(cfg.out_dir / "response_analytic.csv").size() == cfg.analysis.grid_points + 1);
    CHECK(csv_rows(cfg.out_dir / "response_measured.csv").size() == cfg.analysis.probe_freqs.size() + 1);
    CHECK_FALSE(fs::exists(cfg.out_dir / "signal.csv"));
}

TEST_CASE("export_sweep: amplitude family") {
    auto cfg = scenario_preset("paper-fig1");
    cfg.out_dir = scratch("sweep");
    const auto r = export_sweep(cfg);
    double prev = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double m = metric(r, "sweep_v" + std::to_string(k) + ".csv.final_memristance_ohms");
        CHECK(m > prev);
        prev = m;
    }
    prev = 1e300;
    for (int k = 0; k < 4; ++k) {
        const double m = metric(r, "sweep_i" + std::to_string(k) + ".csv.final_memristance_ohms");
        CHECK(m < prev);
        prev = m;
    }
    for (const auto& f : r.files) {
        if (f.string().rfind("sweep_", 0) != 0 || f == "sweep_summary.csv") continue;
        const auto rows = csv_rows(cfg.out_dir / f);
        CHECK(rows.front() == "v_volts,i_amperes");
        CHECK(rows[1] == "0,0");
        CHECK(rows.back() == "0,0");
    }
}

TEST_CASE("export_sweep: sub-threshold loop is a straight line") {
    auto cfg = scenario_preset("paper-fig1");
    cfg.sweep.v_peaks = {0.2};
    cfg.sweep.i_peaks = {};
    cfg.out_dir = scratch("sweep_line");
    export_sweep(cfg);
    const auto rows = csv_rows(cfg.out_dir / "sweep_v0.csv");
    REQUIRE(rows.size() == cfg.sweep.n_steps + 1);
    double slope = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto comma = rows[k].find(',');
        const double v = std::stod(rows[k].substr(0, comma));
        const double i = std::stod(rows[k].substr(comma + 1));
        if (v == 0.0) {
            CHECK(i == 0.0);
            continue;
        }
        if (slope == 0.0) slope = i / v;
        CHECK(i / v == doctest::Approx(slope).epsilon(1e-12));
    }
}

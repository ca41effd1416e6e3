#include "memfir/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "memfir/binary_bank.hpp"
#include "memfir/csv.hpp"
#include "memfir/errors.hpp"

namespace fs = std::filesystem;

namespace memfir {

namespace {

// Collects written files and their hashes for the manifest.
class ArtifactDir {
  public:
    explicit ArtifactDir(fs::path root) : root_(std::move(root)) {
        std::error_code ec;
        fs::create_directories(root_, ec);
        if (ec || !fs::is_directory(root_)) throw IoError("cannot create output directory '" + root_.string() + "'");
    }

    void write(const fs::path& rel, const std::string& content) {
        const fs::path full = root_ / rel;
        std::error_code ec;
        fs::create_directories(full.parent_path(), ec);
        std::ofstream out(full, std::ios::binary | std::ios::trunc);
        out << content;
        out.close();
        if (!out) throw IoError("cannot write '" + full.string() + "'");
        entries_.emplace_back(rel, sha256_hex(content));
    }

    // Lists a file written by someone else under this root.
    void record(const fs::path& rel, std::string hash) { entries_.emplace_back(rel, std::move(hash)); }

    void write_manifest(const std::string& config_text, std::uint64_t seed) {
        std::ostringstream os;
        os << "config_sha256=" << sha256_hex(config_text) << '\n' << "seed=" << seed << '\n';
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm utc{};
        gmtime_r(&now, &utc);
        os << "created=" << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ") << '\n';
        for (const auto& [rel, hash] : entries_) os << "file=" << rel.generic_string() << " sha256=" << hash << '\n';
        const fs::path full = root_ / "manifest.txt";
        std::ofstream out(full, std::ios::binary | std::ios::trunc);
        out << os.str();
        if (!out) throw IoError("cannot write '" + full.string() + "'");
    }

    std::vector<fs::path> files() const {
        std::vector<fs::path> out;
        for (const auto& e : entries_) out.push_back(e.first);
        out.emplace_back("manifest.txt");
        return out;
    }

  private:
    fs::path root_;
    std::vector<std::pair<fs::path, std::string>> entries_;
};

template <typename F>
std::string render(F&& f) {
    std::ostringstream os;
    f(os);
    return os.str();
}

std::string metrics_text(const Metrics& m) {
    std::string out;
    for (const auto& [k, v] : m) out += k + "=" + v + "\n";
    return out;
}

void write_tuning(ArtifactDir& dir, const ScenarioConfig& cfg, const ProgrammedBank& bank) {
    std::ostringstream summary;
    summary << "tap,target_ohms,final_ohms,converged,pulses_used\n";
    for (std::size_t k = 0; k < bank.reports.size(); ++k) {
        const auto& r = bank.reports[k];
        dir.write("tune_tap" + std::to_string(k) + ".csv", render([&](std::ostream& os) { write_tune_csv(os, r); }));
        summary << k << ',' << csv::fmt(cfg.targets[k]) << ',' << csv::fmt(r.final_r) << ','
                << (r.converged ? 1 : 0) << ',' << r.pulses_used << '\n';
    }
    dir.write("tune_summary.csv", summary.str());
}

std::size_t converged_count(const ProgrammedBank& bank) {
    return static_cast<std::size_t>(
        std::count_if(bank.reports.begin(), bank.reports.end(), [](const TuneReport& r) { return r.converged; }));
}

ExitStatus tuning_status(const ProgrammedBank& bank) {
    return bank.all_converged ? ExitStatus::Ok : ExitStatus::NonConvergence;
}

std::string not_found_or(double (*f)(const ResponseCurve&), const ResponseCurve& c) {
    try {
        return csv::fmt(f(c));
    } catch (const MetricError&) {
        return "none";
    }
}

// Largest relative gap between measured and analytic gain at probe points
// whose analytic gain is at least 10 % of DC (nulls excluded).
double response_deviation(std::span<const double> weights, const ResponseCurve& measured, double f_s) {
    const double dc = response_magnitude(weights, 0.0, f_s);
    double worst = 0.0;
    for (std::size_t k = 0; k < measured.freqs.size(); ++k) {
        const double f = measured.freqs[k];
        const double analytic = response_magnitude(weights, f, f_s);
        if (analytic < 0.1 * dc) continue;
        worst = std::max(worst, std::abs(measured.magnitude[k] - analytic) / analytic);
    }
    return worst;
}

ExitStatus worse(ExitStatus a, ExitStatus b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

constexpr double kBankEquivalenceBound = 1e-9; // volts

} // namespace

const std::string* ScenarioResult::metric(std::string_view key) const {
    for (const auto& [k, v] : metrics) {
        if (k == key) return &v;
    }
    return nullptr;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("sha256 digest failed");
    }
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned int k = 0; k < len; ++k) os << std::setw(2) << static_cast<int>(digest[k]);
    return os.str();
}

ProgrammedBank program_bank(const ScenarioConfig& cfg) {
    validate(cfg);
    ProgrammedBank bank;
    bank.devices.reserve(cfg.filter.n_taps);
    for (std::size_t k = 0; k < cfg.filter.n_taps; ++k) {
        Rng rng = make_stream(cfg.variation.seed, k);
        bank.devices.push_back(spawn_device(cfg.device, cfg.variation, rng));
    }
    bank.reports = tune_bank(bank.devices, cfg.targets, cfg.tune, split_seed(cfg.seed, streams::kTuning));
    bank.all_converged =
        std::all_of(bank.reports.begin(), bank.reports.end(), [](const TuneReport& r) { return r.converged; });
    return bank;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    validate(cfg);
    ArtifactDir dir(cfg.out_dir);
    const std::string config_text = to_ini(cfg);
    dir.write("config.ini", config_text);

    ScenarioResult result;
    try {
        const ProgrammedBank bank = program_bank(cfg);
        write_tuning(dir, cfg, bank);
        result.status = tuning_status(bank);

        const Signal input = noisy_sine(cfg.stimulus);
        MixedSignalFilter filter(cfg.filter, bank.devices);
        const Signal output = filter.run(input);
        dir.write("signal.csv", render([&](std::ostream& os) { write_signal_csv(os, input, output); }));

        const auto weights = weights_from_devices(filter.taps(), cfg.filter);
        double dc_gain = 0.0;
        for (double w : weights) dc_gain += w;
        const auto nr = noise_reduction(input, output, cfg.stimulus.sine_freq, cfg.filter.n_taps, dc_gain);

        const auto analytic = frequency_response(weights, cfg.filter.f_s, cfg.analysis.grid_points);
        filter.reset();
        const auto measured = measured_frequency_response(filter, cfg.analysis.probe_freqs, cfg.analysis.probe_amp,
                                                          cfg.analysis.probe_periods);
        dir.write("response_analytic.csv", render([&](std::ostream& os) { write_response_csv(os, analytic); }));
        dir.write("response_measured.csv", render([&](std::ostream& os) { write_response_csv(os, measured); }));

        const auto bank_fig4 = build_binary_bank(weights, cfg.filter, cfg.analysis.bank_v_ref, cfg.device.v_threshold);
        BinaryBankFilter merged(cfg.filter, bank_fig4);
        const Signal merged_out = merged.run(input);
        double bank_dev = 0.0;
        for (std::size_t n = 0; n < output.size(); ++n) {
            bank_dev = std::max(bank_dev, std::abs(merged_out.samples[n] - output.samples[n]));
        }

        Metrics& m = result.metrics;
        m.emplace_back("scenario", cfg.name);
        m.emplace_back("noise_reduction_factor", csv::fmt(nr.factor));
        m.emplace_back("noise_reduction_factor_p2p", csv::fmt(nr.peak_to_peak_factor));
        m.emplace_back("sine_amplitude_ratio", csv::fmt(nr.sine_amplitude_ratio));
        m.emplace_back("input_noise_rms_v", csv::fmt(nr.input_noise_rms));
        m.emplace_back("output_noise_rms_v", csv::fmt(nr.output_noise_rms));
        m.emplace_back("dc_gain", csv::fmt(dc_gain));
        m.emplace_back("cutoff_hz", not_found_or(cutoff_frequency, analytic));
        m.emplace_back("measured_response_max_rel_dev", csv::fmt(response_deviation(weights, measured, cfg.filter.f_s)));
        m.emplace_back("binary_bank_devices", std::to_string(bank_fig4.device_count()));
        m.emplace_back("binary_bank_max_deviation_v", csv::fmt(bank_dev));
        m.emplace_back("adc_saturations", std::to_string(filter.saturation_count()));
        m.emplace_back("taps_converged", std::to_string(converged_count(bank)) + "/" + std::to_string(bank.reports.size()));
        for (std::size_t k = 0; k < bank.devices.size(); ++k) {
            m.emplace_back("tap" + std::to_string(k) + "_memristance_ohms", csv::fmt(bank.devices[k].memristance()));
        }
        dir.write("metrics.txt", metrics_text(m));

        if (bank_dev > kBankEquivalenceBound) {
            throw InvariantViolation("binary-weighted bank deviates from the per-tap pipeline by " + csv::fmt(bank_dev) + " V");
        }
        if (result.status == ExitStatus::NonConvergence) result.message = "one or more taps did not converge";
    } catch (const InvariantViolation& e) {
        result.status = ExitStatus::InvariantViolation;
        result.message = e.what();
    }
    dir.write_manifest(config_text, cfg.seed);
    result.files = dir.files();
    return result;
}

ScenarioResult run_tune(const ScenarioConfig& cfg) {
    validate(cfg);
    ArtifactDir dir(cfg.out_dir);
    const std::string config_text = to_ini(cfg);
    dir.write("config.ini", config_text);
    const ProgrammedBank bank = program_bank(cfg);
    write_tuning(dir, cfg, bank);

    ScenarioResult result;
    result.status = tuning_status(bank);
    if (result.status != ExitStatus::Ok) result.message = "one or more taps did not converge";
    result.metrics.emplace_back("taps_converged",
                                std::to_string(converged_count(bank)) + "/" + std::to_string(bank.reports.size()));
    dir.write_manifest(config_text, cfg.seed);
    result.files = dir.files();
    return result;
}

ScenarioResult run_freqresp(const ScenarioConfig& cfg) {
    validate(cfg);
    ArtifactDir dir(cfg.out_dir);
    const std::string config_text = to_ini(cfg);
    dir.write("config.ini", config_text);
    const ProgrammedBank bank = program_bank(cfg);

    ScenarioResult result;
    result.status = tuning_status(bank);
    if (result.status != ExitStatus::Ok) result.message = "one or more taps did not converge";
    const MixedSignalFilter filter(cfg.filter, bank.devices);
    const auto weights = weights_from_devices(filter.taps(), cfg.filter);
    const auto analytic = frequency_response(weights, cfg.filter.f_s, cfg.analysis.grid_points);
    const auto measured = measured_frequency_response(filter, cfg.analysis.probe_freqs, cfg.analysis.probe_amp,
                                                      cfg.analysis.probe_periods);
    dir.write("response_analytic.csv", render([&](std::ostream& os) { write_response_csv(os, analytic); }));
    dir.write("response_measured.csv", render([&](std::ostream& os) { write_response_csv(os, measured); }));
    result.metrics.emplace_back("cutoff_hz", not_found_or(cutoff_frequency, analytic));
    result.metrics.emplace_back("measured_response_max_rel_dev",
                                csv::fmt(response_deviation(weights, measured, cfg.filter.f_s)));
    dir.write("metrics.txt", metrics_text(result.metrics));
    dir.write_manifest(config_text, cfg.seed);
    result.files = dir.files();
    return result;
}

ScenarioResult export_sweep(const ScenarioConfig& cfg) {
    validate(cfg);
    ArtifactDir dir(cfg.out_dir);
    const std::string config_text = to_ini(cfg);
    dir.write("config.ini", config_text);

    ScenarioResult result;
    std::ostringstream summary;
    summary << "file,kind,peak,final_memristance_ohms\n";
    const auto& s = cfg.sweep;
    for (std::size_t k = 0; k < s.v_peaks.size(); ++k) {
        Rng rng = make_stream(split_seed(cfg.seed, streams::kSweep), k);
        Device d(cfg.device, cfg.variation.sigma_c2c, 1.0);
        const auto trace = voltage_sweep(d, s.v_peaks[k], s.n_steps, s.step_duration, rng);
        const std::string name = "sweep_v" + std::to_string(k) + ".csv";
        dir.write(name, render([&](std::ostream& os) { write_sweep_csv(os, trace); }));
        summary << name << ",voltage," << csv::fmt(s.v_peaks[k]) << ',' << csv::fmt(d.memristance()) << '\n';
        result.metrics.emplace_back(name + ".final_memristance_ohms", csv::fmt(d.memristance()));
    }
    for (std::size_t k = 0; k < s.i_peaks.size(); ++k) {
        Rng rng = make_stream(split_seed(cfg.seed, streams::kSweep), s.v_peaks.size() + k);
        Device d(cfg.device, cfg.variation.sigma_c2c, 0.0);
        const auto trace = current_sweep(d, s.i_peaks[k], s.n_steps, s.step_duration, rng, s.compliance);
        const std::string name = "sweep_i" + std::to_string(k) + ".csv";
        dir.write(name, render([&](std::ostream& os) { write_sweep_csv(os, trace); }));
        summary << name << ",current," << csv::fmt(s.i_peaks[k]) << ',' << csv::fmt(d.memristance()) << '\n';
        result.metrics.emplace_back(name + ".final_memristance_ohms", csv::fmt(d.memristance()));
    }
    dir.write("sweep_summary.csv", summary.str());
    dir.write_manifest(config_text, cfg.seed);
    result.files = dir.files();
    return result;
}

ScenarioResult run_demo_paper(std::uint64_t seed, const fs::path& out) {
    ScenarioConfig exp1 = scenario_preset("paper-exp1");
    ScenarioConfig exp2 = scenario_preset("paper-exp2");
    apply_master_seed(exp1, seed);
    apply_master_seed(exp2, seed);
    exp1.out_dir = out / "exp1";
    exp2.out_dir = out / "exp2";

    const ScenarioResult r1 = run_scenario(exp1);
    const ScenarioResult r2 = run_scenario(exp2);

    ScenarioResult result;
    result.status = worse(r1.status, r2.status);
    for (const auto* r : {&r1, &r2}) {
        if (!r->message.empty()) result.message += (result.message.empty() ? "" : "; ") + r->message;
    }

    auto pick = [](const ScenarioResult& r, std::string_view key) {
        const std::string* v = r.metric(key);
        return v ? *v : std::string("none");
    };
    Metrics& m = result.metrics;
    m.emplace_back("noise_reduction_factor", pick(r1, "noise_reduction_factor"));
    m.emplace_back("noise_reduction_factor_p2p", pick(r1, "noise_reduction_factor_p2p"));
    m.emplace_back("sine_amplitude_ratio", pick(r1, "sine_amplitude_ratio"));
    m.emplace_back("noise_reduction_factor_config2", pick(r2, "noise_reduction_factor"));
    m.emplace_back("cutoff_hz_config1", pick(r1, "cutoff_hz"));
    m.emplace_back("cutoff_hz_config2", pick(r2, "cutoff_hz"));
    const std::string c1 = pick(r1, "cutoff_hz");
    const std::string c2 = pick(r2, "cutoff_hz");
    m.emplace_back("cutoff_ratio", c1 == "none" || c2 == "none" ? "none" : csv::fmt(std::stod(c2) / std::stod(c1)));

    ArtifactDir dir(out);
    const std::string combined_config = "[exp1]\n" + to_ini(exp1) + "\n[exp2]\n" + to_ini(exp2);
    for (const auto& [sub, r] : {std::pair<fs::path, const ScenarioResult*>{"exp1", &r1}, {"exp2", &r2}}) {
        for (const auto& f : r->files) {
            std::ifstream in(out / sub / f, std::ios::binary);
            std::ostringstream text;
            text << in.rdbuf();
            dir.record(sub / f, sha256_hex(text.str()));
        }
    }
    dir.write("metrics.txt", metrics_text(m));
    dir.write_manifest(combined_config, seed);
    result.files = dir.files();
    return result;
}

} // namespace memfir

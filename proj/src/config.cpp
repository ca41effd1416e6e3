#include "memfir/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "memfir/csv.hpp"
#include "memfir/errors.hpp"
#include "memfir/rng.hpp"

namespace memfir {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view s) {
    s = trim(s);
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(x)) {
        throw ConfigError("expected a number, got '" + std::string(s) + "'");
    }
    return x;
}

template <typename Int>
Int parse_int(std::string_view s) {
    s = trim(s);
    Int x{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("expected a non-negative integer, got '" + std::string(s) + "'");
    }
    return x;
}

bool parse_bool(std::string_view s) {
    s = trim(s);
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError("expected true or false, got '" + std::string(s) + "'");
}

std::vector<double> parse_list(std::string_view s) {
    std::vector<double> out;
    s = trim(s);
    if (s.empty()) return out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(parse_double(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

std::string list_to_string(const std::vector<double>& v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ", ";
        out += csv::fmt(v[k]);
    }
    return out;
}

NoiseAmpConvention parse_convention(std::string_view s) {
    s = trim(s);
    if (s == "peak3sigma") return NoiseAmpConvention::Peak3Sigma;
    if (s == "rms") return NoiseAmpConvention::Rms;
    throw ConfigError("expected peak3sigma or rms, got '" + std::string(s) + "'");
}

using Setter = std::function<void(ScenarioConfig&, std::string_view)>;
using Section = std::map<std::string, Setter, std::less<>>;

// clang-format off
const std::map<std::string, Section, std::less<>>& grammar() {
    static const std::map<std::string, Section, std::less<>> g{
        {"scenario", {
            {"name", [](ScenarioConfig& c, std::string_view v) { c.name = std::string(trim(v)); }},
            {"seed", [](ScenarioConfig& c, std::string_view v) { c.seed = parse_int<std::uint64_t>(v); }},
            {"out", [](ScenarioConfig& c, std::string_view v) { c.out_dir = std::string(trim(v)); }},
        }},
        {"device", {
            {"preset", [](ScenarioConfig& c, std::string_view v) {
                c.device_preset = std::string(trim(v));
                c.device = device_preset(c.device_preset);
            }},
            {"r_on", [](ScenarioConfig& c, std::string_view v) { c.device.r_on = parse_double(v); }},
            {"r_off", [](ScenarioConfig& c, std::string_view v) { c.device.r_off = parse_double(v); }},
            {"v_char", [](ScenarioConfig& c, std::string_view v) { c.device.v_char = parse_double(v); }},
            {"rate_reset", [](ScenarioConfig& c, std::string_view v) { c.device.rate_reset = parse_double(v); }},
            {"rate_set", [](ScenarioConfig& c, std::string_view v) { c.device.rate_set = parse_double(v); }},
            {"v_threshold", [](ScenarioConfig& c, std::string_view v) { c.device.v_threshold = parse_double(v); }},
            {"nl_coeff", [](ScenarioConfig& c, std::string_view v) { c.device.nl_coeff = parse_double(v); }},
            {"v_read_max", [](ScenarioConfig& c, std::string_view v) { c.device.v_read_max = parse_double(v); }},
        }},
        {"variation", {
            {"sigma_d2d", [](ScenarioConfig& c, std::string_view v) { c.variation.sigma_d2d = parse_double(v); }},
            {"sigma_c2c", [](ScenarioConfig& c, std::string_view v) { c.variation.sigma_c2c = parse_double(v); }},
        }},
        {"tune", {
            {"tolerance", [](ScenarioConfig& c, std::string_view v) { c.tune.tolerance = parse_double(v); }},
            {"v_read", [](ScenarioConfig& c, std::string_view v) { c.tune.v_read = parse_double(v); }},
            {"v_start", [](ScenarioConfig& c, std::string_view v) { c.tune.v_start = parse_double(v); }},
            {"v_step", [](ScenarioConfig& c, std::string_view v) { c.tune.v_step = parse_double(v); }},
            {"v_max", [](ScenarioConfig& c, std::string_view v) { c.tune.v_max = parse_double(v); }},
            {"pulse_duration", [](ScenarioConfig& c, std::string_view v) { c.tune.pulse_duration = parse_double(v); }},
            {"max_pulses", [](ScenarioConfig& c, std::string_view v) { c.tune.max_pulses = parse_int<std::size_t>(v); }},
            {"targets", [](ScenarioConfig& c, std::string_view v) { c.targets = parse_list(v); }},
        }},
        {"filter", {
            {"n_taps", [](ScenarioConfig& c, std::string_view v) { c.filter.n_taps = parse_int<std::size_t>(v); }},
            {"k_d", [](ScenarioConfig& c, std::string_view v) { c.filter.k_d = parse_int<int>(v); }},
            {"f_s", [](ScenarioConfig& c, std::string_view v) { c.filter.f_s = parse_double(v); }},
            {"r_f", [](ScenarioConfig& c, std::string_view v) { c.filter.r_f = parse_double(v); }},
            {"v_tap_max", [](ScenarioConfig& c, std::string_view v) { c.filter.v_tap_max = parse_double(v); }},
            {"adc_fullscale", [](ScenarioConfig& c, std::string_view v) { c.filter.adc_fullscale = parse_double(v); }},
            {"sign_compensated", [](ScenarioConfig& c, std::string_view v) { c.filter.sign_compensated = parse_bool(v); }},
        }},
        {"stimulus", {
            {"sine_amp", [](ScenarioConfig& c, std::string_view v) { c.stimulus.sine_amp = parse_double(v); }},
            {"sine_freq", [](ScenarioConfig& c, std::string_view v) { c.stimulus.sine_freq = parse_double(v); }},
            {"noise_amp", [](ScenarioConfig& c, std::string_view v) { c.stimulus.noise_amp = parse_double(v); }},
            {"noise_bw", [](ScenarioConfig& c, std::string_view v) { c.stimulus.noise_bw = parse_double(v); }},
            {"duration", [](ScenarioConfig& c, std::string_view v) { c.stimulus.duration = parse_double(v); }},
            {"noise_amp_convention", [](ScenarioConfig& c, std::string_view v) { c.stimulus.convention = parse_convention(v); }},
        }},
        {"analysis", {
            {"grid_points", [](ScenarioConfig& c, std::string_view v) { c.analysis.grid_points = parse_int<std::size_t>(v); }},
            {"probe_freqs", [](ScenarioConfig& c, std::string_view v) { c.analysis.probe_freqs = parse_list(v); }},
            {"probe_amp", [](ScenarioConfig& c, std::string_view v) { c.analysis.probe_amp = parse_double(v); }},
            {"probe_periods", [](ScenarioConfig& c, std::string_view v) { c.analysis.probe_periods = parse_double(v); }},
            {"bank_v_ref", [](ScenarioConfig& c, std::string_view v) { c.analysis.bank_v_ref = parse_double(v); }},
        }},
        {"sweep", {
            {"v_peaks", [](ScenarioConfig& c, std::string_view v) { c.sweep.v_peaks = parse_list(v); }},
            {"i_peaks", [](ScenarioConfig& c, std::string_view v) { c.sweep.i_peaks = parse_list(v); }},
            {"n_steps", [](ScenarioConfig& c, std::string_view v) { c.sweep.n_steps = parse_int<std::size_t>(v); }},
            {"step_duration", [](ScenarioConfig& c, std::string_view v) { c.sweep.step_duration = parse_double(v); }},
            {"compliance", [](ScenarioConfig& c, std::string_view v) { c.sweep.compliance = parse_double(v); }},
        }},
    };
    return g;
}
// clang-format on

ScenarioConfig base_scenario() {
    ScenarioConfig c;
    c.name = "paper-exp1";
    c.device = default_device_params();
    c.variation.sigma_d2d = 0.05;
    c.variation.sigma_c2c = 0.1;
    c.targets.assign(6, 2000.0);
    c.out_dir = "out/paper-exp1";
    apply_master_seed(c, c.seed);
    return c;
}

void need(bool ok, const std::string& field, const std::string& rule) {
    if (!ok) throw ConfigError("invalid " + field + ": " + rule);
}

// Re-throws a component-level ParameterError as a ConfigError naming the section.
template <typename F>
void rethrow_as_config(const char* section, F&& f) {
    try {
        f();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("invalid [") + section + "]: " + e.what());
    }
}

} // namespace

void apply_master_seed(ScenarioConfig& cfg, std::uint64_t seed) {
    cfg.seed = seed;
    cfg.variation.seed = split_seed(seed, streams::kDeviceSpawn);
    cfg.stimulus.seed = split_seed(seed, streams::kStimulus);
}

DeviceParams device_preset(std::string_view name) {
    if (name == "tio2-default") return default_device_params();
    throw ConfigError("unknown device preset '" + std::string(name) + "'");
}

std::vector<std::string> scenario_preset_names() { return {"paper-exp1", "paper-exp2", "paper-fig1"}; }

ScenarioConfig scenario_preset(std::string_view name) {
    ScenarioConfig c = base_scenario();
    if (name == "paper-exp1") return c;
    if (name == "paper-exp2") {
        c.name = "paper-exp2";
        c.targets = {2000.0, 2000.0, 4000.0, 120000.0, 120000.0, 120000.0};
        c.out_dir = "out/paper-exp2";
        return c;
    }
    if (name == "paper-fig1") {
        c.name = "paper-fig1";
        c.variation = VariationSpec{};
        c.out_dir = "out/paper-fig1";
        apply_master_seed(c, c.seed);
        return c;
    }
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

void validate(const ScenarioConfig& c) {
    rethrow_as_config("device", [&] { validate(c.device); });
    rethrow_as_config("variation", [&] { validate(c.variation); });
    rethrow_as_config("tune", [&] { validate(c.tune, c.device); });
    rethrow_as_config("filter", [&] { validate(c.filter, c.device.v_threshold); });
    need(c.filter.v_tap_max <= c.device.v_read_max, "filter.v_tap_max", "must not exceed device.v_read_max");
    rethrow_as_config("stimulus", [&] { validate(c.stimulus); });
    need(c.stimulus.f_s == c.filter.f_s, "stimulus.f_s", "must equal filter.f_s");
    need(c.targets.size() == c.filter.n_taps, "tune.targets",
         "expected " + std::to_string(c.filter.n_taps) + " targets (filter.n_taps), got " + std::to_string(c.targets.size()));
    for (double t : c.targets) {
        need(c.device.r_on * (1.0 + c.tune.tolerance) <= t && t <= c.device.r_off * (1.0 - c.tune.tolerance),
             "tune.targets", "target " + csv::fmt(t) + " ohm outside the nominal tunable range");
    }
    need(c.analysis.grid_points >= 2, "analysis.grid_points", "must be >= 2");
    for (double f : c.analysis.probe_freqs) {
        need(f > 0.0 && f < 0.5 * c.filter.f_s, "analysis.probe_freqs", "each frequency must lie in (0, f_s/2)");
    }
    need(std::is_sorted(c.analysis.probe_freqs.begin(), c.analysis.probe_freqs.end()) &&
             std::adjacent_find(c.analysis.probe_freqs.begin(), c.analysis.probe_freqs.end()) ==
                 c.analysis.probe_freqs.end(),
         "analysis.probe_freqs", "must be strictly increasing");
    need(c.analysis.probe_amp > 0.0 && !adc_clips(c.analysis.probe_amp, c.filter), "analysis.probe_amp",
         "must be positive and inside the ADC range");
    need(c.analysis.probe_periods >= 1.0, "analysis.probe_periods", "must be >= 1");
    need(c.analysis.bank_v_ref > 0.0 && c.analysis.bank_v_ref <= c.device.v_threshold, "analysis.bank_v_ref",
         "must be in (0, device.v_threshold]");
    for (double v : c.sweep.v_peaks) need(v > 0.0, "sweep.v_peaks", "must be positive");
    for (double i : c.sweep.i_peaks) need(i < 0.0, "sweep.i_peaks", "must be negative (set polarity)");
    need(c.sweep.n_steps >= 2, "sweep.n_steps", "must be >= 2");
    need(c.sweep.step_duration > 0.0, "sweep.step_duration", "must be positive");
    need(c.sweep.compliance > 0.0, "sweep.compliance", "must be positive");
    need(!c.out_dir.empty(), "scenario.out", "must not be empty");
}

ScenarioConfig parse_config(std::string_view text, std::string_view origin) {
    ScenarioConfig cfg = base_scenario();
    const auto& g = grammar();
    const Section* section = nullptr;
    std::string section_name;
    bool any_key = false;
    std::size_t line_no = 0;

    auto fail = [&](const std::string& msg) -> ConfigError {
        return ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + msg);
    };

    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw fail("malformed section header");
            section_name = std::string(trim(line.substr(1, line.size() - 2)));
            const auto it = g.find(section_name);
            if (it == g.end()) throw fail("unknown section [" + section_name + "]");
            section = &it->second;
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw fail("expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));

        if (section_name == "scenario" && key == "preset") {
            if (any_key) throw fail("scenario.preset must precede every other key");
            try {
                cfg = scenario_preset(value);
            } catch (const ConfigError& e) {
                throw fail(e.what());
            }
            any_key = true;
            continue;
        }
        if (section == nullptr) throw fail("key '" + key + "' outside any section");
        const auto setter = section->find(key);
        if (setter == section->end()) throw fail("unknown key '" + key + "' in [" + section_name + "]");
        try {
            setter->second(cfg, value);
        } catch (const ConfigError& e) {
            throw fail(section_name + "." + key + ": " + e.what());
        }
        any_key = true;
    }

    cfg.stimulus.f_s = cfg.filter.f_s;
    apply_master_seed(cfg, cfg.seed);
    try {
        validate(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(origin) + ": " + e.what());
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

std::string to_ini(const ScenarioConfig& c) {
    using csv::fmt;
    std::ostringstream os;
    os << "[scenario]\n"
       << "name = " << c.name << '\n'
       << "seed = " << c.seed << '\n'
       << "out = " << c.out_dir.string() << '\n'
       << "\n[device]\n"
       << "preset = " << c.device_preset << '\n'
       << "r_on = " << fmt(c.device.r_on) << '\n'
       << "r_off = " << fmt(c.device.r_off) << '\n'
       << "v_char = " << fmt(c.device.v_char) << '\n'
       << "rate_reset = " << fmt(c.device.rate_reset) << '\n'
       << "rate_set = " << fmt(c.device.rate_set) << '\n'
       << "v_threshold = " << fmt(c.device.v_threshold) << '\n'
       << "nl_coeff = " << fmt(c.device.nl_coeff) << '\n'
       << "v_read_max = " << fmt(c.device.v_read_max) << '\n'
       << "\n[variation]\n"
       << "sigma_d2d = " << fmt(c.variation.sigma_d2d) << '\n'
       << "sigma_c2c = " << fmt(c.variation.sigma_c2c) << '\n'
       << "\n[tune]\n"
       << "tolerance = " << fmt(c.tune.tolerance) << '\n'
       << "v_read = " << fmt(c.tune.v_read) << '\n'
       << "v_start = " << fmt(c.tune.v_start) << '\n'
       << "v_step = " << fmt(c.tune.v_step) << '\n'
       << "v_max = " << fmt(c.tune.v_max) << '\n'
       << "pulse_duration = " << fmt(c.tune.pulse_duration) << '\n'
       << "max_pulses = " << c.tune.max_pulses << '\n'
       << "targets = " << list_to_string(c.targets) << '\n'
       << "\n[filter]\n"
       << "n_taps = " << c.filter.n_taps << '\n'
       << "k_d = " << c.filter.k_d << '\n'
       << "f_s = " << fmt(c.filter.f_s) << '\n'
       << "r_f = " << fmt(c.filter.r_f) << '\n'
       << "v_tap_max = " << fmt(c.filter.v_tap_max) << '\n'
       << "adc_fullscale = " << fmt(c.filter.adc_fullscale) << '\n'
       << "sign_compensated = " << (c.filter.sign_compensated ? "true" : "false") << '\n'
       << "\n[stimulus]\n"
       << "sine_amp = " << fmt(c.stimulus.sine_amp) << '\n'
       << "sine_freq = " << fmt(c.stimulus.sine_freq) << '\n'
       << "noise_amp = " << fmt(c.stimulus.noise_amp) << '\n'
       << "noise_bw = " << fmt(c.stimulus.noise_bw) << '\n'
       << "duration = " << fmt(c.stimulus.duration) << '\n'
       << "noise_amp_convention = "
       << (c.stimulus.convention == NoiseAmpConvention::Peak3Sigma ? "peak3sigma" : "rms") << '\n'
       << "\n[analysis]\n"
       << "grid_points = " << c.analysis.grid_points << '\n'
       << "probe_freqs = " << list_to_string(c.analysis.probe_freqs) << '\n'
       << "probe_amp = " << fmt(c.analysis.probe_amp) << '\n'
       << "probe_periods = " << fmt(c.analysis.probe_periods) << '\n'
       << "bank_v_ref = " << fmt(c.analysis.bank_v_ref) << '\n'
       << "\n[sweep]\n"
       << "v_peaks = " << list_to_string(c.sweep.v_peaks) << '\n'
       << "i_peaks = " << list_to_string(c.sweep.i_peaks) << '\n'
       << "n_steps = " << c.sweep.n_steps << '\n'
       << "step_duration = " << fmt(c.sweep.step_duration) << '\n'
       << "compliance = " << fmt(c.sweep.compliance) << '\n';
    return os.str();
}

} // namespace memfir

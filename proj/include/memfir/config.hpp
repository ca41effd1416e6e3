#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "memfir/analysis.hpp"
#include "memfir/device.hpp"
#include "memfir/filter.hpp"
#include "memfir/tuner.hpp"

namespace memfir {

struct SweepSpec {
    std::vector<double> v_peaks{0.8, 1.0, 1.2, 1.5};       // volts, reset family from s = 1
    std::vector<double> i_peaks{-10e-6, -50e-6, -200e-6, -1e-3}; // amperes, set family from s = 0
    std::size_t n_steps = 201;
    double step_duration = 0.5e-3; // seconds
    double compliance = 3.0;       // volts

    bool operator==(const SweepSpec&) const = default;
};

struct AnalysisOptions {
    std::size_t grid_points = 2049;
    std::vector<double> probe_freqs{50, 250, 500, 750, 1000, 1500, 2000, 3000, 4000, 5000, 6000, 7000};
    double probe_amp = 1.0;     // volts
    double probe_periods = 20.0;
    double bank_v_ref = 0.2;    // volts, drive level of the binary-weighted bank

    bool operator==(const AnalysisOptions&) const = default;
};

/// Everything one experiment needs. Stage seeds derive from `seed` through
/// split_seed with the indices in memfir::streams.
struct ScenarioConfig {
    std::string name = "paper-exp1";
    std::string device_preset = "tio2-default";
    DeviceParams device;
    VariationSpec variation;
    TuneConfig tune;
    std::vector<double> targets;
    FilterConfig filter;
    NoisySineSpec stimulus;
    AnalysisOptions analysis;
    SweepSpec sweep;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 2013;

    bool operator==(const ScenarioConfig&) const = default;
};

// Built-in presets: paper-exp1, paper-exp2, paper-fig1.
ScenarioConfig scenario_preset(std::string_view name);
std::vector<std::string> scenario_preset_names();

DeviceParams device_preset(std::string_view name);

// Throws ConfigError naming the offending field.
void validate(const ScenarioConfig& cfg);

// Parses the INI-style grammar documented in README.md on top of the
// paper-exp1 defaults. Unknown sections or keys are errors. Errors carry
// "<origin>:<line>: ..." prefixes.
ScenarioConfig parse_config(std::string_view text, std::string_view origin = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

// Canonical text form; parse_config(to_ini(c)) == c.
std::string to_ini(const ScenarioConfig& cfg);

// Re-derives variation and stimulus seeds from cfg.seed.
void apply_master_seed(ScenarioConfig& cfg, std::uint64_t seed);

} // namespace memfir

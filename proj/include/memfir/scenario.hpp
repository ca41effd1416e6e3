#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memfir/config.hpp"

namespace memfir {

enum class ExitStatus : int {
    Ok = 0,
    UsageError = 1,
    NonConvergence = 2,
    InvariantViolation = 3,
};

// Ordered key=value pairs; values are already formatted.
using Metrics = std::vector<std::pair<std::string, std::string>>;

struct ScenarioResult {
    ExitStatus status = ExitStatus::Ok;
    Metrics metrics;
    std::vector<std::filesystem::path> files; // relative to the output directory
    std::string message;                      // non-empty when status != Ok

    const std::string* metric(std::string_view key) const;
};

struct ProgrammedBank {
    std::vector<Device> devices;
    std::vector<TuneReport> reports;
    bool all_converged = false;
};

// Spawns n_taps devices (device k from stream k of variation.seed) and tunes
// them to cfg.targets (tuning streams split from the master seed).
ProgrammedBank program_bank(const ScenarioConfig& cfg);

// Full experiment: program -> stimulus -> filter -> metrics -> artifacts.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

// Bank programming only: tuning CSVs and summary.
ScenarioResult run_tune(const ScenarioConfig& cfg);

// Analytic and measured response curves for the programmed bank.
ScenarioResult run_freqresp(const ScenarioConfig& cfg);

// Quasi-DC sweep family: one CSV per v_peak (reset from s = 1) and per
// i_peak (set from s = 0), plus a summary of final memristances.
ScenarioResult export_sweep(const ScenarioConfig& cfg);

// paper-exp1 and paper-exp2 under out/exp1, out/exp2 plus comparison metrics.
ScenarioResult run_demo_paper(std::uint64_t seed, const std::filesystem::path& out);

std::string sha256_hex(std::string_view data);

} // namespace memfir

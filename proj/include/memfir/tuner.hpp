#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "memfir/device.hpp"

namespace memfir {

/// Write-verify schedule. Amplitude ramps by v_step while the pulse polarity
/// repeats and falls back to v_start whenever the polarity flips.
struct TuneConfig {
    double tolerance = 0.05;       // relative
    double v_read = 0.1;           // volts
    double v_start = 0.6;          // volts
    double v_step = 0.05;          // volts
    double v_max = 1.5;            // volts
    double pulse_duration = 1e-3;  // seconds
    std::size_t max_pulses = 500;

    bool operator==(const TuneConfig&) const = default;
};

void validate(const TuneConfig& cfg, const DeviceParams& device);

struct TunePulse {
    double voltage;    // signed pulse amplitude, volts
    double measured_r; // read-back after the pulse, ohms
};

struct TuneReport {
    bool converged = false;
    std::size_t pulses_used = 0;
    double final_r = 0.0;
    std::vector<TunePulse> trace;
};

// Read-verify step: v_read / I(v_read). Throws RangeError if v_read could
// disturb the state.
double measure_resistance(const Device& device, double v_read);

// Weight bits guaranteed by a relative tolerance: floor(log2(1/t)).
int precision_bits(double tolerance);

// Range check for a tuning target against the device's own bounds.
bool target_reachable(const Device& device, double target, double tolerance);

TuneReport tune(Device& device, double target, const TuneConfig& cfg, Rng& rng);

// Tunes devices[k] toward targets[k]; device k draws from stream k of seed.
// Non-convergence of one device never aborts the others.
std::vector<TuneReport> tune_bank(std::span<Device> devices, std::span<const double> targets,
                                  const TuneConfig& cfg, std::uint64_t seed);

struct YieldSummary {
    std::size_t devices = 0;
    std::size_t converged = 0;
    std::size_t max_pulses_used = 0;
    double mean_pulses = 0.0;

    double rate() const { return devices == 0 ? 0.0 : static_cast<double>(converged) / devices; }
    bool operator==(const YieldSummary&) const = default;
};

// Monte-Carlo yield: spawns n devices from nominal/variation (device k from
// sub-stream k of variation.seed) and tunes each toward target.
YieldSummary tuning_yield(const DeviceParams& nominal, const VariationSpec& variation, double target,
                          const TuneConfig& cfg, std::size_t n);

// CSV with header pulse_index,pulse_voltage_v,measured_r_ohms.
void write_tune_csv(std::ostream& os, const TuneReport& report);

namespace serial {
std::vector<TuneReport> tune_bank(std::span<Device> devices, std::span<const double> targets,
                                  const TuneConfig& cfg, std::uint64_t seed);
YieldSummary tuning_yield(const DeviceParams& nominal, const VariationSpec& variation, double target,
                          const TuneConfig& cfg, std::size_t n);
} // namespace serial

} // namespace memfir

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "memfir/rng.hpp"

namespace memfir {

/// Behavioral parameters of one Pt/TiO2-x/Pt device.
///
/// Switching follows
///   ds/dt = dir * rate * sinh((|v| - v_threshold) / v_char) * window(s)
/// for |v| > v_threshold and is identically zero otherwise. Positive voltage
/// resets (s -> 0, toward r_off) with window s; negative voltage sets
/// (s -> 1, toward r_on) with window 1 - s.
struct DeviceParams {
    double r_on = 1.0e3;      // ohms, memristance at s = 1
    double r_off = 150.0e3;   // ohms, memristance at s = 0
    double v_char = 0.15;     // volts
    double rate_reset = 10.0; // 1/s
    double rate_set = 10.0;   // 1/s
    double v_threshold = 0.5; // volts
    double nl_coeff = 0.0;    // cubic term of the static I-V
    double v_read_max = 0.3;  // volts, largest |v| accepted by read_current

    bool operator==(const DeviceParams&) const = default;
};

// Throws ParameterError if an invariant of DeviceParams does not hold.
void validate(const DeviceParams& p);

/// Nominal calibration: a 1 ms 1.5 V pulse moves s by ~98 % of its range,
/// and 0.2 V operating swings are far below threshold.
DeviceParams default_device_params();

struct VariationSpec {
    double sigma_d2d = 0.0; // log-scale spread of r_on, r_off, rates
    double sigma_c2c = 0.0; // log-scale spread of each pulse's state increment
    std::uint64_t seed = 0;

    bool operator==(const VariationSpec&) const = default;
};

void validate(const VariationSpec& v);

class Device {
  public:
    explicit Device(const DeviceParams& params, double sigma_c2c = 0.0, double state = 0.0);

    double state() const { return s_; }
    void set_state(double s);

    const DeviceParams& params() const { return params_; }
    double sigma_c2c() const { return sigma_c2c_; }

    double conductance() const;
    double memristance() const { return 1.0 / conductance(); }

    // Non-destructive read inside the declared read range.
    double read_current(double v) const;

    // Static I-V at the present state, without range checks. Sweep traces
    // record this at stress-level voltages.
    double static_current(double v) const;

    // Voltage that drives current i through the static I-V. Throws
    // ComplianceError when |v| would exceed v_compliance.
    double voltage_for_current(double i, double v_compliance) const;

    // Applies a rectangular pulse of amplitude v for duration seconds.
    void apply_pulse(double v, double duration, Rng& rng);

    bool operator==(const Device&) const = default;

  private:
    DeviceParams params_;
    double sigma_c2c_;
    double s_;
};

// Draws a device whose r_on, r_off, rate_reset and rate_set are the nominal
// values times independent lognormal factors. Starts at s = 0.
Device spawn_device(const DeviceParams& nominal, const VariationSpec& variation, Rng& rng);

struct IvPoint {
    double v; // volts
    double i; // amperes
};

// Triangular voltage sweep 0 -> v_peak -> 0, n_steps points.
std::vector<IvPoint> voltage_sweep(Device& device, double v_peak, std::size_t n_steps,
                                   double step_duration, Rng& rng);

// Triangular current sweep 0 -> i_peak -> 0. i_peak < 0 sets the device.
std::vector<IvPoint> current_sweep(Device& device, double i_peak, std::size_t n_steps,
                                   double step_duration, Rng& rng, double v_compliance = 3.0);

// CSV with header v_volts,i_amperes.
void write_sweep_csv(std::ostream& os, std::span<const IvPoint> trace);

} // namespace memfir

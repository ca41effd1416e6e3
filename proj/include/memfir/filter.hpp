#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "memfir/device.hpp"

namespace memfir {

/// ADC -> shift register -> per-tap DAC -> memristor -> inverting adder.
struct FilterConfig {
    std::size_t n_taps = 6;
    int k_d = 8;                  // ADC/DAC resolution, bits
    double f_s = 15000.0;         // hertz
    double r_f = 2200.0;          // summing amplifier feedback, ohms
    double v_tap_max = 0.2;       // per-tap DAC amplifier swing, volts
    double adc_fullscale = 1.28;  // symmetric, volts
    bool sign_compensated = true; // undo the adder's inversion

    bool operator==(const FilterConfig&) const = default;
};

// Throws ParameterError; v_tap_max must not exceed the devices' threshold.
void validate(const FilterConfig& cfg, double v_threshold);

double adc_lsb(const FilterConfig& cfg);
int code_min(const FilterConfig& cfg);
int code_max(const FilterConfig& cfg);
// Analog tap gain: v_tap_max / adc_fullscale.
double tap_gain(const FilterConfig& cfg);

// Mid-tread quantizer, round half away from zero, clipping at the code range.
int adc_quantize(double v, const FilterConfig& cfg);
bool adc_clips(double v, const FilterConfig& cfg);
double dequantize(int code, const FilterConfig& cfg);
double dac_tap_voltage(int code, const FilterConfig& cfg);

struct Signal {
    std::vector<double> samples;
    double f_s = 0.0;

    std::size_t size() const { return samples.size(); }
};

// w_i = tap_gain * r_f / M_i.
std::vector<double> weights_from_devices(std::span<const Device> taps, const FilterConfig& cfg);

class MixedSignalFilter {
  public:
    MixedSignalFilter(const FilterConfig& cfg, std::vector<Device> taps);

    // One sample through the full chain; newest code lands at index 0.
    double step(double v_in);

    // Folds step over the input. Device states are checked unchanged.
    Signal run(const Signal& input);

    // Adder output for a given register content (codes[0] newest).
    double evaluate_codes(std::span<const int> codes) const;

    // Clears the register history and saturation counter.
    void reset();

    const FilterConfig& config() const { return cfg_; }
    std::span<const Device> taps() const { return taps_; }
    std::span<const int> shift_register() const { return shift_reg_; }
    std::size_t saturation_count() const { return saturations_; }

  private:
    FilterConfig cfg_;
    std::vector<Device> taps_;
    std::vector<int> shift_reg_;
    std::size_t saturations_ = 0;
};

// ADC followed by an ideal reconstruction: each sample becomes code * lsb.
Signal quantize_dequantize(const Signal& input, const FilterConfig& cfg);

// Direct-form convolution with zero initial history.
Signal ideal_fir(std::span<const double> weights, const Signal& input);

// CSV with header index,time_s,input_v,output_v.
void write_signal_csv(std::ostream& os, const Signal& input, const Signal& output);

namespace serial {
Signal ideal_fir(std::span<const double> weights, const Signal& input);
} // namespace serial

} // namespace memfir

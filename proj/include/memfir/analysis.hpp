#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "memfir/filter.hpp"

namespace memfir {

// How a noise "amplitude" maps to its RMS value.
enum class NoiseAmpConvention {
    Peak3Sigma, // amplitude is the ~3 sigma peak envelope, RMS = amp / 3
    Rms,        // amplitude is the RMS value
};

struct NoisySineSpec {
    double sine_amp = 0.75;     // volts
    double sine_freq = 5.0;     // hertz
    double noise_amp = 0.5;     // volts, interpreted per convention
    double noise_bw = 20000.0;  // hertz
    double f_s = 15000.0;       // hertz
    double duration = 3.0;      // seconds
    std::uint64_t seed = 1;
    NoiseAmpConvention convention = NoiseAmpConvention::Peak3Sigma;

    bool operator==(const NoisySineSpec&) const = default;
};

void validate(const NoisySineSpec& spec);
double noise_rms(const NoisySineSpec& spec);

// Sine plus Gaussian noise band-limited to noise_bw. A bandwidth at or above
// Nyquist yields white samples.
Signal noisy_sine(const NoisySineSpec& spec);

struct ResponseCurve {
    std::vector<double> freqs;     // hertz, strictly increasing
    std::vector<double> magnitude; // linear gain
};

// |sum_i w_i exp(-j 2 pi f i / f_s)| at a single frequency.
double response_magnitude(std::span<const double> weights, double f, double f_s);

// response_magnitude on f is a uniform grid over [0, f_s/2].
ResponseCurve frequency_response(std::span<const double> weights, double f_s, std::size_t n_points);

// Sine probes through the full pipeline; gain = fitted output amplitude / probe_amp.
ResponseCurve measured_frequency_response(const MixedSignalFilter& filter, std::span<const double> freqs,
                                          double probe_amp, double n_periods);

struct SineFit {
    double in_phase = 0.0;   // coefficient of sin
    double quadrature = 0.0; // coefficient of cos
    double dc = 0.0;
    double amplitude() const;
};

// Least-squares fit of a*sin + b*cos (+ c) at freq over samples.
SineFit fit_sine(std::span<const double> samples, double freq, double f_s, bool with_dc);

struct NoiseReduction {
    double factor = 0.0;               // RMS(input residual) / RMS(output residual / dc_gain)
    double peak_to_peak_factor = 0.0;  // same ratio on residual peak-to-peak spans
    double sine_amplitude_ratio = 0.0; // output / input sine amplitude / dc_gain
    double input_noise_rms = 0.0;
    double output_noise_rms = 0.0;     // already divided by |dc_gain|
};

// Removes the fitted sine + DC from both signals after a warm-up trim and
// compares what remains. dc_gain normalizes the filter's own gain out.
NoiseReduction noise_reduction(const Signal& input, const Signal& output, double sine_freq, std::size_t warmup,
                               double dc_gain = 1.0);

// Lowest -3 dB (DC / sqrt 2) crossing, linearly interpolated.
double cutoff_frequency(const ResponseCurve& curve);

void write_response_csv(std::ostream& os, const ResponseCurve& curve);

namespace serial {
ResponseCurve frequency_response(std::span<const double> weights, double f_s, std::size_t n_points);
ResponseCurve measured_frequency_response(const MixedSignalFilter& filter, std::span<const double> freqs,
                                          double probe_amp, double n_periods);
} // namespace serial

} // namespace memfir

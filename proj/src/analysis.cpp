#include "memfir/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "memfir/csv.hpp"
#include "memfir/errors.hpp"
#include "memfir/rng.hpp"

namespace memfir {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kNoiseFilterTaps = 129;

// Windowed-sinc (Hamming) low-pass, cutoff as a fraction of f_s.
std::vector<double> lowpass_kernel(double cutoff) {
    std::vector<double> h(kNoiseFilterTaps);
    const double mid = 0.5 * static_cast<double>(kNoiseFilterTaps - 1);
    for (std::size_t k = 0; k < kNoiseFilterTaps; ++k) {
        const double t = static_cast<double>(k) - mid;
        const double sinc = t == 0.0 ? 2.0 * cutoff : std::sin(kTwoPi * cutoff * t) / (std::numbers::pi * t);
        const double window = 0.54 - 0.46 * std::cos(kTwoPi * static_cast<double>(k) / (kNoiseFilterTaps - 1));
        h[k] = sinc * window;
    }
    return h;
}

double rms(std::span<const double> x) {
    const double ss = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

double span_of(std::span<const double> x) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
}

double dtft_magnitude(std::span<const double> w, double f, double f_s) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double phase = kTwoPi * f * static_cast<double>(i) / f_s;
        re += w[i] * std::cos(phase);
        im -= w[i] * std::sin(phase);
    }
    return std::hypot(re, im);
}

std::vector<double> uniform_grid(double f_s, std::size_t n_points) {
    if (n_points < 2) throw ParameterError("frequency_response: need at least 2 grid points");
    if (!(f_s > 0.0)) throw ParameterError("frequency_response: f_s must be positive");
    std::vector<double> f(n_points);
    const double nyquist = 0.5 * f_s;
    for (std::size_t k = 0; k < n_points; ++k) {
        f[k] = nyquist * static_cast<double>(k) / static_cast<double>(n_points - 1);
    }
    return f;
}

void check_probe(const MixedSignalFilter& filter, std::span<const double> freqs, double probe_amp, double n_periods) {
    const auto& cfg = filter.config();
    if (!(probe_amp > 0.0)) throw ParameterError("measured_frequency_response: probe amplitude must be positive");
    if (adc_clips(probe_amp, cfg) || adc_clips(-probe_amp, cfg)) {
        throw SaturationError("measured_frequency_response: probe amplitude clips the ADC");
    }
    if (!(n_periods >= 1.0)) throw ParameterError("measured_frequency_response: need at least one period");
    for (double f : freqs) {
        if (!(f > 0.0 && f < 0.5 * cfg.f_s)) {
            throw ParameterError("measured_frequency_response: probe frequency " + std::to_string(f) +
                                 " Hz outside (0, f_s/2)");
        }
    }
    if (!std::is_sorted(freqs.begin(), freqs.end()) ||
        std::adjacent_find(freqs.begin(), freqs.end()) != freqs.end()) {
        throw ParameterError("measured_frequency_response: frequencies must be strictly increasing");
    }
}

double probe_gain(MixedSignalFilter filter, double f, double probe_amp, double n_periods) {
    const auto& cfg = filter.config();
    filter.reset();
    const std::size_t warmup = cfg.n_taps;
    const auto n = warmup + static_cast<std::size_t>(std::ceil(n_periods * cfg.f_s / f));
    std::vector<double> out;
    out.reserve(n - warmup);
    for (std::size_t k = 0; k < n; ++k) {
        const double y = filter.step(probe_amp * std::sin(kTwoPi * f * static_cast<double>(k) / cfg.f_s));
        if (k >= warmup) out.push_back(y);
    }
    // Phase reference is irrelevant to the amplitude, so fit on the trimmed
    // record with its own time origin.
    return fit_sine(out, f, cfg.f_s, true).amplitude() / probe_amp;
}

} // namespace

double response_magnitude(std::span<const double> weights, double f, double f_s) {
    return dtft_magnitude(weights, f, f_s);
}

void validate(const NoisySineSpec& spec) {
    if (!(spec.sine_amp >= 0.0 && spec.noise_amp >= 0.0)) throw ParameterError("stimulus: amplitudes must be >= 0");
    if (!(spec.f_s > 0.0)) throw ParameterError("stimulus: f_s must be positive");
    if (!(spec.sine_freq >= 0.0 && spec.sine_freq < 0.5 * spec.f_s)) {
        throw ParameterError("stimulus: sine_freq must be below Nyquist");
    }
    if (!(spec.noise_bw > 0.0)) throw ParameterError("stimulus: noise_bw must be positive");
    if (!(spec.duration > 0.0)) throw ParameterError("stimulus: duration must be positive");
}

double noise_rms(const NoisySineSpec& spec) {
    return spec.convention == NoiseAmpConvention::Peak3Sigma ? spec.noise_amp / 3.0 : spec.noise_amp;
}

Signal noisy_sine(const NoisySineSpec& spec) {
    validate(spec);
    const auto n = static_cast<std::size_t>(std::llround(spec.duration * spec.f_s));
    Signal out{std::vector<double>(n), spec.f_s};

    Rng rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sigma = noise_rms(spec);
    std::vector<double> noise(n, 0.0);
    if (sigma > 0.0) {
        if (spec.noise_bw >= 0.5 * spec.f_s) {
            for (auto& x : noise) x = sigma * gauss(rng);
        } else {
            const auto h = lowpass_kernel(spec.noise_bw / spec.f_s);
            const double power = std::inner_product(h.begin(), h.end(), h.begin(), 0.0);
            const double scale = sigma / std::sqrt(power);
            std::vector<double> white(n + h.size() - 1);
            for (auto& x : white) x = gauss(rng);
            for (std::size_t k = 0; k < n; ++k) {
                double acc = 0.0;
                for (std::size_t i = 0; i < h.size(); ++i) acc += h[i] * white[k + h.size() - 1 - i];
                noise[k] = scale * acc;
            }
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / spec.f_s;
        out.samples[k] = spec.sine_amp * std::sin(kTwoPi * spec.sine_freq * t) + noise[k];
    }
    return out;
}

ResponseCurve frequency_response(std::span<const double> weights, double f_s, std::size_t n_points) {
    if (weights.empty()) throw ParameterError("frequency_response: no weights");
    ResponseCurve curve{uniform_grid(f_s, n_points), std::vector<double>(n_points)};
    const auto n = static_cast<std::ptrdiff_t>(n_points);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) curve.magnitude[k] = dtft_magnitude(weights, curve.freqs[k], f_s);
    return curve;
}

ResponseCurve measured_frequency_response(const MixedSignalFilter& filter, std::span<const double> freqs,
                                          double probe_amp, double n_periods) {
    check_probe(filter, freqs, probe_amp, n_periods);
    ResponseCurve curve{std::vector<double>(freqs.begin(), freqs.end()), std::vector<double>(freqs.size())};
    const auto n = static_cast<std::ptrdiff_t>(freqs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < n; ++k) curve.magnitude[k] = probe_gain(filter, freqs[k], probe_amp, n_periods);
    return curve;
}

namespace serial {

ResponseCurve frequency_response(std::span<const double> weights, double f_s, std::size_t n_points) {
    if (weights.empty()) throw ParameterError("frequency_response: no weights");
    ResponseCurve curve{uniform_grid(f_s, n_points), std::vector<double>(n_points)};
    for (std::size_t k = 0; k < n_points; ++k) curve.magnitude[k] = dtft_magnitude(weights, curve.freqs[k], f_s);
    return curve;
}

ResponseCurve measured_frequency_response(const MixedSignalFilter& filter, std::span<const double> freqs,
                                          double probe_amp, double n_periods) {
    check_probe(filter, freqs, probe_amp, n_periods);
    ResponseCurve curve{std::vector<double>(freqs.begin(), freqs.end()), std::vector<double>(freqs.size())};
    for (std::size_t k = 0; k < freqs.size(); ++k) curve.magnitude[k] = probe_gain(filter, freqs[k], probe_amp, n_periods);
    return curve;
}

} // namespace serial

double SineFit::amplitude() const { return std::hypot(in_phase, quadrature); }

SineFit fit_sine(std::span<const double> samples, double freq, double f_s, bool with_dc) {
    const auto cols = with_dc ? 3 : 2;
    if (samples.size() < static_cast<std::size_t>(cols)) throw MetricError("fit_sine: too few samples");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(samples.size()), cols);
    Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        const double phase = kTwoPi * freq * static_cast<double>(k) / f_s;
        a(r, 0) = std::sin(phase);
        a(r, 1) = std::cos(phase);
        if (with_dc) a(r, 2) = 1.0;
        y(r) = samples[k];
    }
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(y);
    return SineFit{c(0), c(1), with_dc ? c(2) : 0.0};
}

NoiseReduction noise_reduction(const Signal& input, const Signal& output, double sine_freq, std::size_t warmup,
                               double dc_gain) {
    if (input.size() != output.size() || input.f_s != output.f_s) {
        throw ParameterError("noise_reduction: input and output differ in length or rate");
    }
    if (!(dc_gain != 0.0 && std::isfinite(dc_gain))) throw ParameterError("noise_reduction: dc_gain must be non-zero");
    if (!(sine_freq > 0.0)) throw ParameterError("noise_reduction: sine_freq must be positive");
    if (input.size() <= warmup) throw ParameterError("noise_reduction: signal shorter than warm-up");
    const std::size_t n = input.size() - warmup;
    if (static_cast<double>(n) * sine_freq / input.f_s < 10.0) {
        throw ParameterError("noise_reduction: record must span at least 10 sine periods");
    }

    auto residual = [&](const Signal& s, SineFit& fit) {
        std::span<const double> x(s.samples.data() + warmup, n);
        fit = fit_sine(x, sine_freq, s.f_s, true);
        std::vector<double> r(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double phase = kTwoPi * sine_freq * static_cast<double>(k) / s.f_s;
            r[k] = x[k] - (fit.in_phase * std::sin(phase) + fit.quadrature * std::cos(phase) + fit.dc);
        }
        return r;
    };

    SineFit fit_in;
    SineFit fit_out;
    const auto r_in = residual(input, fit_in);
    const auto r_out = residual(output, fit_out);
    const double g = std::abs(dc_gain);

    NoiseReduction m;
    m.input_noise_rms = rms(r_in);
    m.output_noise_rms = rms(r_out) / g;
    // Residuals at rounding level carry no noise to compare.
    const double floor_in = 1e-12 * rms(std::span<const double>(input.samples.data() + warmup, n));
    const double floor_out = 1e-12 * rms(std::span<const double>(output.samples.data() + warmup, n));
    if (!(rms(r_in) > floor_in && rms(r_out) > floor_out)) {
        throw MetricError("noise_reduction: residual is zero to rounding");
    }
    m.factor = m.input_noise_rms / m.output_noise_rms;
    m.peak_to_peak_factor = span_of(r_in) / (span_of(r_out) / g);
    const double a_in = fit_in.amplitude();
    if (!(a_in > 0.0)) throw MetricError("noise_reduction: input carries no sine component");
    m.sine_amplitude_ratio = fit_out.amplitude() / a_in / g;
    return m;
}

double cutoff_frequency(const ResponseCurve& curve) {
    if (curve.freqs.size() != curve.magnitude.size() || curve.freqs.size() < 2) {
        throw ParameterError("cutoff_frequency: malformed curve");
    }
    if (curve.freqs.front() != 0.0 || !(curve.magnitude.front() > 0.0)) {
        throw MetricError("cutoff_frequency: curve needs a positive DC value at f = 0");
    }
    const double level = curve.magnitude.front() / std::numbers::sqrt2;
    for (std::size_t k = 1; k < curve.freqs.size(); ++k) {
        if (curve.magnitude[k] < level) {
            const double m0 = curve.magnitude[k - 1];
            const double m1 = curve.magnitude[k];
            const double t = (m0 - level) / (m0 - m1);
            return curve.freqs[k - 1] + t * (curve.freqs[k] - curve.freqs[k - 1]);
        }
    }
    throw MetricError("cutoff_frequency: no -3 dB crossing up to Nyquist");
}

void write_response_csv(std::ostream& os, const ResponseCurve& curve) {
    os << "freq_hz,magnitude\n";
    for (std::size_t k = 0; k < curve.freqs.size(); ++k) {
        os << csv::fmt(curve.freqs[k]) << ',' << csv::fmt(curve.magnitude[k]) << '\n';
    }
}

} // namespace memfir

#include "memfir/filter.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "memfir/csv.hpp"
#include "memfir/errors.hpp"

namespace memfir {

void validate(const FilterConfig& cfg, double v_threshold) {
    if (cfg.n_taps < 1) throw ParameterError("filter: n_taps must be >= 1");
    if (cfg.k_d < 1 || cfg.k_d > 30) throw ParameterError("filter: k_d must be in [1, 30]");
    if (!(cfg.f_s > 0.0)) throw ParameterError("filter: f_s must be positive");
    if (!(cfg.r_f > 0.0)) throw ParameterError("filter: r_f must be positive");
    if (!(cfg.adc_fullscale > 0.0)) throw ParameterError("filter: adc_fullscale must be positive");
    if (!(cfg.v_tap_max > 0.0 && cfg.v_tap_max <= v_threshold)) {
        throw ParameterError("filter: v_tap_max must be in (0, v_threshold]");
    }
}

double adc_lsb(const FilterConfig& cfg) { return 2.0 * cfg.adc_fullscale / std::ldexp(1.0, cfg.k_d); }
int code_min(const FilterConfig& cfg) { return -(1 << (cfg.k_d - 1)); }
int code_max(const FilterConfig& cfg) { return (1 << (cfg.k_d - 1)) - 1; }
double tap_gain(const FilterConfig& cfg) { return cfg.v_tap_max / cfg.adc_fullscale; }

namespace {
double raw_code(double v, const FilterConfig& cfg) { return std::round(v / adc_lsb(cfg)); }
} // namespace

int adc_quantize(double v, const FilterConfig& cfg) {
    const double c = std::clamp(raw_code(v, cfg), static_cast<double>(code_min(cfg)),
                                static_cast<double>(code_max(cfg)));
    return static_cast<int>(c);
}

bool adc_clips(double v, const FilterConfig& cfg) {
    const double c = raw_code(v, cfg);
    return c < code_min(cfg) || c > code_max(cfg);
}

double dequantize(int code, const FilterConfig& cfg) { return code * adc_lsb(cfg); }

double dac_tap_voltage(int code, const FilterConfig& cfg) {
    return code * cfg.v_tap_max / std::ldexp(1.0, cfg.k_d - 1);
}

std::vector<double> weights_from_devices(std::span<const Device> taps, const FilterConfig& cfg) {
    if (taps.empty()) throw ParameterError("weights_from_devices: no taps");
    std::vector<double> w;
    w.reserve(taps.size());
    for (const auto& d : taps) w.push_back(tap_gain(cfg) * cfg.r_f / d.memristance());
    return w;
}

MixedSignalFilter::MixedSignalFilter(const FilterConfig& cfg, std::vector<Device> taps)
    : cfg_(cfg), taps_(std::move(taps)), shift_reg_(cfg.n_taps, 0) {
    if (taps_.size() != cfg_.n_taps) {
        throw ParameterError("filter: " + std::to_string(taps_.size()) + " devices for " +
                             std::to_string(cfg_.n_taps) + " taps");
    }
    for (const auto& d : taps_) {
        validate(cfg_, d.params().v_threshold);
        if (cfg_.v_tap_max > d.params().v_read_max) throw ParameterError("filter: v_tap_max exceeds device read range");
    }
}

double MixedSignalFilter::evaluate_codes(std::span<const int> codes) const {
    if (codes.size() != taps_.size()) throw ParameterError("evaluate_codes: code count differs from tap count");
    double current = 0.0; // into the virtual-ground node
    for (std::size_t i = 0; i < taps_.size(); ++i) {
        const double v = dac_tap_voltage(codes[i], cfg_);
        if (std::abs(v) > cfg_.v_tap_max) throw InvariantViolation("filter: tap drive exceeds v_tap_max");
        current += taps_[i].read_current(v);
    }
    const double y_raw = -cfg_.r_f * current;
    return cfg_.sign_compensated ? -y_raw : y_raw;
}

double MixedSignalFilter::step(double v_in) {
    if (adc_clips(v_in, cfg_)) ++saturations_;
    std::shift_right(shift_reg_.begin(), shift_reg_.end(), 1);
    shift_reg_[0] = adc_quantize(v_in, cfg_);
    return evaluate_codes(shift_reg_);
}

Signal MixedSignalFilter::run(const Signal& input) {
    if (input.f_s != cfg_.f_s) {
        throw ConfigError("filter: input sampled at " + std::to_string(input.f_s) + " Hz, filter runs at " +
                          std::to_string(cfg_.f_s) + " Hz");
    }
    const std::vector<Device> before = taps_;
    Signal out{std::vector<double>(input.size()), input.f_s};
    for (std::size_t n = 0; n < input.size(); ++n) out.samples[n] = step(input.samples[n]);
    if (before != taps_) throw InvariantViolation("filter: device state changed during filtering");
    return out;
}

void MixedSignalFilter::reset() {
    std::fill(shift_reg_.begin(), shift_reg_.end(), 0);
    saturations_ = 0;
}

Signal quantize_dequantize(const Signal& input, const FilterConfig& cfg) {
    Signal out{std::vector<double>(input.size()), input.f_s};
    std::transform(input.samples.begin(), input.samples.end(), out.samples.begin(),
                   [&](double v) { return dequantize(adc_quantize(v, cfg), cfg); });
    return out;
}

namespace {
double convolve_at(std::span<const double> w, const std::vector<double>& x, std::size_t n) {
    double acc = 0.0;
    const std::size_t taps = std::min(w.size(), n + 1);
    for (std::size_t i = 0; i < taps; ++i) acc += w[i] * x[n - i];
    return acc;
}
} // namespace

Signal ideal_fir(std::span<const double> weights, const Signal& input) {
    if (weights.empty()) throw ParameterError("ideal_fir: no weights");
    Signal out{std::vector<double>(input.size()), input.f_s};
    const auto n = static_cast<std::ptrdiff_t>(input.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        out.samples[k] = convolve_at(weights, input.samples, static_cast<std::size_t>(k));
    }
    return out;
}

namespace serial {
Signal ideal_fir(std::span<const double> weights, const Signal& input) {
    if (weights.empty()) throw ParameterError("ideal_fir: no weights");
    Signal out{std::vector<double>(input.size()), input.f_s};
    for (std::size_t k = 0; k < input.size(); ++k) out.samples[k] = convolve_at(weights, input.samples, k);
    return out;
}
} // namespace serial

void write_signal_csv(std::ostream& os, const Signal& input, const Signal& output) {
    if (input.size() != output.size()) throw ParameterError("write_signal_csv: length mismatch");
    os << "index,time_s,input_v,output_v\n";
    for (std::size_t n = 0; n < input.size(); ++n) {
        os << n << ',' << csv::fmt(static_cast<double>(n) / input.f_s, 9) << ',' << csv::fmt(input.samples[n]) << ','
           << csv::fmt(output.samples[n]) << '\n';
    }
}

} // namespace memfir

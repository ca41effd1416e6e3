#include "memfir/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "memfir/csv.hpp"
#include "memfir/errors.hpp"

namespace memfir {

void validate(const TuneConfig& cfg, const DeviceParams& device) {
    if (!(cfg.tolerance > 0.0 && cfg.tolerance < 1.0)) throw ParameterError("tune: tolerance must be in (0, 1)");
    if (!(cfg.v_read > 0.0 && cfg.v_read <= device.v_threshold)) {
        throw ParameterError("tune: v_read must be in (0, v_threshold]");
    }
    if (!(device.v_threshold < cfg.v_start && cfg.v_start <= cfg.v_max)) {
        throw ParameterError("tune: need v_threshold < v_start <= v_max");
    }
    if (!(cfg.v_step > 0.0)) throw ParameterError("tune: v_step must be positive");
    if (!(cfg.pulse_duration > 0.0)) throw ParameterError("tune: pulse_duration must be positive");
}

double measure_resistance(const Device& device, double v_read) {
    if (!(v_read > 0.0)) throw ParameterError("measure_resistance: v_read must be positive");
    if (v_read > device.params().v_threshold) {
        throw RangeError("measure_resistance: v_read above switching threshold would disturb the state");
    }
    return v_read / device.read_current(v_read);
}

int precision_bits(double tolerance) {
    if (!(tolerance > 0.0 && tolerance < 1.0)) throw ParameterError("precision_bits: tolerance must be in (0, 1)");
    return static_cast<int>(std::floor(std::log2(1.0 / tolerance)));
}

bool target_reachable(const Device& device, double target, double tolerance) {
    const auto& p = device.params();
    return p.r_on * (1.0 + tolerance) <= target && target <= p.r_off * (1.0 - tolerance);
}

TuneReport tune(Device& device, double target, const TuneConfig& cfg, Rng& rng) {
    validate(cfg, device.params());
    if (!target_reachable(device, target, cfg.tolerance)) {
        throw RangeError("tune: target " + std::to_string(target) + " ohm outside achievable range [" +
                         std::to_string(device.params().r_on) + ", " + std::to_string(device.params().r_off) +
                         "] ohm with tolerance margin");
    }

    TuneReport report;
    double r = measure_resistance(device, cfg.v_read);
    int last_polarity = 0;
    double amplitude = 0.0;
    while (true) {
        if (std::abs(r - target) <= cfg.tolerance * target) {
            report.converged = true;
            break;
        }
        if (report.trace.size() >= cfg.max_pulses) break;

        // Too conductive -> reset (positive); too resistive -> set (negative).
        const int polarity = r < target ? +1 : -1;
        amplitude = polarity == last_polarity ? std::min(amplitude + cfg.v_step, cfg.v_max) : cfg.v_start;
        last_polarity = polarity;

        const double v = polarity * amplitude;
        device.apply_pulse(v, cfg.pulse_duration, rng);
        r = measure_resistance(device, cfg.v_read);
        report.trace.push_back({v, r});
    }
    report.pulses_used = report.trace.size();
    report.final_r = r;
    return report;
}

namespace {

void check_bank(std::span<Device> devices, std::span<const double> targets, const TuneConfig& cfg) {
    if (devices.size() != targets.size()) {
        throw ParameterError("tune_bank: " + std::to_string(devices.size()) + " devices but " +
                             std::to_string(targets.size()) + " targets");
    }
    for (std::size_t k = 0; k < devices.size(); ++k) {
        validate(cfg, devices[k].params());
        if (!target_reachable(devices[k], targets[k], cfg.tolerance)) {
            throw RangeError("tune_bank: target " + std::to_string(targets[k]) + " ohm unreachable for device " +
                             std::to_string(k));
        }
    }
}

TuneReport tune_one(Device& device, double target, const TuneConfig& cfg, std::uint64_t seed, std::size_t k) {
    Rng rng = make_stream(seed, k);
    return tune(device, target, cfg, rng);
}

TuneReport yield_one(const DeviceParams& nominal, const VariationSpec& variation, double target,
                     const TuneConfig& cfg, std::size_t k) {
    Rng rng = make_stream(variation.seed, k);
    Device d = spawn_device(nominal, variation, rng);
    if (!target_reachable(d, target, cfg.tolerance)) return TuneReport{};
    return tune(d, target, cfg, rng);
}

YieldSummary summarize(const std::vector<TuneReport>& reports) {
    YieldSummary y;
    y.devices = reports.size();
    double total = 0.0;
    for (const auto& r : reports) {
        if (r.converged) ++y.converged;
        y.max_pulses_used = std::max(y.max_pulses_used, r.pulses_used);
        total += static_cast<double>(r.pulses_used);
    }
    y.mean_pulses = reports.empty() ? 0.0 : total / static_cast<double>(reports.size());
    return y;
}

} // namespace

std::vector<TuneReport> tune_bank(std::span<Device> devices, std::span<const double> targets,
                                  const TuneConfig& cfg, std::uint64_t seed) {
    check_bank(devices, targets, cfg);
    std::vector<TuneReport> reports(devices.size());
    const auto n = static_cast<std::ptrdiff_t>(devices.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        reports[i] = tune_one(devices[i], targets[i], cfg, seed, i);
    }
    return reports;
}

YieldSummary tuning_yield(const DeviceParams& nominal, const VariationSpec& variation, double target,
                          const TuneConfig& cfg, std::size_t n) {
    validate(nominal);
    validate(cfg, nominal);
    std::vector<TuneReport> reports(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        const auto i = static_cast<std::size_t>(k);
        reports[i] = yield_one(nominal, variation, target, cfg, i);
    }
    return summarize(reports);
}

namespace serial {

std::vector<TuneReport> tune_bank(std::span<Device> devices, std::span<const double> targets,
                                  const TuneConfig& cfg, std::uint64_t seed) {
    check_bank(devices, targets, cfg);
    std::vector<TuneReport> reports;
    reports.reserve(devices.size());
    for (std::size_t k = 0; k < devices.size(); ++k) {
        reports.push_back(tune_one(devices[k], targets[k], cfg, seed, k));
    }
    return reports;
}

YieldSummary tuning_yield(const DeviceParams& nominal, const VariationSpec& variation, double target,
                          const TuneConfig& cfg, std::size_t n) {
    validate(nominal);
    validate(cfg, nominal);
    std::vector<TuneReport> reports;
    reports.reserve(n);
    for (std::size_t k = 0; k < n; ++k) reports.push_back(yield_one(nominal, variation, target, cfg, k));
    return summarize(reports);
}

} // namespace serial

void write_tune_csv(std::ostream& os, const TuneReport& report) {
    os << "pulse_index,pulse_voltage_v,measured_r_ohms\n";
    for (std::size_t k = 0; k < report.trace.size(); ++k) {
        os << k << ',' << csv::fmt(report.trace[k].voltage) << ',' << csv::fmt(report.trace[k].measured_r) << '\n';
    }
}

} // namespace memfir

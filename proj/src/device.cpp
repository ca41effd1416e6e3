#include "memfir/device.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "memfir/csv.hpp"
#include "memfir/errors.hpp"

namespace memfir {

namespace {

constexpr std::size_t kMinSubsteps = 100;
constexpr double kMaxSubstep = 1.0e-5; // seconds

void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
}

double lognormal_factor(double sigma, Rng& rng) {
    if (sigma == 0.0) return 1.0;
    std::normal_distribution<double> z(0.0, 1.0);
    return std::exp(sigma * z(rng));
}

// Fraction of the sweep peak at point j of an n-point triangle.
double triangle(std::size_t j, std::size_t n) {
    const double x = 2.0 * static_cast<double>(j) / static_cast<double>(n - 1);
    return x <= 1.0 ? x : 2.0 - x;
}

} // namespace

void validate(const DeviceParams& p) {
    require(p.r_on > 0.0 && p.r_on < p.r_off, "device: need 0 < r_on < r_off");
    require(p.v_char > 0.0, "device: v_char must be positive");
    require(p.v_threshold > 0.0, "device: v_threshold must be positive");
    require(p.rate_reset > 0.0 && p.rate_set > 0.0, "device: switching rates must be positive");
    require(p.v_read_max > 0.0, "device: v_read_max must be positive");
    require(std::isfinite(p.nl_coeff) && p.nl_coeff >= 0.0, "device: nl_coeff must be finite and >= 0");
}

DeviceParams default_device_params() { return DeviceParams{}; }

void validate(const VariationSpec& v) {
    require(v.sigma_d2d >= 0.0 && v.sigma_c2c >= 0.0, "variation: sigmas must be >= 0");
}

Device::Device(const DeviceParams& params, double sigma_c2c, double state)
    : params_(params), sigma_c2c_(sigma_c2c), s_(0.0) {
    validate(params_);
    require(sigma_c2c_ >= 0.0, "device: sigma_c2c must be >= 0");
    set_state(state);
}

void Device::set_state(double s) {
    require(s >= 0.0 && s <= 1.0, "device: state must lie in [0, 1]");
    s_ = s;
}

double Device::conductance() const {
    const double g_on = 1.0 / params_.r_on;
    const double g_off = 1.0 / params_.r_off;
    return g_off + s_ * (g_on - g_off);
}

double Device::static_current(double v) const {
    return v * conductance() * (1.0 + params_.nl_coeff * v * v);
}

double Device::read_current(double v) const {
    if (!(std::abs(v) <= params_.v_read_max)) {
        throw RangeError("read_current: |v| = " + std::to_string(std::abs(v)) +
                         " V exceeds read range " + std::to_string(params_.v_read_max) + " V");
    }
    return static_current(v);
}

double Device::voltage_for_current(double i, double v_compliance) const {
    if (i == 0.0) return 0.0;
    const double mag = std::abs(i);
    double v = 0.0;
    if (params_.nl_coeff == 0.0) {
        v = mag / conductance();
    } else {
        if (static_current(v_compliance) < mag) {
            throw ComplianceError("current sweep: compliance voltage reached");
        }
        auto f = [&](double x) { return static_current(x) - mag; };
        boost::math::tools::eps_tolerance<double> tol(50);
        std::uintmax_t iters = 200;
        const auto [lo, hi] = boost::math::tools::toms748_solve(f, 0.0, v_compliance, tol, iters);
        v = 0.5 * (lo + hi);
    }
    if (v > v_compliance) {
        throw ComplianceError("current sweep: required " + std::to_string(v) +
                              " V exceeds compliance " + std::to_string(v_compliance) + " V");
    }
    return i < 0.0 ? -v : v;
}

void Device::apply_pulse(double v, double duration, Rng& rng) {
    require(duration > 0.0, "apply_pulse: duration must be positive");
    const double overdrive = std::abs(v) - params_.v_threshold;
    if (!(overdrive > 0.0)) return; // retention: sub-threshold bias never moves the state

    const bool reset = v > 0.0;
    const double rate = reset ? params_.rate_reset : params_.rate_set;
    const double speed = rate * std::sinh(overdrive / params_.v_char);

    const auto n = std::max(kMinSubsteps, static_cast<std::size_t>(std::ceil(duration / kMaxSubstep)));
    const double h = duration / static_cast<double>(n);
    // The window is linear in s, so each fixed step advances the distance to
    // the attracting bound by the exact exponential factor.
    const double decay = std::exp(-speed * h);

    double s = s_;
    for (std::size_t k = 0; k < n; ++k) {
        s = reset ? s * decay : 1.0 - (1.0 - s) * decay;
    }
    const double ds = (s - s_) * lognormal_factor(sigma_c2c_, rng);
    s_ = std::clamp(s_ + ds, 0.0, 1.0);
}

Device spawn_device(const DeviceParams& nominal, const VariationSpec& variation, Rng& rng) {
    validate(nominal);
    validate(variation);
    DeviceParams p = nominal;
    if (variation.sigma_d2d > 0.0) {
        do {
            p.r_on = nominal.r_on * lognormal_factor(variation.sigma_d2d, rng);
            p.r_off = nominal.r_off * lognormal_factor(variation.sigma_d2d, rng);
        } while (!(p.r_on < p.r_off));
        p.rate_reset = nominal.rate_reset * lognormal_factor(variation.sigma_d2d, rng);
        p.rate_set = nominal.rate_set * lognormal_factor(variation.sigma_d2d, rng);
    }
    return Device(p, variation.sigma_c2c, 0.0);
}

std::vector<IvPoint> voltage_sweep(Device& device, double v_peak, std::size_t n_steps,
                                   double step_duration, Rng& rng) {
    require(v_peak > 0.0, "voltage_sweep: v_peak must be positive");
    require(n_steps >= 2, "voltage_sweep: need at least 2 points");
    require(step_duration > 0.0, "voltage_sweep: step_duration must be positive");
    std::vector<IvPoint> trace;
    trace.reserve(n_steps);
    for (std::size_t j = 0; j < n_steps; ++j) {
        const double v = v_peak * triangle(j, n_steps);
        trace.push_back({v, device.static_current(v)});
        if (v != 0.0) device.apply_pulse(v, step_duration, rng);
    }
    return trace;
}

std::vector<IvPoint> current_sweep(Device& device, double i_peak, std::size_t n_steps,
                                   double step_duration, Rng& rng, double v_compliance) {
    require(i_peak != 0.0, "current_sweep: i_peak must be non-zero");
    require(n_steps >= 2, "current_sweep: need at least 2 points");
    require(step_duration > 0.0, "current_sweep: step_duration must be positive");
    require(v_compliance > 0.0, "current_sweep: compliance must be positive");
    std::vector<IvPoint> trace;
    trace.reserve(n_steps);
    for (std::size_t j = 0; j < n_steps; ++j) {
        double i = i_peak * triangle(j, n_steps);
        if (i == 0.0) i = 0.0; // no -0 at the ends of a negative sweep
        const double v = device.voltage_for_current(i, v_compliance);
        trace.push_back({v, i});
        if (v != 0.0) device.apply_pulse(v, step_duration, rng);
    }
    return trace;
}

void write_sweep_csv(std::ostream& os, std::span<const IvPoint> trace) {
    os << "v_volts,i_amperes\n";
    for (const auto& p : trace) {
        os << csv::fmt(p.v) << ',' << csv::fmt(p.i) << '\n';
    }
}

} // namespace memfir

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "memfir/errors.hpp"
#include "memfir/filter.hpp"

using namespace memfir;

namespace {

Device at_memristance(const DeviceParams& p, double m) {
    const double g_on = 1.0 / p.r_on;
    const double g_off = 1.0 / p.r_off;
    return Device(p, 0.0, (1.0 / m - g_off) / (g_on - g_off));
}

// Device whose memristance is exactly r (r used as r_on at s = 1).
Device exact_device(double r) {
    auto p = default_device_params();
    p.r_on = r;
    p.r_off = std::max(150000.0, 2.0 * r);
    return Device(p, 0.0, 1.0);
}

// Textbook direct form, written independently of ideal_fir: explicit delay line.
std::vector<double> direct_form(const std::vector<double>& w, const std::vector<double>& x) {
    std::vector<double> delay(w.size(), 0.0);
    std::vector<double> y;
    for (double sample : x) {
        for (std::size_t i = delay.size() - 1; i > 0; --i) delay[i] = delay[i - 1];
        delay[0] = sample;
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * delay[i];
        y.push_back(acc);
    }
    return y;
}

double sum_abs(const std::vector<double>& w) {
    double s = 0.0;
    for (double x : w) s += std::abs(x);
    return s;
}

} // namespace

TEST_CASE("adc_quantize: mid-tread, clipping, half away from zero") {
    const FilterConfig cfg;
    CHECK(adc_lsb(cfg) == doctest::Approx(0.01));
    CHECK(adc_quantize(0.0, cfg) == 0);
    CHECK(adc_quantize(1.28, cfg) == 127);
    CHECK(adc_quantize(5.0, cfg) == 127);
    CHECK(adc_quantize(-1.28, cfg) == -128);
    CHECK(adc_quantize(-9.0, cfg) == -128);
    CHECK(adc_quantize(0.025, cfg) == 3);    // 2.5 lsb rounds away from zero
    CHECK(adc_quantize(-0.025, cfg) == -3);
    CHECK(adc_clips(1.28, cfg));
    CHECK_FALSE(adc_clips(1.27, cfg));
}

TEST_CASE("adc_quantize: exhaustive sweep error bounded by lsb/2 outside the clip zones") {
    const FilterConfig cfg;
    const double lsb = adc_lsb(cfg);
    const double fs = cfg.adc_fullscale;
    for (int k = 0; k <= 200000; ++k) {
        const double v = -fs + 2.0 * fs * k / 200000.0;
        const double err = std::abs(v - dequantize(adc_quantize(v, cfg), cfg));
        if (adc_clips(v, cfg)) continue;
        REQUIRE(err <= lsb / 2 * (1 + 1e-12));
    }
}

TEST_CASE("dac_tap_voltage: bounded by v_tap_max and linear") {
    const FilterConfig cfg;
    CHECK(dac_tap_voltage(0, cfg) == 0.0);
    CHECK(dac_tap_voltage(127, cfg) == doctest::Approx(0.1984375));
    CHECK(dac_tap_voltage(127, cfg) <= 0.2);
    CHECK(std::abs(dac_tap_voltage(-128, cfg)) <= 0.2);
    for (int a = -64; a < 64; a += 7) {
        for (int b = -63; b < 63; b += 5) {
            REQUIRE(dac_tap_voltage(a + b, cfg) == doctest::Approx(dac_tap_voltage(a, cfg) + dac_tap_voltage(b, cfg)));
        }
    }
    CHECK(tap_gain(cfg) == doctest::Approx(0.15625));
}

TEST_CASE("weights_from_devices: w = alpha R_f / M") {
    const FilterConfig cfg;
    const double alpha = tap_gain(cfg);
    const std::vector<Device> taps{exact_device(2000.0), at_memristance(default_device_params(), 120000.0)};
    const auto w = weights_from_devices(taps, cfg);
    CHECK(w[0] == doctest::Approx(1.1 * alpha));
    CHECK(w[1] < 0.022 * alpha);
    const std::vector<Device> equal(4, exact_device(3300.0));
    const auto we = weights_from_devices(equal, cfg);
    for (double x : we) CHECK(x == we[0]);
    CHECK_THROWS_AS(weights_from_devices(std::vector<Device>{}, cfg), ParameterError);
}

TEST_CASE("step: impulse through six exact 2 kOhm taps") {
    const FilterConfig cfg;
    MixedSignalFilter f(cfg, std::vector<Device>(6, exact_device(2000.0)));
    CHECK(f.step(0.0) == 0.0);
    const double expected = 1.1 * tap_gain(cfg) * dequantize(127, cfg);
    CHECK(f.step(1.28) == doctest::Approx(expected).epsilon(1e-13));
    for (int k = 0; k < 5; ++k) CHECK(f.step(0.0) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(f.step(0.0) == 0.0);
    CHECK(f.shift_register().size() == 6);
}

TEST_CASE("step: raw mode keeps the inverting adder's sign") {
    FilterConfig cfg;
    FilterConfig raw = cfg;
    raw.sign_compensated = false;
    MixedSignalFilter a(cfg, std::vector<Device>(6, exact_device(2000.0)));
    MixedSignalFilter b(raw, std::vector<Device>(6, exact_device(2000.0)));
    for (double v : {0.3, -0.7, 1.1}) CHECK(a.step(v) == -b.step(v));
}

TEST_CASE("step: devices at r_off give a near-zero filter") {
    const FilterConfig cfg;
    MixedSignalFilter f(cfg, std::vector<Device>(6, Device(default_device_params(), 0.0, 0.0)));
    const double bound = 6 * tap_gain(cfg) * cfg.adc_fullscale * cfg.r_f / 150000.0;
    Rng rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 1000; ++k) REQUIRE(std::abs(f.step(u(rng))) <= bound);
}

TEST_CASE("run: zero in, zero out; sample-rate mismatch is a config error") {
    const FilterConfig cfg;
    MixedSignalFilter f(cfg, std::vector<Device>(6, exact_device(2000.0)));
    const Signal zero{std::vector<double>(100, 0.0), cfg.f_s};
    const auto out = f.run(zero);
    CHECK(out.size() == 100);
    for (double y : out.samples) CHECK(y == 0.0);
    CHECK_THROWS_AS(f.run(Signal{{0.0}, 1000.0}), ConfigError);
}

TEST_CASE("run: leaves every device state bit-identical") {
    const FilterConfig cfg;
    std::vector<Device> taps;
    for (double m : {2000.0, 2100.0, 3900.0, 120000.0, 130000.0, 90000.0}) {
        taps.push_back(at_memristance(default_device_params(), m));
    }
    MixedSignalFilter f(cfg, taps);
    Rng rng(5);
    std::normal_distribution<double> n(0.0, 0.6);
    Signal x{std::vector<double>(20000), cfg.f_s};
    for (auto& v : x.samples) v = n(rng);
    f.run(x);
    for (std::size_t k = 0; k < taps.size(); ++k) CHECK(f.taps()[k] == taps[k]);
}

TEST_CASE("run: matches ideal_fir on quantized input within sum|w| lsb/2") {
    Rng rng(11);
    std::uniform_real_distribution<double> log_m(std::log(1200.0), std::log(140000.0));
    std::uniform_real_distribution<double> v(-1.5, 1.5);
    for (int k_d : {8, 16}) {
        FilterConfig cfg;
        cfg.k_d = k_d;
        const double lsb = adc_lsb(cfg);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<Device> taps;
            for (int i = 0; i < 6; ++i) taps.push_back(at_memristance(default_device_params(), std::exp(log_m(rng))));
            MixedSignalFilter f(cfg, taps);
            Signal x{std::vector<double>(500), cfg.f_s};
            for (auto& s : x.samples) s = v(rng);
            const auto w = weights_from_devices(taps, cfg);
            const auto y = f.run(x);
            const auto ref = ideal_fir(w, quantize_dequantize(x, cfg));
            const double bound = sum_abs(w) * lsb / 2;
            for (std::size_t n = 0; n < y.size(); ++n) REQUIRE(std::abs(y.samples[n] - ref.samples[n]) <= bound);
        }
    }
}

TEST_CASE("run: quantized pipeline is linear up to the quantization bound") {
    const FilterConfig cfg;
    std::vector<Device> taps(6, exact_device(2000.0));
    const auto w = weights_from_devices(taps, cfg);
    Rng rng(8);
    std::uniform_real_distribution<double> v(-0.6, 0.6);
    Signal x{std::vector<double>(2000), cfg.f_s};
    for (auto& s : x.samples) s = v(rng);
    for (double a : {0.5, 1.7, -2.0}) {
        Signal ax = x;
        for (auto& s : ax.samples) s *= a;
        MixedSignalFilter f1(cfg, taps);
        MixedSignalFilter f2(cfg, taps);
        const auto y = f1.run(x);
        const auto ya = f2.run(ax);
        const double bound = sum_abs(w) * adc_lsb(cfg) / 2 * (1.0 + std::abs(a));
        for (std::size_t n = 0; n < y.size(); ++n) REQUIRE(std::abs(ya.samples[n] - a * y.samples[n]) <= bound * (1 + 1e-12));
    }
}

TEST_CASE("ideal_fir: delta, constant and random input") {
    const std::vector<double> w{0.3, -0.1, 0.25, 0.05};
    Signal delta{std::vector<double>(8, 0.0), 1000.0};
    delta.samples[0] = 1.0;
    const auto h = ideal_fir(w, delta);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(h.samples[i] == w[i]);
    for (std::size_t i = w.size(); i < 8; ++i) CHECK(h.samples[i] == 0.0);

    const std::vector<double> ones(6, 1.0);
    const auto c = ideal_fir(ones, Signal{std::vector<double>(20, 0.7), 1000.0});
    for (std::size_t n = 5; n < 20; ++n) CHECK(c.samples[n] == doctest::Approx(6 * 0.7));

    Rng rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> wr(1 + trial % 9);
        for (auto& x : wr) x = g(rng);
        Signal x{std::vector<double>(300), 1000.0};
        for (auto& s : x.samples) s = g(rng);
        const auto y = ideal_fir(wr, x);
        const auto ref = direct_form(wr, x.samples);
        for (std::size_t n = 0; n < ref.size(); ++n) REQUIRE(y.samples[n] == doctest::Approx(ref[n]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(ideal_fir(std::vector<double>{}, delta), ParameterError);
}

TEST_CASE("ideal_fir: exactly homogeneous under power-of-two scaling") {
    const std::vector<double> w{0.3, -0.1, 0.25};
    Rng rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    Signal x{std::vector<double>(100), 1000.0};
    for (auto& s : x.samples) s = g(rng);
    Signal x4 = x;
    for (auto& s : x4.samples) s *= 4.0;
    const auto y = ideal_fir(w, x);
    const auto y4 = ideal_fir(w, x4);
    for (std::size_t n = 0; n < y.size(); ++n) REQUIRE(y4.samples[n] == 4.0 * y.samples[n]);
}

TEST_CASE("filter config validation") {
    FilterConfig cfg;
    cfg.v_tap_max = 0.6;
    CHECK_THROWS_AS(MixedSignalFilter(cfg, std::vector<Device>(6, exact_device(2000.0))), ParameterError);
    CHECK_THROWS_AS(MixedSignalFilter(FilterConfig{}, std::vector<Device>(5, exact_device(2000.0))), ParameterError);
    cfg = FilterConfig{};
    cfg.n_taps = 0;
    CHECK_THROWS_AS(validate(cfg, 0.5), ParameterError);
}

TEST_CASE("write_signal_csv: schema and 9 significant digits of time") {
    const Signal in{{0.1, 0.2, 0.3}, 15000.0};
    const Signal out{{0.0, 0.05, 0.1}, 15000.0};
    std::ostringstream os;
    write_signal_csv(os, in, out);
    CHECK(os.str() == "index,time_s,input_v,output_v\n0,0,0.1,0\n1,6.66666667e-05,0.2,0.05\n2,0.000133333333,0.3,0.1\n");
}

#include <doctest.h>

#include <random>
#include <vector>

#include <omp.h>

#include "memfir/analysis.hpp"
#include "memfir/filter.hpp"
#include "memfir/tuner.hpp"

using namespace memfir;

// The OpenMP kernels must reproduce their serial references bit for bit,
// whatever the thread count.

namespace {
struct Threads {
    explicit Threads(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
    ~Threads() { omp_set_num_threads(saved); }
    int saved;
};
} // namespace

TEST_CASE("ideal_fir: parallel equals serial") {
    Rng rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> w(11);
    for (auto& x : w) x = g(rng);
    Signal x{std::vector<double>(50000), 15000.0};
    for (auto& s : x.samples) s = g(rng);
    for (int t : {1, 3, 8}) {
        Threads guard(t);
        CHECK(ideal_fir(w, x).samples == serial::ideal_fir(w, x).samples);
    }
}

TEST_CASE("frequency_response: parallel equals serial") {
    const std::vector<double> w{0.17, 0.17, 0.086, 0.003, 0.003, 0.003};
    for (int t : {1, 4}) {
        Threads guard(t);
        const auto a = frequency_response(w, 15000.0, 4097);
        const auto b = serial::frequency_response(w, 15000.0, 4097);
        CHECK(a.freqs == b.freqs);
        CHECK(a.magnitude == b.magnitude);
    }
}

TEST_CASE("tune_bank: parallel equals serial, independent of scheduling") {
    const VariationSpec var{0.05, 0.1, 0};
    std::vector<Device> spawned;
    Rng rng(10);
    for (int k = 0; k < 12; ++k) spawned.push_back(spawn_device(default_device_params(), var, rng));
    const std::vector<double> targets{2000, 2000, 4000, 120000, 120000, 120000, 3000, 5000, 9000, 2500, 60000, 1500};
    for (int t : {1, 5}) {
        Threads guard(t);
        auto a = spawned;
        auto b = spawned;
        const auto ra = tune_bank(a, targets, TuneConfig{}, 31);
        const auto rb = serial::tune_bank(b, targets, TuneConfig{}, 31);
        CHECK(a == b);
        for (std::size_t k = 0; k < ra.size(); ++k) {
            CHECK(ra[k].converged == rb[k].converged);
            CHECK(ra[k].final_r == rb[k].final_r);
            CHECK(ra[k].trace.size() == rb[k].trace.size());
        }
    }
}

TEST_CASE("tuning_yield: parallel equals serial") {
    const VariationSpec var{0.05, 0.1, 555};
    Threads guard(4);
    CHECK(tuning_yield(default_device_params(), var, 2000.0, TuneConfig{}, 200) ==
          serial::tuning_yield(default_device_params(), var, 2000.0, TuneConfig{}, 200));
}

TEST_CASE("measured_frequency_response: parallel equals serial") {
    const auto p = default_device_params();
    std::vector<Device> taps;
    for (double s : {0.5, 0.49, 0.51, 0.2, 0.3, 0.0}) taps.emplace_back(p, 0.0, s);
    const MixedSignalFilter filter(FilterConfig{}, taps);
    const std::vector<double> freqs{100, 900, 1500, 2600, 4100, 7000};
    Threads guard(3);
    CHECK(measured_frequency_response(filter, freqs, 1.0, 10).magnitude ==
          serial::measured_frequency_response(filter, freqs, 1.0, 10).magnitude);
}

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "memfir/analysis.hpp"
#include "memfir/filter.hpp"
#include "memfir/tuner.hpp"

using namespace memfir;

namespace {

Signal random_signal(std::size_t n) {
    Rng rng(1);
    std::normal_distribution<double> g(0.0, 0.3);
    Signal x{std::vector<double>(n), 15000.0};
    for (auto& s : x.samples) s = g(rng);
    return x;
}

const std::vector<double> kWeights{0.17, 0.17, 0.086, 0.003, 0.003, 0.003, 0.05, 0.02};

void BM_ideal_fir_serial(benchmark::State& state) {
    const auto x = random_signal(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(serial::ideal_fir(kWeights, x));
}
void BM_ideal_fir_omp(benchmark::State& state) {
    const auto x = random_signal(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(ideal_fir(kWeights, x));
}
BENCHMARK(BM_ideal_fir_serial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_ideal_fir_omp)->Arg(1 << 16)->Arg(1 << 20);

void BM_response_serial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(serial::frequency_response(kWeights, 15000.0, 1 << 14));
}
void BM_response_omp(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(frequency_response(kWeights, 15000.0, 1 << 14));
}
BENCHMARK(BM_response_serial);
BENCHMARK(BM_response_omp);

const VariationSpec kVariation{0.05, 0.1, 2013};

void BM_yield_serial(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(serial::tuning_yield(default_device_params(), kVariation, 2000.0, TuneConfig{}, 200));
}
void BM_yield_omp(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(tuning_yield(default_device_params(), kVariation, 2000.0, TuneConfig{}, 200));
}
BENCHMARK(BM_yield_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_yield_omp)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();

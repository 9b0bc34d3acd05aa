#include "xsim/xsim.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace {

std::vector<double> walk(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> step(0.0, 0.02);
    std::vector<double> v(n);
    double level = 100.0;
    for (std::size_t i = 0; i < n; ++i) {
        level *= std::exp(step(rng));
        v[i] = level * (1.0 + 0.2 * std::sin(2.0 * 3.141592653589793 * static_cast<double>(i) / 12.0));
    }
    return v;
}

void BM_Distance(benchmark::State& state, xsim::DistanceKind kind) {
    std::mt19937_64 rng(1);
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = walk(rng, n);
    const auto b = walk(rng, n);
    for (auto _ : state) benchmark::DoNotOptimize(xsim::distance(kind, a, b));
    state.SetComplexityN(state.range(0));
}
BENCHMARK_CAPTURE(BM_Distance, l1, xsim::DistanceKind::L1)->RangeMultiplier(2)->Range(16, 256)->Complexity();
BENCHMARK_CAPTURE(BM_Distance, l2, xsim::DistanceKind::L2)->RangeMultiplier(2)->Range(16, 256)->Complexity();
BENCHMARK_CAPTURE(BM_Distance, dtw, xsim::DistanceKind::DTW)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_Preprocess(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const auto values = walk(rng, static_cast<std::size_t>(state.range(0)));
    const xsim::TimeSeries ts("b", xsim::Frequency(12), values, 18);
    const auto cfg = xsim::PreprocessConfig::for_frequency(xsim::Frequency(12));
    for (auto _ : state) benchmark::DoNotOptimize(xsim::preprocess_series(ts, cfg));
}
BENCHMARK(BM_Preprocess)->Arg(48)->Arg(120)->Arg(240);

struct Corpus {
    xsim::ReferenceSet set;
    xsim::TimeSeries target;
};

Corpus make_corpus(std::size_t m) {
    std::mt19937_64 rng(3);
    std::vector<xsim::CorpusRecord> records;
    for (std::size_t i = 0; i < m; ++i) records.push_back({"r" + std::to_string(i), "monthly", 12, walk(rng, 66), 18});
    const auto cfg = xsim::PreprocessConfig::for_frequency(xsim::Frequency(12));
    auto built = xsim::build_reference_set(records, 48, 18, xsim::Frequency(12), cfg);
    return {std::move(built.set), xsim::TimeSeries("t", xsim::Frequency(12), walk(rng, 48), 18)};
}

void BM_NearestK(benchmark::State& state) {
    static const auto corpus = make_corpus(2000);
    const auto cfg = xsim::PreprocessConfig::for_frequency(xsim::Frequency(12));
    const auto target = xsim::preprocess_series(corpus.target, cfg);
    const auto threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            xsim::nearest_k(target.scaled, corpus.set, xsim::DistanceKind::DTW, 500, threads));
    }
}
BENCHMARK(BM_NearestK)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Forecast(benchmark::State& state) {
    static const auto corpus = make_corpus(2000);
    const auto cfg = xsim::PreprocessConfig::for_frequency(xsim::Frequency(12));
    xsim::ForecastConfig fc;
    for (auto _ : state) benchmark::DoNotOptimize(xsim::forecast(corpus.target, corpus.set, cfg, fc));
}
BENCHMARK(BM_Forecast)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

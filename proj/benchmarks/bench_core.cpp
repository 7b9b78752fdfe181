#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <vector>

#include "cegsr/degrade.hpp"
#include "cegsr/loop.hpp"
#include "cegsr/metrics.hpp"
#include "cegsr/sr_operator.hpp"
#include "cegsr/synth.hpp"

using namespace cegsr;

namespace {

SignalRecord demo_record(int channels, int samples) {
    SynthSpec spec;
    spec.channels = channels;
    spec.samples = samples;
    spec.seed = 5;
    return synthesize_ecg(spec);
}

std::shared_ptr<const LinearSrModel> demo_model(int d, int f) {
    std::vector<TrainPair> pairs;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 2 * (d + 1); ++k) {
        TrainPair p;
        p.lr.resize(static_cast<size_t>(d));
        for (double& v : p.lr) v = u(rng);
        p.sr.resize(static_cast<size_t>(d) * f);
        for (double& v : p.sr) v = u(rng);
        pairs.push_back(std::move(p));
    }
    return std::make_shared<LinearSrModel>(fit_linear_sr(pairs, 1e-6));
}

void bm_downsample(benchmark::State& state) {
    const auto kind = static_cast<DownsampleKind>(state.range(0));
    const SignalRecord rec = demo_record(1, 5000);
    for (auto _ : state) benchmark::DoNotOptimize(downsample(rec, 5, kind));
}

void bm_upsample_cubic(benchmark::State& state) {
    const SignalRecord rec = demo_record(1, 1000);
    const SrOperatorSpec sr = make_interp_sr(make_geometry(1, 1000, 5), DownsampleKind::cubic);
    for (auto _ : state) benchmark::DoNotOptimize(apply_sr(sr, rec));
}

void bm_linear_sr(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0)), f = 5;
    const SrOperatorSpec sr = make_linear_sr(make_geometry(1, d, f), demo_model(d, f));
    std::vector<double> x(static_cast<size_t>(d), 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(apply_sr(sr, x));
}

void bm_fit_linear(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0)), f = 5;
    std::vector<TrainPair> pairs;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 4 * (d + 1); ++k) {
        TrainPair p;
        p.lr.resize(static_cast<size_t>(d));
        for (double& v : p.lr) v = u(rng);
        p.sr.resize(static_cast<size_t>(d) * f);
        for (double& v : p.sr) v = u(rng);
        pairs.push_back(std::move(p));
    }
    for (auto _ : state) benchmark::DoNotOptimize(fit_linear_sr(pairs, 1e-6));
}

void bm_closed_loop(benchmark::State& state) {
    const int d = 60, f = 5;
    const SignalRecord truth = demo_record(1, d * f);
    const SignalRecord lr = downsample(truth, f, DownsampleKind::nearest);
    const SrOperatorSpec sr = make_linear_sr(make_geometry(1, d, f), demo_model(d, f));
    LoopConfig cfg;
    cfg.max_iters = static_cast<int>(state.range(0));
    cfg.tol = 0.0;
    cfg.lambda = 0.5;
    for (auto _ : state) benchmark::DoNotOptimize(run_closed_loop(sr, lr, cfg));
}

void bm_metrics(benchmark::State& state) {
    const SignalRecord a = demo_record(12, 2500);
    SignalRecord b = a;
    for (double& v : b.data) v += 0.01;
    for (auto _ : state) benchmark::DoNotOptimize(compute_metrics(a, b));
}

void bm_synthesize(benchmark::State& state) {
    SynthSpec spec;
    spec.channels = 12;
    spec.samples = static_cast<int>(state.range(0));
    spec.phase_jitter = 1.0;
    for (auto _ : state) {
        spec.seed++;
        benchmark::DoNotOptimize(synthesize_ecg(spec));
    }
}

}  // namespace

BENCHMARK(bm_downsample)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_upsample_cubic)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_linear_sr)->Arg(60)->Arg(250)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_fit_linear)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_closed_loop)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_metrics)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_synthesize)->Arg(2500)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();

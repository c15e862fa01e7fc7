#include <benchmark/benchmark.h>

#include <random>

#include "canids/entropy.hpp"
#include "canids/entropy_kernels.hpp"
#include "canids/evaluation.hpp"

namespace {

std::vector<canids::CanFrame> random_log(std::size_t n) {
  std::mt19937_64 rng(7);
  std::vector<canids::CanFrame> frames(n);
  for (std::size_t i = 0; i < n; ++i) {
    frames[i].timestamp_us = i * 900;
    frames[i].id = canids::CanId(static_cast<unsigned>(rng() % 2048));
  }
  return frames;
}

void BM_CountBitsSerial(benchmark::State& state) {
  const auto frames = random_log(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(canids::kernels::count_bits_serial(frames));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CountBitsParallel(benchmark::State& state) {
  const auto frames = random_log(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(canids::kernels::count_bits_parallel(frames));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void windowed(benchmark::State& state, canids::Exec exec) {
  const auto frames = random_log(static_cast<std::size_t>(state.range(0)));
  // 1 s windows sliding by 100 ms: heavy overlap, many windows.
  const canids::WindowPolicy policy{canids::WindowMode::Time, 1.0, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(canids::windowed_stats(frames, policy, 0, exec));
}

void BM_WindowedSerial(benchmark::State& state) { windowed(state, canids::Exec::Serial); }
void BM_WindowedParallel(benchmark::State& state) { windowed(state, canids::Exec::Parallel); }

void trials(benchmark::State& state, bool parallel) {
  const auto baseline = canids::make_default_scenario();
  canids::EvaluationConfig config;
  config.parallel = parallel;
  config.sweep_trials = 4;
  const auto tmpl = canids::build_baseline_template(baseline, 8, 5.0, config.window, 1);
  const std::vector<canids::CanId> ids = {canids::CanId(0x010), canids::CanId(0x200)};
  for (auto _ : state) benchmark::DoNotOptimize(canids::run_id_sweep(baseline, tmpl, ids, 100, 3, config));
}

void BM_TrialsSerial(benchmark::State& state) { trials(state, false); }
void BM_TrialsParallel(benchmark::State& state) { trials(state, true); }

}  // namespace

BENCHMARK(BM_CountBitsSerial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_CountBitsParallel)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_WindowedSerial)->Arg(1 << 18);
BENCHMARK(BM_WindowedParallel)->Arg(1 << 18);
BENCHMARK(BM_TrialsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrialsParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

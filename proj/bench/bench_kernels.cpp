#include <benchmark/benchmark.h>

#include "sorkin/interferometer.hpp"
#include "sorkin/kernels.hpp"
#include "sorkin/path_subset.hpp"

using namespace sorkin;

namespace {

CampaignConfig bench_config(int cycles) {
  CampaignConfig c;
  c.model = InterferometerModel::balanced(5, 1e4, 0.9);
  c.noise.sigma_phase = 0.01;
  c.noise.sigma_power_rel = 1e-3;
  c.noise.shot_noise = true;
  c.noise.seed = 11;
  c.n_cycles = cycles;
  return c;
}

std::vector<PathSubset> all_orders(int n) {
  std::vector<PathSubset> out;
  for (int j = 3; j <= n; ++j) {
    auto l = enumerate_order_subsets(PathSubset::full(n), j);
    out.insert(out.end(), l.begin(), l.end());
  }
  return out;
}

template <class Gen>
void run_generate(benchmark::State& st, Gen gen) {
  const auto cfg = bench_config(static_cast<int>(st.range(0)));
  const auto model = effective_model(cfg);
  const auto drift = phase_drift_schedule(cfg);
  for (auto _ : st) benchmark::DoNotOptimize(gen(cfg, model, drift));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <class Series>
void run_series(benchmark::State& st, Series series) {
  const auto cfg = bench_config(static_cast<int>(st.range(0)));
  const auto cycles = kernels::serial::generate_cycles(cfg, effective_model(cfg), phase_drift_schedule(cfg));
  std::vector<RateTuple> tuples;
  for (const auto& c : cycles) tuples.push_back(c.readings);
  const auto subsets = all_orders(5);
  for (auto _ : st) benchmark::DoNotOptimize(series(tuples, subsets, true));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <class Trials>
void run_trials(benchmark::State& st, Trials trials) {
  const auto model = InterferometerModel::balanced(5, 2.25, 0.8);
  const auto base = ideal_rates(model);
  std::vector<double> sigma(base.size(), 1e-6);
  const auto subsets = all_orders(5);
  for (auto _ : st)
    benchmark::DoNotOptimize(trials(base, sigma, subsets, static_cast<int>(st.range(0)), 5, true));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_generate_serial(benchmark::State& st) { run_generate(st, kernels::serial::generate_cycles); }
void BM_generate_omp(benchmark::State& st) { run_generate(st, kernels::omp::generate_cycles); }
void BM_series_serial(benchmark::State& st) { run_series(st, kernels::serial::sorkin_series); }
void BM_series_omp(benchmark::State& st) { run_series(st, kernels::omp::sorkin_series); }
void BM_trials_serial(benchmark::State& st) { run_trials(st, kernels::serial::kappa_trials); }
void BM_trials_omp(benchmark::State& st) { run_trials(st, kernels::omp::kappa_trials); }

}  // namespace

BENCHMARK(BM_generate_serial)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_generate_omp)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_series_serial)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_series_omp)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_trials_serial)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_trials_omp)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

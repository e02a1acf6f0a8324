#include "sorkin/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sorkin/rng.hpp"
#include "sorkin/sorkin.hpp"

namespace sorkin::kernels {

namespace {

double subset_max_reading(const RateTuple& r, std::uint32_t mask) {
  double m = 0.0;
  std::uint32_t s = mask;
  while (true) {
    m = std::max(m, std::abs(r[s]));
    if (s == 0) break;
    s = (s - 1) & mask;
  }
  return m;
}

SeriesBlock make_block(std::size_t n_subsets, std::size_t n_cycles) {
  SeriesBlock b;
  b.epsilon.assign(n_subsets, std::vector<double>(n_cycles));
  b.delta.assign(n_subsets, std::vector<double>(n_cycles));
  b.max_reading.assign(n_subsets, 0.0);
  return b;
}

void fill_trial(const RateTuple& base, std::span<const double> sigma,
                std::span<const PathSubset> subsets, std::uint64_t seed, int trial, bool bg,
                TrialMatrix& out) {
  auto eng = rng::make_engine(seed, rng::Stream::monte_carlo, static_cast<std::uint64_t>(trial));
  std::normal_distribution<double> gauss(0.0, 1.0);
  RateTuple r = base;
  auto values = r.readings();
  for (std::size_t m = 0; m < values.size(); ++m) values[m] += sigma[m] * gauss(eng);
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    const double d = delta(r, subsets[s], bg);
    out(trial, static_cast<Eigen::Index>(s)) =
        d == 0.0 ? std::numeric_limits<double>::quiet_NaN() : epsilon(r, subsets[s]) / d;
  }
}

}  // namespace

namespace serial {

std::vector<MeasurementCycle> generate_cycles(const CampaignConfig& config,
                                              const InterferometerModel& model,
                                              const std::vector<std::vector<double>>& drift) {
  std::vector<MeasurementCycle> cycles(static_cast<std::size_t>(config.n_cycles));
  for (int c = 0; c < config.n_cycles; ++c)
    cycles[c] = simulate_cycle(config, model, c, drift[c]);
  return cycles;
}

SeriesBlock sorkin_series(std::span<const RateTuple> cycles, std::span<const PathSubset> subsets,
                          bool bg) {
  auto b = make_block(subsets.size(), cycles.size());
  for (std::size_t s = 0; s < subsets.size(); ++s)
    for (std::size_t c = 0; c < cycles.size(); ++c) {
      b.epsilon[s][c] = epsilon(cycles[c], subsets[s]);
      b.delta[s][c] = delta(cycles[c], subsets[s], bg);
      b.max_reading[s] = std::max(b.max_reading[s], subset_max_reading(cycles[c], subsets[s].mask()));
    }
  return b;
}

TrialMatrix kappa_trials(const RateTuple& base, std::span<const double> sigma,
                         std::span<const PathSubset> subsets, int n_trials, std::uint64_t seed,
                         bool bg) {
  TrialMatrix out(n_trials, static_cast<Eigen::Index>(subsets.size()));
  for (int t = 0; t < n_trials; ++t) fill_trial(base, sigma, subsets, seed, t, bg, out);
  return out;
}

}  // namespace serial

namespace omp {

std::vector<MeasurementCycle> generate_cycles(const CampaignConfig& config,
                                              const InterferometerModel& model,
                                              const std::vector<std::vector<double>>& drift) {
  std::vector<MeasurementCycle> cycles(static_cast<std::size_t>(config.n_cycles));
#pragma omp parallel for schedule(static)
  for (int c = 0; c < config.n_cycles; ++c)
    cycles[c] = simulate_cycle(config, model, c, drift[c]);
  return cycles;
}

SeriesBlock sorkin_series(std::span<const RateTuple> cycles, std::span<const PathSubset> subsets,
                          bool bg) {
  auto b = make_block(subsets.size(), cycles.size());
  const auto n_sub = static_cast<long>(subsets.size());
  const auto n_cyc = static_cast<long>(cycles.size());
#pragma omp parallel for collapse(2) schedule(static)
  for (long s = 0; s < n_sub; ++s)
    for (long c = 0; c < n_cyc; ++c) {
      b.epsilon[s][c] = epsilon(cycles[c], subsets[s]);
      b.delta[s][c] = delta(cycles[c], subsets[s], bg);
    }
#pragma omp parallel for schedule(static)
  for (long s = 0; s < n_sub; ++s)
    for (long c = 0; c < n_cyc; ++c)
      b.max_reading[s] = std::max(b.max_reading[s], subset_max_reading(cycles[c], subsets[s].mask()));
  return b;
}

TrialMatrix kappa_trials(const RateTuple& base, std::span<const double> sigma,
                         std::span<const PathSubset> subsets, int n_trials, std::uint64_t seed,
                         bool bg) {
  TrialMatrix out(n_trials, static_cast<Eigen::Index>(subsets.size()));
#pragma omp parallel for schedule(static)
  for (int t = 0; t < n_trials; ++t) fill_trial(base, sigma, subsets, seed, t, bg, out);
  return out;
}

}  // namespace omp

}  // namespace sorkin::kernels

#include "sorkin/sorkin.hpp"

#include <bit>
#include <cmath>
#include <numeric>

#include "sorkin/error.hpp"

namespace sorkin {

double epsilon(const RateTuple& readings, PathSubset subset) {
  if (subset.size() < 2) throw ParameterError("epsilon needs |subset| >= 2");
  const int j = subset.size();
  const std::uint32_t m = subset.mask();
  double sum = 0.0;
  std::uint32_t s = m;
  while (true) {
    const int sign_exp = j - std::popcount(s);
    const double r = readings.at(PathSubset(s));
    sum += (sign_exp & 1) ? -r : r;
    if (s == 0) break;
    s = (s - 1) & m;
  }
  return sum;
}

double pairwise_interference(const RateTuple& readings, int k, int l,
                             bool subtract_background) {
  if (k == l) throw ParameterError("pairwise interference needs two distinct paths");
  const double pkl = readings.at(PathSubset::of({k, l}));
  const double pk = readings.at(PathSubset::of({k}));
  const double pl = readings.at(PathSubset::of({l}));
  double i = pkl - pk - pl;
  if (subtract_background) i += readings.at(PathSubset());
  return i;
}

double delta(const RateTuple& readings, PathSubset subset, bool subtract_background) {
  if (subset.size() < 2) throw ParameterError("delta needs |subset| >= 2");
  const auto p = subset.paths();
  double sum = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = a + 1; b < p.size(); ++b)
      sum += std::abs(pairwise_interference(readings, p[a], p[b], subtract_background));
  return sum;
}

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

SorkinEstimate kappa_from_series(PathSubset subset, std::vector<double> eps,
                                 std::vector<double> del, double max_reading,
                                 const SorkinOptions& options) {
  if (eps.size() != del.size()) throw ParameterError("epsilon/delta series length mismatch");
  if (eps.size() < 2) throw ParameterError("kappa estimation needs at least 2 cycles");
  SorkinEstimate est;
  est.subset = subset;
  est.order = subset.size();
  est.mean_epsilon = mean_of(eps);
  est.mean_delta = mean_of(del);
  if (!(est.mean_delta > options.undefined_delta_ratio * max_reading) || est.mean_delta == 0.0)
    throw UndefinedNormalizationError("mean delta vanishes for subset " + subset.label() +
                                      "; kappa undefined");
  est.kappa = est.mean_epsilon / est.mean_delta;
  const double m = static_cast<double>(eps.size());
  est.kappa_sem = sample_std(eps, est.mean_epsilon) / (std::sqrt(m) * est.mean_delta);
  est.epsilon_series = std::move(eps);
  est.delta_series = std::move(del);
  return est;
}

SorkinEstimate kappa_unbiased(std::span<const RateTuple> cycles, PathSubset subset,
                              const SorkinOptions& options) {
  std::vector<double> eps, del;
  eps.reserve(cycles.size());
  del.reserve(cycles.size());
  double max_reading = 0.0;
  const auto members = all_subsets(subset);
  for (const auto& c : cycles) {
    eps.push_back(epsilon(c, subset));
    del.push_back(delta(c, subset, options.background_in_pairwise));
    for (PathSubset s : members) max_reading = std::max(max_reading, std::abs(c.at(s)));
  }
  return kappa_from_series(subset, std::move(eps), std::move(del), max_reading, options);
}

ValueSem kappa_naive(std::span<const double> eps, std::span<const double> del) {
  if (eps.size() != del.size() || eps.size() < 2)
    throw ParameterError("naive kappa needs matching series of length >= 2");
  std::vector<double> ratio(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (del[i] == 0.0) throw UndefinedNormalizationError("delta_i = 0 in naive estimator");
    ratio[i] = eps[i] / del[i];
  }
  const double mu = mean_of(ratio);
  return {mu, sample_std(ratio, mu) / std::sqrt(static_cast<double>(ratio.size()))};
}

}  // namespace sorkin

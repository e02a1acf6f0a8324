#pragma once

#include <span>
#include <vector>

#include "sorkin/path_subset.hpp"
#include "sorkin/rate_tuple.hpp"

namespace sorkin {

struct ValueSem {
  double value = 0.0;
  double sem = 0.0;
};

struct SorkinOptions {
  // Adds +p_0 to the pairwise term so additive backgrounds cancel exactly.
  // Switch off to reproduce the background-free two-path algebra.
  bool background_in_pairwise = true;
  // <delta> below this fraction of the largest reading leaves kappa undefined.
  double undefined_delta_ratio = 1e-9;
};

/// Inclusion-exclusion interference term over `subset`:
/// sum over S ⊆ subset of (-1)^(|subset|-|S|) readings[S].
double epsilon(const RateTuple& readings, PathSubset subset);

/// I_kl = p_kl - p_k - p_l (+ p_0).
double pairwise_interference(const RateTuple& readings, int k, int l,
                             bool subtract_background = true);

/// Sum of |I_kl| over all unordered pairs inside `subset`.
double delta(const RateTuple& readings, PathSubset subset,
             bool subtract_background = true);

struct SorkinEstimate {
  PathSubset subset;
  int order = 0;
  std::vector<double> epsilon_series;
  std::vector<double> delta_series;
  double mean_epsilon = 0.0;
  double mean_delta = 0.0;
  double kappa = 0.0;
  double kappa_sem = 0.0;
};

/// Separate-averaging estimator <eps>/<delta> with SEM sigma_eps/(sqrt(M) <delta>).
SorkinEstimate kappa_unbiased(std::span<const RateTuple> cycles, PathSubset subset,
                              const SorkinOptions& options = {});

/// Same estimator from precomputed series. `max_reading` feeds the
/// undefined-normalization guard.
SorkinEstimate kappa_from_series(PathSubset subset, std::vector<double> eps,
                                 std::vector<double> del, double max_reading,
                                 const SorkinOptions& options = {});

/// Mean of per-cycle ratios eps_i/delta_i. Biased; kept for comparison.
ValueSem kappa_naive(std::span<const double> eps, std::span<const double> del);

}  // namespace sorkin

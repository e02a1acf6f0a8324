#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sorkin/interferometer.hpp"
#include "sorkin/path_subset.hpp"
#include "sorkin/rate_tuple.hpp"

// Data-parallel hot loops. Each kernel has a serial reference and an OpenMP
// version; both write every output slot from the same inputs and per-item RNG
// streams, so their results are bit-identical.
namespace sorkin::kernels {

/// Per-cycle epsilon and delta for a list of subsets, laid out [subset][cycle].
struct SeriesBlock {
  std::vector<std::vector<double>> epsilon;
  std::vector<std::vector<double>> delta;
  std::vector<double> max_reading;  // per subset, over all member readings
};

/// Monte-Carlo kappa samples laid out (trial, subset). Each trial perturbs every
/// reading of `base` independently by N(0, sigma[mask]^2).
using TrialMatrix = Eigen::MatrixXd;

namespace serial {

std::vector<MeasurementCycle> generate_cycles(const CampaignConfig& config,
                                              const InterferometerModel& model,
                                              const std::vector<std::vector<double>>& drift);

SeriesBlock sorkin_series(std::span<const RateTuple> cycles, std::span<const PathSubset> subsets,
                          bool background_in_pairwise = true);

TrialMatrix kappa_trials(const RateTuple& base, std::span<const double> sigma,
                         std::span<const PathSubset> subsets, int n_trials, std::uint64_t seed,
                         bool background_in_pairwise = true);

}  // namespace serial

namespace omp {

std::vector<MeasurementCycle> generate_cycles(const CampaignConfig& config,
                                              const InterferometerModel& model,
                                              const std::vector<std::vector<double>>& drift);

SeriesBlock sorkin_series(std::span<const RateTuple> cycles, std::span<const PathSubset> subsets,
                          bool background_in_pairwise = true);

TrialMatrix kappa_trials(const RateTuple& base, std::span<const double> sigma,
                         std::span<const PathSubset> subsets, int n_trials, std::uint64_t seed,
                         bool background_in_pairwise = true);

}  // namespace omp

}  // namespace sorkin::kernels

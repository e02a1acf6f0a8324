#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sorkin/detector.hpp"

namespace sorkin {

/// Beam-combination record: both closed, path 1, path 2, both open.
struct BeamCombinationRecord {
  double v0 = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;
};

struct BeamCombinationDataset {
  std::vector<BeamCombinationRecord> records;
  bool linear_ramp = true;

  std::size_t size() const noexcept { return records.size(); }
  std::vector<double> channel(int m) const;
  std::array<double, 2> reading_span() const;
};

struct CalibrationOptions {
  int window = 101;           // floating standard deviation window r
  int n_max = 5;              // highest polynomial degree tried
  double theta = 0.01;        // order selection: stop when X(n+1)/X(n) > 1 - theta
  double weight_floor = 1e-3; // sigma_k >= weight_floor * median(sigma_k)
};

/// Local noise level: at each point, the residual standard deviation of the
/// surrounding `window` points about their own least-squares line. Windows
/// are truncated at the edges.
std::vector<double> floating_std(std::span<const double> series, int window);

/// sigma_k = sqrt(sum_m sigma_{V_m,k}^2), floored at weight_floor * median.
std::vector<double> record_sigmas(const BeamCombinationDataset& data, const CalibrationOptions& opt);

/// S_{j,k} = V0^j + V3^j - V1^j - V2^j.
double combination_sum(const BeamCombinationRecord& r, int j);

struct FitDiagnostics {
  double residual = 0.0;                         // R_n
  std::vector<std::pair<int, double>> x_table;   // (n, X(n))
  int chosen_degree = 0;
  std::vector<double> weights;                   // sigma_k
  double condition_number = 0.0;
};

struct PolynomialFit {
  PolynomialTransfer transfer;
  FitDiagnostics diagnostics;
};

/// X(n) = R_n / (M - (r-1) - n + 1).
double normalized_residual(double residual, std::size_t records, int window, int degree);

/// Weighted least squares for a_2..a_n with explicit per-record sigmas.
PolynomialFit fit_polynomial_weighted(const BeamCombinationDataset& data, int degree,
                                      std::span<const double> sigmas, int window);

/// Weighted least squares with sigmas from floating standard deviations.
PolynomialFit fit_polynomial_nl(const BeamCombinationDataset& data, int degree,
                                const CalibrationOptions& opt = {});

/// Smallest n with X(n+1)/X(n) > 1 - theta; `x_by_degree[i]` holds X(i+1).
int choose_order(std::span<const double> x_by_degree, double theta);

struct OrderSelection {
  int chosen_degree = 1;
  bool significant = false;  // false: no significant nonlinearity (n = 1)
  std::vector<std::pair<int, double>> x_table;
};

OrderSelection select_order(const BeamCombinationDataset& data, const CalibrationOptions& opt = {});

/// Additivity defect of one record under the saturation model.
double deadtime_additivity(double tau, const BeamCombinationRecord& r);

/// R(tau) = sum_k F(tau, V_k)^2 / sigma_k^2.
double deadtime_objective(double tau, const BeamCombinationDataset& data,
                          std::span<const double> sigmas);

struct DeadtimeFit {
  DeadtimeModel model;
  double residual = 0.0;
  double tau_max = 0.0;  // search range upper end (tau * max V = 0.5)
  std::vector<double> weights;
};

DeadtimeFit fit_deadtime(const BeamCombinationDataset& data, const CalibrationOptions& opt = {});

// Synthetic beam-combination data: the two beams ramp linearly from
// 1/M to 1 of their maxima over M records, on top of a constant background.

struct PolynomialRamp {
  int records = 2000;
  double beam1_max = 4.0;
  double beam2_max = 4.0;
  double background = 0.01;
  double noise = 1e-4;  // additive Gaussian reading noise
};

BeamCombinationDataset synthesize_polynomial_dataset(const PolynomialTransfer& truth,
                                                     const PolynomialRamp& ramp, std::uint64_t seed);

struct CountingRamp {
  int records = 2000;
  double beam1_max = 1e6;  // true counts/s
  double beam2_max = 1e6;
  double dark_rate = 150.0;
  double integration_time = 0.1;  // s; 0 disables Poisson sampling
};

BeamCombinationDataset synthesize_deadtime_dataset(double tau, const CountingRamp& ramp,
                                                   std::uint64_t seed);

}  // namespace sorkin

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sorkin::stats {

struct SeriesSummary {
  double mean = 0.0;
  double std = 0.0;  // sample std, n - 1
  double sem = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  std::size_t count = 0;
  std::size_t n_removed_outliers = 0;
};

double mean(std::span<const double> x);
double sample_std(std::span<const double> x);

/// Two-sided Grubbs critical value for n points at significance alpha.
double grubbs_critical(std::size_t n, double alpha);

struct GrubbsResult {
  std::vector<double> filtered;
  std::vector<std::size_t> removed;  // indices into the input, in removal order
};

/// Iterative two-sided Grubbs test.
GrubbsResult grubbs_filter(std::span<const double> series, double alpha = 0.01);

struct Autocorrelation {
  std::vector<double> r;  // lags 0..max_lag
  double band = 0.0;      // 1.96 / sqrt(M)
  double fraction_in_band() const;  // over lags 1..max_lag
};

/// Un-centered: R(k) = sum_i x_i x_{i+k} / sum_i x_i^2.
Autocorrelation autocorrelation(std::span<const double> series, std::size_t max_lag);

/// Pearson correlation across equal-length series. Symmetric, unit diagonal.
/// A zero-variance series raises UndefinedCorrelationError naming its index.
Eigen::MatrixXd crosscorrelation(const std::vector<std::vector<double>>& series);

SeriesSummary summarize(std::span<const double> series);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins over [min, max]; the last bin is closed.
std::vector<HistogramBin> histogram(std::span<const double> series, std::size_t bins = 50);

/// Jarque-Bera normality test p-value (chi^2 with 2 dof).
double jarque_bera_pvalue(const SeriesSummary& s);

}  // namespace sorkin::stats

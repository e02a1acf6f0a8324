#include "sorkin/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "sorkin/error.hpp"

namespace sorkin::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw ParameterError("mean of empty series");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_std(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mu = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double grubbs_critical(std::size_t n, double alpha) {
  if (n < 3) throw ParameterError("Grubbs test needs at least 3 points");
  const double nd = static_cast<double>(n);
  boost::math::students_t dist(nd - 2.0);
  const double t = boost::math::quantile(boost::math::complement(dist, alpha / (2.0 * nd)));
  return (nd - 1.0) / std::sqrt(nd) * std::sqrt(t * t / (nd - 2.0 + t * t));
}

GrubbsResult grubbs_filter(std::span<const double> series, double alpha) {
  if (series.size() < 3) throw ParameterError("Grubbs test needs at least 3 points");
  std::vector<std::size_t> idx(series.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  GrubbsResult out;
  // running sums so each pass is O(n)
  double s1 = 0.0;
  for (double v : series) s1 += v;
  while (idx.size() >= 3) {
    const double n = static_cast<double>(idx.size());
    const double mu = s1 / n;
    double ss = 0.0;
    std::size_t worst = 0;
    double worst_dev = -1.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double d = series[idx[i]] - mu;
      ss += d * d;
      if (std::abs(d) > worst_dev) {
        worst_dev = std::abs(d);
        worst = i;
      }
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0)) break;
    if (worst_dev / sd <= grubbs_critical(idx.size(), alpha)) break;
    out.removed.push_back(idx[worst]);
    s1 -= series[idx[worst]];
    idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  out.filtered.reserve(idx.size());
  for (std::size_t i : idx) out.filtered.push_back(series[i]);
  return out;
}

double Autocorrelation::fraction_in_band() const {
  if (r.size() < 2) return 1.0;
  std::size_t in = 0;
  for (std::size_t k = 1; k < r.size(); ++k)
    if (std::abs(r[k]) <= band) ++in;
  return static_cast<double>(in) / static_cast<double>(r.size() - 1);
}

Autocorrelation autocorrelation(std::span<const double> series, std::size_t max_lag) {
  const std::size_t m = series.size();
  if (2 * max_lag >= m) throw ParameterError("max_lag must be below half the series length");
  Autocorrelation out;
  out.band = 1.96 / std::sqrt(static_cast<double>(m));
  out.r.assign(max_lag + 1, 0.0);
  double norm = 0.0;
  for (double v : series) norm += v * v;
  if (norm == 0.0) {
    out.r[0] = 1.0;
    return out;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k <= static_cast<std::ptrdiff_t>(max_lag); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i + static_cast<std::size_t>(k) < m; ++i)
      s += series[i] * series[i + static_cast<std::size_t>(k)];
    out.r[static_cast<std::size_t>(k)] = s / norm;
  }
  return out;
}

Eigen::MatrixXd crosscorrelation(const std::vector<std::vector<double>>& series) {
  const auto n = static_cast<Eigen::Index>(series.size());
  if (n < 2) throw ParameterError("cross-correlation needs at least 2 series");
  const std::size_t m = series.front().size();
  if (m < 2) throw ParameterError("cross-correlation needs at least 2 samples");
  for (const auto& s : series)
    if (s.size() != m) throw ParameterError("cross-correlation series differ in length");

  Eigen::MatrixXd z(static_cast<Eigen::Index>(m), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& s = series[static_cast<std::size_t>(j)];
    const double mu = mean(s);
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      z(static_cast<Eigen::Index>(i), j) = s[i] - mu;
      ss += (s[i] - mu) * (s[i] - mu);
    }
    if (!(ss > 0.0))
      throw UndefinedCorrelationError("series " + std::to_string(j) + " has zero variance",
                                      static_cast<std::size_t>(j));
    z.col(j) /= std::sqrt(ss);
  }
  const Eigen::MatrixXd g = z.transpose() * z;
  Eigen::MatrixXd r = 0.5 * (g + g.transpose());
  r.diagonal().setOnes();
  return r;
}

SeriesSummary summarize(std::span<const double> series) {
  if (series.empty()) throw ParameterError("summary of empty series");
  SeriesSummary s;
  s.count = series.size();
  const double n = static_cast<double>(s.count);
  s.mean = mean(series);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : series) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.std = s.count > 1 ? std::sqrt(m2 * n / (n - 1.0)) : 0.0;
  s.sem = s.std / std::sqrt(n);
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

std::vector<HistogramBin> histogram(std::span<const double> series, std::size_t bins) {
  if (series.empty()) throw ParameterError("histogram of empty series");
  if (bins == 0) throw ParameterError("histogram needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    const double pad = lo == 0.0 ? 0.5 : 0.5 * std::abs(lo);
    lo -= pad;
    hi += pad;
  }
  const double w = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + w * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? hi : lo + w * static_cast<double>(b + 1);
  }
  for (double v : series) {
    auto b = static_cast<std::size_t>((v - lo) / w);
    if (b >= bins) b = bins - 1;
    ++out[b].count;
  }
  return out;
}

double jarque_bera_pvalue(const SeriesSummary& s) {
  const double n = static_cast<double>(s.count);
  const double jb = n / 6.0 * (s.skewness * s.skewness + 0.25 * s.excess_kurtosis * s.excess_kurtosis);
  return std::exp(-0.5 * jb);
}

}  // namespace sorkin::stats

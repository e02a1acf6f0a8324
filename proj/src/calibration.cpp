#include "sorkin/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "sorkin/error.hpp"
#include "sorkin/rng.hpp"

namespace sorkin {

std::vector<double> BeamCombinationDataset::channel(int m) const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    switch (m) {
      case 0: out.push_back(r.v0); break;
      case 1: out.push_back(r.v1); break;
      case 2: out.push_back(r.v2); break;
      case 3: out.push_back(r.v3); break;
      default: throw ParameterError("channel index must be 0..3");
    }
  }
  return out;
}

std::array<double, 2> BeamCombinationDataset::reading_span() const {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : records)
    for (double v : {r.v0, r.v1, r.v2, r.v3}) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return {lo, hi};
}

std::vector<double> floating_std(std::span<const double> series, int window) {
  const auto n = static_cast<long>(series.size());
  if (window < 3 || window % 2 == 0) throw ParameterError("window must be odd and >= 3");
  if (window > n) throw ParameterError("series shorter than the floating window");
  const long half = window / 2;
  std::vector<double> out(series.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const long lo = std::max(0L, i - half), hi = std::min(n - 1, i + half);
    const double cnt = static_cast<double>(hi - lo + 1);
    double xm = 0.0, ym = 0.0;
    for (long t = lo; t <= hi; ++t) {
      xm += static_cast<double>(t);
      ym += series[t];
    }
    xm /= cnt;
    ym /= cnt;
    double sxx = 0.0, sxy = 0.0;
    for (long t = lo; t <= hi; ++t) {
      const double dx = static_cast<double>(t) - xm;
      sxx += dx * dx;
      sxy += dx * (series[t] - ym);
    }
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (long t = lo; t <= hi; ++t) {
      const double r = series[t] - ym - slope * (static_cast<double>(t) - xm);
      ss += r * r;
    }
    out[i] = std::sqrt(ss / (cnt - 2.0));
  }
  return out;
}

std::vector<double> record_sigmas(const BeamCombinationDataset& data, const CalibrationOptions& opt) {
  const std::size_t m = data.size();
  std::vector<double> var(m, 0.0);
  for (int ch = 0; ch < 4; ++ch) {
    const auto s = floating_std(data.channel(ch), opt.window);
    for (std::size_t k = 0; k < m; ++k) var[k] += s[k] * s[k];
  }
  std::vector<double> sigma(m);
  for (std::size_t k = 0; k < m; ++k) sigma[k] = std::sqrt(var[k]);

  std::vector<double> sorted = sigma;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(m / 2), sorted.end());
  const double median = sorted[m / 2];
  // An all-zero noise estimate (noise-free data) falls back to unit weights.
  const double floor = median > 0.0 ? opt.weight_floor * median : 1.0;
  for (double& s : sigma) s = std::max(s, floor);
  return sigma;
}

double combination_sum(const BeamCombinationRecord& r, int j) {
  return std::pow(r.v0, j) + std::pow(r.v3, j) - std::pow(r.v1, j) - std::pow(r.v2, j);
}

double normalized_residual(double residual, std::size_t records, int window, int degree) {
  const double dof = static_cast<double>(records) - (window - 1) - degree + 1;
  if (dof <= 0.0) throw ParameterError("no degrees of freedom left for X(n)");
  return residual / dof;
}

namespace {

struct WlsSolution {
  Eigen::VectorXd a;
  Eigen::MatrixXd cov;
  double residual = 0.0;
  double condition = 1.0;
};

WlsSolution solve_wls(const BeamCombinationDataset& data, int degree, std::span<const double> sigmas) {
  const auto m = static_cast<Eigen::Index>(data.size());
  const Eigen::Index p = degree - 1;
  Eigen::VectorXd b(m);
  for (Eigen::Index k = 0; k < m; ++k) b(k) = -combination_sum(data.records[k], 1) / sigmas[k];
  WlsSolution sol;
  if (p == 0) {
    sol.residual = b.squaredNorm();
    return sol;
  }
  Eigen::MatrixXd a(m, p);
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index j = 0; j < p; ++j)
      a(k, j) = combination_sum(data.records[k], static_cast<int>(j) + 2) / sigmas[k];

  // Columns span many decades (S_j ~ V^j); equilibrate before the QR.
  Eigen::VectorXd scale = a.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < p; ++j)
    if (scale(j) == 0.0) throw SingularFitError("design column " + std::to_string(j + 2) + " vanishes",
                                                std::numeric_limits<double>::infinity());
  const Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(as);
  const auto sv = svd.singularValues();
  sol.condition = sv(0) / sv(sv.size() - 1);
  if (!std::isfinite(sol.condition) || sol.condition > 1e12)
    throw SingularFitError("rank-deficient normal equations", sol.condition);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(as);
  const Eigen::VectorXd ys = qr.solve(b);
  sol.a = ys.cwiseQuotient(scale);

  const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd rinv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd cov_scaled = rinv * rinv.transpose();
  sol.cov = scale.cwiseInverse().asDiagonal() * cov_scaled * scale.cwiseInverse().asDiagonal();
  sol.cov = 0.5 * (sol.cov + sol.cov.transpose()).eval();
  sol.residual = (a * sol.a - b).squaredNorm();
  return sol;
}

}  // namespace

PolynomialFit fit_polynomial_weighted(const BeamCombinationDataset& data, int degree,
                                      std::span<const double> sigmas, int window) {
  if (degree < 2) throw ParameterError("polynomial degree must be >= 2");
  if (sigmas.size() != data.size()) throw ParameterError("one sigma per record required");
  for (double s : sigmas)
    if (!(s > 0.0)) throw ParameterError("record sigmas must be positive");
  if (static_cast<long>(data.size()) - (window - 1) <= degree)
    throw ParameterError("too few records for the requested degree");

  const auto sol = solve_wls(data, degree, sigmas);
  PolynomialFit fit;
  fit.transfer.coefficients.assign(sol.a.data(), sol.a.data() + sol.a.size());
  fit.transfer.covariance = sol.cov;
  // f(0) = 0 holds exactly (a_0 = 0), so the domain always reaches down to zero.
  const auto span = data.reading_span();
  fit.transfer.domain = {std::min(0.0, span[0]), span[1]};
  fit.diagnostics.residual = sol.residual;
  fit.diagnostics.x_table = {{degree, normalized_residual(sol.residual, data.size(), window, degree)}};
  fit.diagnostics.chosen_degree = degree;
  fit.diagnostics.weights.assign(sigmas.begin(), sigmas.end());
  fit.diagnostics.condition_number = sol.condition;
  return fit;
}

PolynomialFit fit_polynomial_nl(const BeamCombinationDataset& data, int degree,
                                const CalibrationOptions& opt) {
  const auto sigmas = record_sigmas(data, opt);
  return fit_polynomial_weighted(data, degree, sigmas, opt.window);
}

int choose_order(std::span<const double> x_by_degree, double theta) {
  if (x_by_degree.empty()) throw ParameterError("empty X(n) table");
  for (std::size_t i = 0; i + 1 < x_by_degree.size(); ++i)
    if (x_by_degree[i + 1] / x_by_degree[i] > 1.0 - theta) return static_cast<int>(i) + 1;
  return static_cast<int>(x_by_degree.size());
}

OrderSelection select_order(const BeamCombinationDataset& data, const CalibrationOptions& opt) {
  if (opt.n_max < 2) throw ParameterError("n_max must be >= 2");
  const auto sigmas = record_sigmas(data, opt);
  OrderSelection sel;
  std::vector<double> xs;
  for (int n = 1; n <= opt.n_max; ++n) {
    const double r = solve_wls(data, n, sigmas).residual;
    const double x = normalized_residual(r, data.size(), opt.window, n);
    xs.push_back(x);
    sel.x_table.emplace_back(n, x);
  }
  sel.chosen_degree = choose_order(xs, opt.theta);
  sel.significant = sel.chosen_degree >= 2;
  return sel;
}

double deadtime_additivity(double tau, const BeamCombinationRecord& r) {
  const double t2 = tau * tau;
  return (r.v0 + r.v3 - 2.0 * tau * r.v0 * r.v3) / (1.0 - t2 * r.v0 * r.v3) -
         (r.v1 + r.v2 - 2.0 * tau * r.v1 * r.v2) / (1.0 - t2 * r.v1 * r.v2);
}

double deadtime_objective(double tau, const BeamCombinationDataset& data,
                          std::span<const double> sigmas) {
  double r = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const double f = deadtime_additivity(tau, data.records[k]) / sigmas[k];
    r += f * f;
  }
  return r;
}

DeadtimeFit fit_deadtime(const BeamCombinationDataset& data, const CalibrationOptions& opt) {
  if (data.size() < 3) throw ParameterError("deadtime fit needs at least 3 records");
  const auto sigmas = record_sigmas(data, opt);
  const double vmax = data.reading_span()[1];
  if (!(vmax > 0.0)) throw FitFailureError("count rates must be positive");
  const double tau_max = 0.5 / vmax;
  auto objective = [&](double tau) { return deadtime_objective(tau, data, sigmas); };

  constexpr int kGrid = 400;
  int best = 0;
  double best_r = objective(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double r = objective(tau_max * i / kGrid);
    if (r < best_r) {
      best_r = r;
      best = i;
    }
  }
  if (best == kGrid) throw FitFailureError("no interior minimum of R(tau) below tau*V = 0.5");

  // Golden-section refinement inside the bracketing grid cells.
  double lo = tau_max * std::max(0, best - 1) / kGrid;
  double hi = tau_max * (best + 1) / kGrid;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * tau_max; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = objective(x2);
    }
  }
  double tau = 0.5 * (lo + hi);
  if (objective(0.0) <= objective(tau)) tau = 0.0;

  // Curvature: delta R = 1 at one sigma, so sigma^2 = 2 / R''.
  const double h = 1e-3 * tau_max;
  const double t0 = std::max(tau, h);
  const double curv = (objective(t0 + h) - 2.0 * objective(t0) + objective(t0 - h)) / (h * h);
  if (!(curv > 0.0)) throw FitFailureError("R(tau) has no positive curvature at the minimum");

  DeadtimeFit fit;
  fit.model.tau = tau;
  fit.model.sigma_tau = std::sqrt(2.0 / curv);
  double dark = 0.0;
  for (const auto& r : data.records) dark += r.v0;
  fit.model.dark_rate = dark / static_cast<double>(data.size());
  fit.residual = objective(tau);
  fit.tau_max = tau_max;
  fit.weights = sigmas;
  return fit;
}

BeamCombinationDataset synthesize_polynomial_dataset(const PolynomialTransfer& truth,
                                                     const PolynomialRamp& ramp, std::uint64_t seed) {
  if (ramp.records < 2) throw ParameterError("ramp needs at least 2 records");
  auto eng = rng::make_engine(seed, rng::Stream::fixture, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  BeamCombinationDataset data;
  data.records.reserve(static_cast<std::size_t>(ramp.records));
  for (int k = 0; k < ramp.records; ++k) {
    const double frac = static_cast<double>(k + 1) / ramp.records;
    const double q1 = ramp.beam1_max * frac, q2 = ramp.beam2_max * frac;
    const double p[4] = {ramp.background, ramp.background + q1, ramp.background + q2,
                         ramp.background + q1 + q2};
    double v[4];
    for (int m = 0; m < 4; ++m) v[m] = reading_from_power_exact(truth, p[m]) + ramp.noise * gauss(eng);
    data.records.push_back({v[0], v[1], v[2], v[3]});
  }
  return data;
}

BeamCombinationDataset synthesize_deadtime_dataset(double tau, const CountingRamp& ramp,
                                                   std::uint64_t seed) {
  if (ramp.records < 2) throw ParameterError("ramp needs at least 2 records");
  auto eng = rng::make_engine(seed, rng::Stream::fixture, 1);
  const DeadtimeModel det{tau, 0.0, 0.0};
  BeamCombinationDataset data;
  data.records.reserve(static_cast<std::size_t>(ramp.records));
  for (int k = 0; k < ramp.records; ++k) {
    const double frac = static_cast<double>(k + 1) / ramp.records;
    const double q1 = ramp.beam1_max * frac, q2 = ramp.beam2_max * frac;
    const double p[4] = {ramp.dark_rate, ramp.dark_rate + q1, ramp.dark_rate + q2,
                         ramp.dark_rate + q1 + q2};
    double v[4];
    for (int m = 0; m < 4; ++m) {
      const double mean = measured_rate_deadtime(det, p[m]);
      if (ramp.integration_time > 0.0) {
        std::poisson_distribution<long long> pois(mean * ramp.integration_time);
        v[m] = static_cast<double>(pois(eng)) / ramp.integration_time;
      } else {
        v[m] = mean;
      }
    }
    data.records.push_back({v[0], v[1], v[2], v[3]});
  }
  return data;
}

}  // namespace sorkin

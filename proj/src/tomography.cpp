#include "sorkin/tomography.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "sorkin/error.hpp"
#include "sorkin/kernels.hpp"

namespace sorkin {

namespace {

double rate_scale(const TomographyDataset& d) {
  double s = 0.0;
  for (double p : d.single_path) s = std::max(s, std::abs(p));
  return s;
}

}  // namespace

Reconstruction reconstruct_density(const TomographyDataset& data) {
  const int n = data.n_paths;
  if (n < 1) throw InputError("tomography dataset has no paths");
  if (static_cast<int>(data.single_path.size()) != n)
    throw InputError("need one single-path rate per path");

  Reconstruction out;
  std::vector<double> q(static_cast<std::size_t>(n));
  double flux = 0.0;
  for (int k = 0; k < n; ++k) {
    q[k] = data.single_path[k] - data.background;
    if (q[k] < 0.0) throw InputError("background-corrected single-path rate is negative");
    flux += q[k];
  }
  if (!(flux > 0.0)) throw InputError("total single-path flux is zero");
  out.flux = flux;

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) rho(k, k) = q[k] / flux;

  const double tol = 1e-9 * std::max(1.0, rate_scale(data));
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l) {
      auto it = data.two_path_scans.find({k, l});
      if (it == data.two_path_scans.end())
        throw UnderdeterminedError("missing phase scan for pair " + std::to_string(k) + "," +
                                   std::to_string(l));
      const auto& scan = it->second;
      std::set<double> distinct;
      for (const auto& pt : scan) distinct.insert(std::remainder(pt.phase, 2.0 * std::numbers::pi));
      if (distinct.size() < 2)
        throw UnderdeterminedError("pair scan needs at least 2 distinct phase settings");

      const double c_expected = data.background + q[k] + q[l];
      const bool fit_offset = distinct.size() >= 3;
      const auto rows = static_cast<Eigen::Index>(scan.size());
      const Eigen::Index cols = fit_offset ? 3 : 2;
      Eigen::MatrixXd a(rows, cols);
      Eigen::VectorXd y(rows);
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double ph = scan[i].phase;
        Eigen::Index c = 0;
        if (fit_offset) a(i, c++) = 1.0;
        a(i, c++) = std::cos(ph);
        a(i, c) = std::sin(ph);
        y(i) = scan[i].rate - (fit_offset ? 0.0 : c_expected);
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
      qr.setThreshold(1e-10);
      if (qr.rank() < cols)
        throw UnderdeterminedError("phase settings do not determine the interference term");
      const Eigen::VectorXd sol = qr.solve(y);
      const double alpha = sol(cols - 2), beta = sol(cols - 1);
      if (fit_offset) {
        const double c_fit = sol(0);
        if (std::abs(c_fit - c_expected) > 0.05 * std::abs(c_expected) + tol)
          out.warnings.push_back("pair " + std::to_string(k) + "," + std::to_string(l) +
                                 ": fitted offset deviates from single-path sum by more than 5%");
      }
      const std::complex<double> z(alpha / (2.0 * flux), -beta / (2.0 * flux));
      rho(k, l) = z;
      rho(l, k) = std::conj(z);
    }

  out.rho = DensityMatrix(std::move(rho));
  out.min_eigenvalue = out.rho.min_eigenvalue();
  if (out.min_eigenvalue < -DensityMatrix::kNegativityTol)
    out.warnings.push_back("reconstructed state has negative eigenvalue " +
                           std::to_string(out.min_eigenvalue) + " (not repaired)");
  return out;
}

std::vector<double> default_phase_scan() {
  const double pi = std::numbers::pi;
  return {0.0, pi / 2.0, pi, 3.0 * pi / 2.0};
}

TomographyDataset synthesize_tomography(const DensityMatrix& rho, double flux, double background,
                                        std::span<const double> phases) {
  const int n = rho.dim();
  TomographyDataset d;
  d.n_paths = n;
  d.background = background;
  d.input_flux = flux;
  for (int k = 0; k < n; ++k) d.single_path.push_back(background + flux * rho(k, k).real());
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l) {
      auto& scan = d.two_path_scans[{k, l}];
      for (double ph : phases) {
        const double cross = (rho(k, l) * std::polar(1.0, ph)).real();
        scan.push_back({ph, background + flux * (rho(k, k).real() + rho(l, l).real() + 2.0 * cross)});
      }
    }
  return d;
}

RateTuple predict_rates(const DensityMatrix& rho, double flux, std::span<const double> transmissions,
                        double background) {
  const int n = rho.dim();
  if (!transmissions.empty() && static_cast<int>(transmissions.size()) != n)
    throw ParameterError("need one transmission per path");
  const auto& m = rho.matrix();
  RateTuple r(n);
  for (std::uint32_t mask = 0; mask < r.size(); ++mask) {
    const auto paths = PathSubset(mask).paths();
    double sum = 0.0;
    for (int k : paths)
      for (int l : paths) {
        const double tk = transmissions.empty() ? 1.0 : transmissions[k];
        const double tl = transmissions.empty() ? 1.0 : transmissions[l];
        sum += std::sqrt(tk * tl) * m(k, l).real();
      }
    r.set(PathSubset(mask), background + flux * sum);
  }
  return r;
}

const OrderPrediction& KappaPrediction::order(int j) const {
  for (const auto& o : orders)
    if (o.order == j) return o;
  throw ParameterError("no prediction for order " + std::to_string(j));
}

namespace {

struct Distorted {
  RateTuple readings;
  std::vector<double> sigma;  // per mask
};

// Per-subset kappa and order means from one distorted reading tuple.
std::vector<double> subset_kappas(const RateTuple& r, std::span<const PathSubset> subsets, bool bg) {
  std::vector<double> out;
  out.reserve(subsets.size());
  for (PathSubset s : subsets) {
    const double d = delta(r, s, bg);
    if (d == 0.0) throw UndefinedNormalizationError("delta vanishes for subset " + s.label());
    out.push_back(epsilon(r, s) / d);
  }
  return out;
}

double stddev_of(const Eigen::VectorXd& v) {
  const double mu = v.mean();
  return std::sqrt((v.array() - mu).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

KappaPrediction kappa_th(const RateTuple& predicted, const DetectorModel& detector,
                         const KappaThOptions& opt) {
  const int n = predicted.n_paths();
  std::vector<int> orders = opt.orders;
  if (orders.empty())
    for (int j = 3; j <= n; ++j) orders.push_back(j);

  std::vector<PathSubset> subsets;
  std::vector<std::pair<int, std::size_t>> order_range;  // (first index, count) per order
  for (int j : orders) {
    const auto list = enumerate_order_subsets(PathSubset::full(n), j);
    order_range.emplace_back(static_cast<int>(subsets.size()), list.size());
    subsets.insert(subsets.end(), list.begin(), list.end());
  }

  KappaPrediction pred;
  pred.detector = detector_kind(detector);
  const bool bg = opt.background_in_pairwise;

  auto apply = [&](double tau_shift, double sigma_shift, const PolynomialTransfer* t,
                   const DeadtimeModel* dt) {
    RateTuple r(n);
    for (std::uint32_t m = 0; m < r.size(); ++m) {
      const double p = predicted[m];
      double v = p;
      if (t) v = reading_from_power(*t, p) + sigma_shift * transfer_sigma(*t, p);
      if (dt) {
        DeadtimeModel shifted = *dt;
        shifted.tau = std::max(0.0, dt->tau + tau_shift);
        v = measured_rate_deadtime(shifted, p);
      }
      r.set(PathSubset(m), v);
    }
    return r;
  };

  const auto* poly = std::get_if<PolynomialTransfer>(&detector);
  const auto* dead = std::get_if<DeadtimeModel>(&detector);
  if (std::holds_alternative<HeraldedDetector>(detector))
    throw ParameterError("heralded data are corrected record by record; no kappa_th prediction");

  const auto central = subset_kappas(apply(0.0, 0.0, poly, dead), subsets, bg);
  std::vector<double> plus(subsets.size(), 0.0), minus(subsets.size(), 0.0);
  Eigen::MatrixXd trials;
  if (poly) {
    plus = subset_kappas(apply(0.0, +1.0, poly, nullptr), subsets, bg);
    minus = subset_kappas(apply(0.0, -1.0, poly, nullptr), subsets, bg);
    if (opt.n_mc < 2) throw ParameterError("n_mc must be >= 2");
    RateTuple base = apply(0.0, 0.0, poly, nullptr);
    std::vector<double> sigma(base.size());
    for (std::uint32_t m = 0; m < base.size(); ++m) sigma[m] = transfer_sigma(*poly, predicted[m]);
    // 2 n_mc trials; the first n_mc give the reported sigma, all of them the convergence check.
    trials = kernels::omp::kappa_trials(base, sigma, subsets, 2 * opt.n_mc, opt.seed, bg);
    pred.n_mc = opt.n_mc;
  } else if (dead) {
    plus = subset_kappas(apply(+dead->sigma_tau, 0.0, nullptr, dead), subsets, bg);
    minus = subset_kappas(apply(-dead->sigma_tau, 0.0, nullptr, dead), subsets, bg);
    pred.scenario = "tau_band";
  }

  for (std::size_t oi = 0; oi < orders.size(); ++oi) {
    OrderPrediction op;
    op.order = orders[oi];
    const auto [first, count] = order_range[oi];
    Eigen::VectorXd order_mean_trials;
    if (trials.size() > 0) order_mean_trials = Eigen::VectorXd::Zero(opt.n_mc);
    double sum_c = 0.0, sum_p = 0.0, sum_m = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t s = static_cast<std::size_t>(first) + i;
      SubsetPrediction sp;
      sp.subset = subsets[s];
      sp.kappa_th = central[s];
      sp.sigma_max_correlated = 0.5 * std::abs(plus[s] - minus[s]);
      if (trials.size() > 0) {
        const Eigen::VectorXd col = trials.col(static_cast<Eigen::Index>(s)).head(opt.n_mc);
        sp.sigma_uncorrelated = stddev_of(col);
        order_mean_trials += col;
      } else {
        sp.sigma_uncorrelated = sp.sigma_max_correlated;
      }
      sum_c += central[s];
      sum_p += plus[s];
      sum_m += minus[s];
      op.subsets.push_back(sp);
    }
    const double cnt = static_cast<double>(count);
    op.kappa_th = sum_c / cnt;
    op.sigma_max_correlated = 0.5 * std::abs(sum_p - sum_m) / cnt;
    if (trials.size() > 0) {
      op.sigma_uncorrelated = stddev_of(order_mean_trials / cnt);
      if (op.order == orders.front()) {
        Eigen::VectorXd all = Eigen::VectorXd::Zero(2 * opt.n_mc);
        for (std::size_t i = 0; i < count; ++i)
          all += trials.col(static_cast<Eigen::Index>(first + static_cast<int>(i)));
        pred.convergence_ratio = stddev_of(all / cnt) / op.sigma_uncorrelated;
      }
    } else {
      op.sigma_uncorrelated = op.sigma_max_correlated;
    }
    pred.orders.push_back(std::move(op));
  }
  return pred;
}

KappaPrediction kappa_th(const DensityMatrix& rho, double flux, std::span<const double> transmissions,
                         double background, const DetectorModel& detector, const KappaThOptions& opt) {
  return kappa_th(predict_rates(rho, flux, transmissions, background), detector, opt);
}

ValueSem corrected_kappa(ValueSem measured, ValueSem predicted) {
  return {measured.value - predicted.value, std::hypot(measured.sem, predicted.sem)};
}

ValueSem combine_path_subsets(std::span<const ValueSem> per_subset, const Eigen::MatrixXd& cross_corr) {
  const auto n = static_cast<Eigen::Index>(per_subset.size());
  if (n == 0) throw ParameterError("nothing to combine");
  if (cross_corr.rows() != n || cross_corr.cols() != n)
    throw ParameterError("correlation matrix dimension differs from subset count");
  if ((cross_corr - cross_corr.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw ParameterError("correlation matrix is not symmetric");
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(cross_corr(i, i) - 1.0) > 1e-8)
      throw ParameterError("correlation matrix needs a unit diagonal");
  Eigen::VectorXd s(n);
  double mean = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    mean += per_subset[i].value;
    s(i) = per_subset[i].sem;
  }
  const double q = s.dot(cross_corr * s);
  return {mean / static_cast<double>(n), std::sqrt(std::max(q, 0.0)) / static_cast<double>(n)};
}

}  // namespace sorkin

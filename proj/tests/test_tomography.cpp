#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "sorkin/error.hpp"
#include "sorkin/fixtures.hpp"
#include "sorkin/tomography.hpp"

using namespace sorkin;
using cd = std::complex<double>;

namespace {

// Frozen regression values (n_mc = 10000, seed 1).
constexpr double kFrozenC3 = 9.661892157525346e-05;
constexpr double kFrozenC3Sigma = 1.1129314927367704e-05;
constexpr double kFrozenC4 = -1.6394557238943108e-05;
constexpr double kFrozenC5 = -3.9552687063426955e-05;
constexpr double kFrozenSC3 = -0.0010713088128516638;
constexpr double kFrozenSC3Sigma = 9.46749872722183e-06;
constexpr double kFrozenSC4 = -0.00032956633760598326;
constexpr double kFrozenSC5 = 2.5782754225826066e-06;

DensityMatrix random_state(int n, std::mt19937_64& eng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cd(g(eng), g(eng));
  Eigen::MatrixXcd m = a * a.adjoint();
  m /= m.trace().real();
  return DensityMatrix(m);
}

// <u|rho|u> with u_k = sqrt(T_k) on the open paths.
double quadratic_form(const DensityMatrix& rho, std::uint32_t mask, std::span<const double> t) {
  cd s = 0.0;
  for (int k = 0; k < rho.dim(); ++k)
    for (int l = 0; l < rho.dim(); ++l)
      if (((mask >> k) & 1u) && ((mask >> l) & 1u)) s += std::sqrt(t[k] * t[l]) * rho(k, l);
  return s.real();
}

}  // namespace

TEST_CASE("reconstruct_density: pure balanced state round trip") {
  const std::vector<cd> amp(5, cd(1.0 / std::sqrt(5.0), 0.0));
  const auto rho = DensityMatrix::pure(amp);
  const auto rec = reconstruct_density(synthesize_tomography(rho, 3.0, 0.0, default_phase_scan()));
  CHECK(frobenius_distance(rec.rho, rho) < 1e-10);
  CHECK(rec.flux == doctest::Approx(3.0));
  CHECK(purity(rec.rho) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("reconstruct_density: random states round trip with background") {
  std::mt19937_64 eng(5);
  for (int n : {2, 3, 5, 6}) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto rho = random_state(n, eng);
      const auto data = synthesize_tomography(rho, 7.5, 0.2, default_phase_scan());
      const auto rec = reconstruct_density(data);
      CHECK(frobenius_distance(rec.rho, rho) < 1e-10);
      CHECK(rec.warnings.empty());
      // forward -> reconstruct -> forward is the identity
      const auto a = predict_rates(rho, 7.5, {}, 0.2);
      const auto b = predict_rates(rec.rho, rec.flux, {}, 0.2);
      for (std::uint32_t m = 0; m < a.size(); ++m)
        CHECK(std::abs(a[m] - b[m]) <= 1e-9 * std::max(1.0, std::abs(a[m])));
    }
  }
}

TEST_CASE("reconstruct_density: two phase settings suffice, one does not") {
  std::mt19937_64 eng(6);
  const auto rho = random_state(4, eng);
  const std::vector<double> two{0.0, M_PI / 2};
  CHECK(frobenius_distance(reconstruct_density(synthesize_tomography(rho, 1.0, 0.0, two)).rho, rho) < 1e-10);
  const std::vector<double> one{0.3};
  CHECK_THROWS_AS(reconstruct_density(synthesize_tomography(rho, 1.0, 0.0, one)), UnderdeterminedError);
  const std::vector<double> same{0.3, 0.3, 0.3};
  CHECK_THROWS_AS(reconstruct_density(synthesize_tomography(rho, 1.0, 0.0, same)), UnderdeterminedError);
}

TEST_CASE("reconstruct_density: inconsistent offset raises a warning") {
  const auto rho = fixtures::five_path_state();
  auto data = synthesize_tomography(rho, 2.0, 0.0, default_phase_scan());
  for (auto& pt : data.two_path_scans.at({0, 1})) pt.rate += 0.2;
  const auto rec = reconstruct_density(data);
  CHECK_FALSE(rec.warnings.empty());
}

TEST_CASE("purity of reference states") {
  const std::vector<cd> amp{cd(0.6, 0.0), cd(0.0, 0.8)};
  CHECK(purity(DensityMatrix::pure(amp)) == doctest::Approx(1.0));
  CHECK(purity(DensityMatrix::maximally_mixed(5)) == doctest::Approx(0.2));
  CHECK(purity(fixtures::five_path_state()) == doctest::Approx(0.74).epsilon(1e-12));
  const auto rec = reconstruct_density(
      synthesize_tomography(fixtures::five_path_state(), 2.25, 0.01, default_phase_scan()));
  CHECK(purity(rec.rho) == doctest::Approx(0.74).epsilon(1e-9));
}

TEST_CASE("predict_rates: Born-rule null and quadratic-form oracle") {
  std::mt19937_64 eng(8);
  std::uniform_real_distribution<double> u(0.3, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    const auto rho = random_state(5, eng);
    std::vector<double> t(5);
    for (double& x : t) x = u(eng);
    const double flux = 4.0, bg = 0.05;
    const auto r = predict_rates(rho, flux, t, bg);
    for (std::uint32_t m = 0; m < r.size(); ++m)
      CHECK(r[m] == doctest::Approx(bg + flux * quadratic_form(rho, m, t)).epsilon(1e-12));
    for (int j = 3; j <= 5; ++j)
      for (auto s : enumerate_order_subsets(PathSubset::full(5), j))
        CHECK(std::abs(epsilon(r, s)) <= 1e-12 * r.max_abs() * 32.0);
  }
}

TEST_CASE("predict_rates: pure balanced state and maximally mixed state") {
  const std::vector<cd> amp(5, cd(1.0 / std::sqrt(5.0), 0.0));
  const auto r = predict_rates(DensityMatrix::pure(amp), 5.0, {}, 0.0);
  // (sum of N amplitudes)^2 with |a|^2 = p/N per path: N^2 (p/N) = N p
  CHECK(r[0b11111] == doctest::Approx(25.0));
  CHECK(r[0b00001] == doctest::Approx(1.0));
  const auto mixed = predict_rates(DensityMatrix::maximally_mixed(5), 5.0, {}, 0.3);
  for (int k = 0; k < 5; ++k)
    for (int l = k + 1; l < 5; ++l) CHECK(std::abs(pairwise_interference(mixed, k, l)) < 1e-12);
}

TEST_CASE("kappa_th: ideal detector gives zero") {
  const auto pred = kappa_th(fixtures::five_path_state(), 2.25, {}, 0.0, IdealDetector{});
  REQUIRE(pred.orders.size() == 3);
  for (const auto& o : pred.orders) {
    CHECK(std::abs(o.kappa_th) < 1e-12);
    CHECK(o.sigma_uncorrelated == 0.0);
  }
}

TEST_CASE("kappa_th: classical photoreceiver regression") {
  KappaThOptions opt;
  opt.n_mc = 10000;
  const auto pred = kappa_th(fixtures::five_path_state(), fixtures::kClassicalFlux, {}, 0.0,
                             fixtures::photoreceiver_transfer(), opt);
  CHECK(pred.detector == "polynomial");
  CHECK(pred.n_mc == 10000);
  CHECK(pred.scenario == "uncorrelated");
  CHECK(std::abs(pred.convergence_ratio - 1.0) < 0.03);
  const auto& k3 = pred.order(3);
  CHECK(k3.subsets.size() == 10);
  CHECK(k3.kappa_th == doctest::Approx(kFrozenC3).epsilon(1e-9));
  CHECK(k3.sigma_uncorrelated == doctest::Approx(kFrozenC3Sigma).epsilon(1e-9));
  CHECK(pred.order(4).kappa_th == doctest::Approx(kFrozenC4).epsilon(1e-9));
  CHECK(pred.order(5).kappa_th == doctest::Approx(kFrozenC5).epsilon(1e-9));
  // order of magnitude of the published photoreceiver prediction
  CHECK(k3.kappa_th > 1e-5);
  CHECK(k3.kappa_th < 1e-3);
  for (const auto& o : pred.orders) {
    CHECK(o.sigma_uncorrelated >= o.sigma_max_correlated);
    for (const auto& s : o.subsets) CHECK(s.sigma_uncorrelated >= s.sigma_max_correlated);
  }
}

TEST_CASE("kappa_th: deadtime regression") {
  const auto pred = kappa_th(fixtures::five_path_state(), fixtures::kSemiclassicalFlux, {}, 0.0,
                             fixtures::counting_deadtime());
  CHECK(pred.scenario == "tau_band");
  const auto& k3 = pred.order(3);
  CHECK(k3.kappa_th < 0.0);
  CHECK(std::abs(k3.kappa_th) > 1e-4);
  CHECK(std::abs(k3.kappa_th) < 1e-2);
  CHECK(k3.kappa_th == doctest::Approx(kFrozenSC3).epsilon(1e-9));
  CHECK(k3.sigma_uncorrelated == doctest::Approx(kFrozenSC3Sigma).epsilon(1e-7));
  CHECK(pred.order(4).kappa_th == doctest::Approx(kFrozenSC4).epsilon(1e-9));
  CHECK(pred.order(5).kappa_th == doctest::Approx(kFrozenSC5).epsilon(1e-9));
}

TEST_CASE("kappa_th: argument checks") {
  const auto rho = fixtures::five_path_state();
  CHECK_THROWS_AS(kappa_th(rho, 10.0, {}, 0.0, fixtures::photoreceiver_transfer()), DomainError);
  HeraldedDetector h;
  h.deadtime = fixtures::counting_deadtime();
  CHECK_THROWS_AS(kappa_th(rho, 1e3, {}, 0.0, h), ParameterError);
  KappaThOptions opt;
  opt.n_mc = 1;
  CHECK_THROWS_AS(kappa_th(rho, 2.25, {}, 0.0, fixtures::photoreceiver_transfer(), opt), ParameterError);
}

TEST_CASE("corrected_kappa examples") {
  const auto sc = corrected_kappa({-9.9e-4, 1.8e-4}, {-11.18e-4, 0.10e-4});
  CHECK(sc.value == doctest::Approx(1.28e-4));
  CHECK(std::round(sc.sem * 1e5) == 18.0);
  const auto c = corrected_kappa({9.7e-5, 0.1e-5}, {9.7e-5, 3.1e-5});
  CHECK(c.value == 0.0);
  CHECK(std::round(c.sem * 1e6) == 31.0);
  const auto z = corrected_kappa({1.5, 0.0}, {1.5, 0.0});
  CHECK(z.value == 0.0);
  CHECK(z.sem == 0.0);
}

TEST_CASE("combine_path_subsets") {
  std::vector<ValueSem> v(10);
  for (int i = 0; i < 10; ++i) v[i] = {0.1 * i, 2.0};
  const auto id = combine_path_subsets(v, Eigen::MatrixXd::Identity(10, 10));
  CHECK(id.value == doctest::Approx(0.45));
  CHECK(id.sem == doctest::Approx(2.0 / std::sqrt(10.0)));
  const auto ones = combine_path_subsets(v, Eigen::MatrixXd::Ones(10, 10));
  CHECK(ones.sem == doctest::Approx(2.0));

  std::mt19937_64 eng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(5, 8);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 8; ++j) a(i, j) = g(eng);
  Eigen::MatrixXd cov = a * a.transpose();
  const Eigen::VectorXd d = cov.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd r = d.asDiagonal() * cov * d.asDiagonal();
  std::vector<ValueSem> w(5);
  double q = 0.0;
  for (int i = 0; i < 5; ++i) w[i] = {g(eng), 0.5 + i};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) q += r(i, j) * w[i].sem * w[j].sem;
  CHECK(combine_path_subsets(w, r).sem == doctest::Approx(std::sqrt(q) / 5.0).epsilon(1e-10));

  CHECK_THROWS_AS(combine_path_subsets(w, Eigen::MatrixXd::Identity(4, 4)), ParameterError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(5, 5);
  bad(0, 1) = 0.3;
  CHECK_THROWS_AS(combine_path_subsets(w, bad), ParameterError);
  CHECK_THROWS_AS(combine_path_subsets(w, 2.0 * Eigen::MatrixXd::Identity(5, 5)), ParameterError);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "sorkin/error.hpp"
#include "sorkin/interferometer.hpp"
#include "sorkin/sorkin.hpp"
#include "sorkin/stats.hpp"

using namespace sorkin;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> x(n);
  for (double& v : x) v = g(eng);
  return x;
}

}  // namespace

TEST_CASE("grubbs critical value matches tabulated values") {
  // Two-sided, alpha = 0.05: n = 10 -> 2.290, n = 20 -> 2.709.
  CHECK(stats::grubbs_critical(10, 0.05) == doctest::Approx(2.290).epsilon(1e-3));
  CHECK(stats::grubbs_critical(20, 0.05) == doctest::Approx(2.709).epsilon(1e-3));
  CHECK(stats::grubbs_critical(20, 0.01) > stats::grubbs_critical(20, 0.05));
}

TEST_CASE("grubbs removes an injected 10 sigma spike") {
  int spike_removed = 0;
  std::size_t false_removals = 0, total = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto x = gaussian(200, 100 + trial);
    x[57] = 10.0;
    const auto res = stats::grubbs_filter(x, 0.01);
    spike_removed += std::find(res.removed.begin(), res.removed.end(), 57u) != res.removed.end();
    for (auto i : res.removed) false_removals += i != 57u;
    total += x.size() - 1;
  }
  CHECK(spike_removed == 100);
  CHECK(static_cast<double>(false_removals) / static_cast<double>(total) <= 0.02);
}

TEST_CASE("grubbs: constant series, clean null, idempotence") {
  const std::vector<double> c(40, 3.0);
  CHECK(stats::grubbs_filter(c).removed.empty());
  std::size_t removed = 0;
  for (int t = 0; t < 5; ++t) removed += stats::grubbs_filter(gaussian(5618, 200 + t)).removed.size();
  CHECK(static_cast<double>(removed) / (5.0 * 5618.0) <= 0.02);

  auto x = gaussian(500, 7);
  x[3] = 12.0;
  x[100] = -9.0;
  const auto once = stats::grubbs_filter(x);
  CHECK(once.removed.size() >= 2);
  CHECK(once.filtered.size() == x.size() - once.removed.size());
  CHECK(stats::grubbs_filter(once.filtered).removed.empty());
}

TEST_CASE("autocorrelation: normalization, whiteness, AR(1), reversal") {
  const auto x = gaussian(20000, 11);
  const auto ac = stats::autocorrelation(x, 500);
  REQUIRE(ac.r.size() == 501);
  CHECK(ac.r[0] == doctest::Approx(1.0));
  CHECK(ac.band == doctest::Approx(1.96 / std::sqrt(20000.0)));
  CHECK(ac.fraction_in_band() >= 0.93);

  std::vector<double> rev(x.rbegin(), x.rend());
  const auto ar = stats::autocorrelation(rev, 50);
  for (std::size_t k = 0; k <= 50; ++k) CHECK(ar.r[k] == doctest::Approx(ac.r[k]).epsilon(1e-10));

  auto e = gaussian(100000, 12);
  std::vector<double> y(e.size());
  y[0] = e[0];
  for (std::size_t i = 1; i < y.size(); ++i) y[i] = 0.5 * y[i - 1] + e[i];
  CHECK(std::abs(stats::autocorrelation(y, 5).r[1] - 0.5) < 0.05);

  CHECK_THROWS_AS(stats::autocorrelation(std::vector<double>(10, 1.0), 5), ParameterError);
}

TEST_CASE("crosscorrelation: identical, independent, zero variance") {
  const auto a = gaussian(4000, 21);
  const auto one = stats::crosscorrelation({a, a, a});
  CHECK((one - Eigen::MatrixXd::Ones(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

  std::vector<std::vector<double>> ind;
  for (int i = 0; i < 6; ++i) ind.push_back(gaussian(4000, 30 + i));
  const auto r = stats::crosscorrelation(ind);
  const double lim = 3.0 / std::sqrt(4000.0);
  for (int i = 0; i < 6; ++i) {
    CHECK(r(i, i) == doctest::Approx(1.0));
    for (int j = 0; j < 6; ++j) {
      CHECK(r(i, j) == r(j, i));
      if (i != j) CHECK(std::abs(r(i, j)) < lim);
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
  CHECK(es.eigenvalues().minCoeff() > -1e-8);

  CHECK_THROWS_AS(stats::crosscorrelation({a, std::vector<double>(4000, 2.0)}), UndefinedCorrelationError);
}

TEST_CASE("crosscorrelation: shared-path phase noise couples overlapping 3-subsets") {
  CampaignConfig c;
  c.model = InterferometerModel::balanced(5, 5.0);
  c.n_cycles = 5000;
  c.noise.seed = 41;
  c.noise.sigma_phase = 0.03 * std::numbers::pi;
  const auto camp = run_campaign(c);
  const auto subsets = enumerate_order_subsets(PathSubset::full(5), 3);
  std::vector<std::vector<double>> eps(subsets.size());
  for (const auto& cy : camp.cycles)
    for (std::size_t s = 0; s < subsets.size(); ++s) eps[s].push_back(epsilon(cy.readings, subsets[s]));
  const auto r = stats::crosscorrelation(eps);
  const double lim = 3.0 / std::sqrt(5000.0);
  // ABC (index 0) and ABD (index 1) share paths A and B.
  REQUIRE(subsets[0].label() == "ABC");
  REQUIRE(subsets[1].label() == "ABD");
  CHECK(r(0, 1) > lim);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
  CHECK(es.eigenvalues().minCoeff() > -1e-8);
  CHECK((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("summarize") {
  const std::vector<double> c(10, 5.0);
  const auto sc = stats::summarize(c);
  CHECK(sc.mean == 5.0);
  CHECK(sc.std == 0.0);
  CHECK(sc.sem == 0.0);
  CHECK(sc.count == 10);

  const auto x = gaussian(1000000, 51);
  const auto s = stats::summarize(x);
  CHECK(std::abs(s.mean) < 3.0 / 1000.0);
  CHECK(std::abs(s.excess_kurtosis) < 0.02);
  CHECK(std::abs(s.skewness) < 0.01);
  CHECK(s.sem == doctest::Approx(s.std / 1000.0));
  CHECK(stats::jarque_bera_pvalue(s) > 0.01);

  const std::vector<double> small{1.0, 2.0, 3.0, 4.0};
  CHECK(stats::mean(small) == 2.5);
  CHECK(stats::sample_std(small) == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("histogram bins cover the range and count every point") {
  const auto x = gaussian(10000, 61);
  const auto h = stats::histogram(x, 40);
  REQUIRE(h.size() == 40);
  std::size_t total = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    total += h[i].count;
    CHECK(h[i].hi > h[i].lo);
    if (i > 0) CHECK(h[i].lo == doctest::Approx(h[i - 1].hi));
  }
  CHECK(total == x.size());
  CHECK(h.front().lo == *std::min_element(x.begin(), x.end()));
  CHECK(h.back().hi == doctest::Approx(*std::max_element(x.begin(), x.end())));
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "sorkin/error.hpp"
#include "sorkin/interferometer.hpp"
#include "sorkin/path_subset.hpp"
#include "sorkin/rate_tuple.hpp"
#include "sorkin/sorkin.hpp"

using namespace sorkin;

namespace {

// Brute force over bitmasks, independent of PathSubset helpers.
double epsilon_oracle(const RateTuple& r, std::uint32_t subset) {
  double s = 0.0;
  for (std::uint32_t m = 0; m < (1u << 16); ++m) {
    if ((m & ~subset) != 0) continue;
    int diff = 0;
    for (int b = 0; b < 16; ++b) diff += ((subset >> b) & 1u) && !((m >> b) & 1u);
    s += (diff % 2 ? -1.0 : 1.0) * r[m];
    if (m >= subset) break;
  }
  return s;
}

RateTuple random_tuple(int n, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  RateTuple r(n);
  for (std::uint32_t m = 0; m < r.size(); ++m) r.set(PathSubset(m), u(eng));
  return r;
}

RateTuple additive_tuple(int n, double c, std::span<const double> t) {
  RateTuple r(n);
  for (std::uint32_t m = 0; m < r.size(); ++m) {
    double v = c;
    for (int k : PathSubset(m).paths()) v += t[k];
    r.set(PathSubset(m), v);
  }
  return r;
}

}  // namespace

TEST_CASE("enumerate_order_subsets counts and order") {
  const auto all = PathSubset::full(5);
  CHECK(enumerate_order_subsets(all, 3).size() == 10);
  CHECK(enumerate_order_subsets(all, 4).size() == 5);
  const auto five = enumerate_order_subsets(all, 5);
  REQUIRE(five.size() == 1);
  CHECK(five[0].label() == "ABCDE");
  const auto three = enumerate_order_subsets(all, 3);
  CHECK(three.front().label() == "ABC");
  CHECK(three.back().label() == "CDE");
  for (std::size_t i = 1; i < three.size(); ++i) CHECK(canonical_less(three[i - 1], three[i]));
  CHECK_THROWS_AS(enumerate_order_subsets(all, 1), ParameterError);
  CHECK_THROWS_AS(enumerate_order_subsets(all, 6), ParameterError);
}

TEST_CASE("all_subsets canonical order: cardinality then lexicographic") {
  const auto s = all_subsets(PathSubset::full(4));
  REQUIRE(s.size() == 16);
  CHECK(s.front().label() == "0");
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i - 1].size() <= s[i].size());
  CHECK(PathSubset::from_label("ACE").mask() == 0b10101u);
  CHECK(PathSubset::from_label("0").mask() == 0u);
}

TEST_CASE("epsilon equals brute-force inclusion-exclusion") {
  std::mt19937_64 eng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = random_tuple(5, eng);
    for (int j = 2; j <= 5; ++j)
      for (PathSubset s : enumerate_order_subsets(PathSubset::full(5), j))
        CHECK(epsilon(r, s) == doctest::Approx(epsilon_oracle(r, s.mask())).epsilon(1e-12));
  }
}

TEST_CASE("epsilon annihilates additive models") {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> t(6);
    for (auto& x : t) x = u(eng);
    const auto r = additive_tuple(6, u(eng), t);
    for (int j = 2; j <= 6; ++j)
      for (PathSubset s : enumerate_order_subsets(PathSubset::full(6), j))
        CHECK(std::abs(epsilon(r, s)) <= 1e-12 * r.max_abs());
  }
}

TEST_CASE("epsilon of constructive Born-rule model vanishes") {
  const auto model = InterferometerModel::balanced(3, 3.0);
  const auto r = ideal_rates(model);
  CHECK(std::abs(epsilon(r, PathSubset::full(3))) <= 1e-12 * r.max_abs());
}

TEST_CASE("pairwise interference and delta") {
  // balanced constructive: p_kl = 4Tp, p_k = Tp
  RateTuple r(3);
  const double p = 2.5;
  for (std::uint32_t m = 0; m < 8; ++m) {
    const int k = PathSubset(m).size();
    r.set(PathSubset(m), static_cast<double>(k * k) * p);
  }
  CHECK(pairwise_interference(r, 0, 1) == doctest::Approx(2.0 * p));
  CHECK(delta(r, PathSubset::full(3)) == doctest::Approx(6.0 * p));

  RateTuple r5(5);
  for (std::uint32_t m = 0; m < 32; ++m) {
    const int k = PathSubset(m).size();
    r5.set(PathSubset(m), static_cast<double>(k * k) * p);
  }
  CHECK(delta(r5, PathSubset::full(5)) == doctest::Approx(20.0 * p));

  // direct arithmetic on arbitrary numbers, with and without background term
  RateTuple q(2);
  q.set(PathSubset(0b00), 0.3);
  q.set(PathSubset(0b01), 1.7);
  q.set(PathSubset(0b10), 2.9);
  q.set(PathSubset(0b11), 7.25);
  CHECK(pairwise_interference(q, 0, 1) == doctest::Approx(7.25 - 1.7 - 2.9 + 0.3));
  CHECK(pairwise_interference(q, 0, 1, false) == doctest::Approx(7.25 - 1.7 - 2.9));
}

TEST_CASE("incoherent model has no pairwise interference") {
  auto model = InterferometerModel::balanced(3, 1.0, 0.0, 0.2);
  const auto r = ideal_rates(model);
  CHECK(std::abs(pairwise_interference(r, 0, 2)) < 1e-15);
  CHECK(delta(r, PathSubset::full(3)) < 1e-14);
  std::vector<RateTuple> cycles(3, r);
  CHECK_THROWS_AS(kappa_unbiased(cycles, PathSubset::full(3)), UndefinedNormalizationError);
}

TEST_CASE("missing reading raises incomplete-data error") {
  RateTuple r(3);
  r.set(PathSubset(0b111), 1.0);
  CHECK_THROWS_AS(epsilon(r, PathSubset::full(3)), IncompleteDataError);
  CHECK_THROWS_AS(delta(r, PathSubset::full(3)), IncompleteDataError);
}

TEST_CASE("kappa_unbiased is ratio of means with sem from epsilon spread") {
  std::mt19937_64 eng(11);
  std::normal_distribution<double> g(0.0, 0.05);
  const auto base = ideal_rates(InterferometerModel::balanced(3, 3.0));
  std::vector<RateTuple> cycles;
  for (int c = 0; c < 40; ++c) {
    RateTuple r = base;
    for (std::uint32_t m = 1; m < 8; ++m) r.set(PathSubset(m), base[m] + g(eng));
    cycles.push_back(r);
  }
  const auto est = kappa_unbiased(cycles, PathSubset::full(3));
  double me = 0.0, md = 0.0;
  for (const auto& r : cycles) {
    me += epsilon(r, PathSubset::full(3));
    md += delta(r, PathSubset::full(3));
  }
  me /= 40.0;
  md /= 40.0;
  CHECK(est.kappa == doctest::Approx(me / md).epsilon(1e-13));
  double ss = 0.0;
  for (double e : est.epsilon_series) ss += (e - me) * (e - me);
  CHECK(est.kappa_sem == doctest::Approx(std::sqrt(ss / 39.0) / std::sqrt(40.0) / md).epsilon(1e-12));
  CHECK(est.order == 3);
  CHECK(est.epsilon_series.size() == 40);
}

TEST_CASE("noise-free campaign gives kappa zero") {
  CampaignConfig c;
  c.model = InterferometerModel::balanced(4, 5.0, 0.9, 0.1);
  c.n_cycles = 5;
  c.noise.seed = 2;
  const auto camp = run_campaign(c);
  std::vector<RateTuple> tuples;
  for (const auto& cy : camp.cycles) tuples.push_back(cy.readings);
  for (PathSubset s : enumerate_order_subsets(PathSubset::full(4), 3)) {
    const auto est = kappa_unbiased(tuples, s);
    CHECK(std::abs(est.kappa) < 1e-13);
    CHECK(est.kappa_sem < 1e-13);
  }
}

TEST_CASE("power-noise campaign: separate averaging stays unbiased") {
  CampaignConfig c;
  c.model = InterferometerModel::balanced(3, 30.0);
  c.noise.sigma_power_rel = 0.01;
  c.noise.seed = 99;
  c.n_cycles = 100000;
  const auto camp = run_campaign(c);
  std::vector<RateTuple> tuples;
  tuples.reserve(camp.cycles.size());
  for (const auto& cy : camp.cycles) tuples.push_back(cy.readings);
  const auto est = kappa_unbiased(tuples, PathSubset::full(3));
  CHECK(std::abs(est.kappa) < 3.0 * est.kappa_sem);
}

TEST_CASE("epsilon and delta invariant under path relabeling") {
  std::mt19937_64 eng(5);
  const auto r = random_tuple(3, eng);
  // permute paths 0 -> 2 -> 1 -> 0
  auto perm = [](std::uint32_t m) {
    std::uint32_t out = 0;
    const int to[3] = {2, 0, 1};
    for (int b = 0; b < 3; ++b)
      if (m >> b & 1u) out |= 1u << to[b];
    return out;
  };
  RateTuple q(3);
  for (std::uint32_t m = 0; m < 8; ++m) q.set(PathSubset(perm(m)), r[m]);
  CHECK(epsilon(q, PathSubset::full(3)) == doctest::Approx(epsilon(r, PathSubset::full(3))));
  CHECK(delta(q, PathSubset::full(3)) == doctest::Approx(delta(r, PathSubset::full(3))));
}

TEST_CASE("naive estimator is mean of ratios") {
  const std::vector<double> e{1.0, 2.0, -1.0}, d{2.0, 4.0, 1.0};
  const auto v = kappa_naive(e, d);
  CHECK(v.value == doctest::Approx((0.5 + 0.5 - 1.0) / 3.0));
}

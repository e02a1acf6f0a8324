#include <doctest.h>

#include <cmath>

#include "sorkin/detector.hpp"
#include "sorkin/error.hpp"
#include "sorkin/fixtures.hpp"

using namespace sorkin;

namespace {

// Bisection oracle for f(V) = p.
double invert_by_bisection(const PolynomialTransfer& t, double p) {
  double lo = 0.5 * p, hi = 1.5 * p + 1e-12;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (t(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("reading_from_power: identity for linear transfer") {
  const auto t = PolynomialTransfer::linear({0.0, 10.0});
  for (double p : {0.0, 0.3, 4.0, 10.0}) CHECK(reading_from_power(t, p) == p);
}

TEST_CASE("reading_from_power with the photoreceiver coefficients") {
  const auto t = fixtures::photoreceiver_transfer();
  CHECK(reading_from_power(t, 1.0) == doctest::Approx(1.0000567).epsilon(1e-12));
  CHECK_THROWS_AS(reading_from_power(t, 12.5), DomainError);
  CHECK_THROWS_AS(reading_from_power(t, -0.1), DomainError);
}

TEST_CASE("first-order inverse vs root-solve oracle") {
  const auto t = fixtures::photoreceiver_transfer();
  for (double p = 0.1; p <= 11.9; p += 0.37) {
    const double exact = invert_by_bisection(t, p);
    const double nl = std::abs(t.nonlinear_part(p)) / p;
    CHECK(std::abs(reading_from_power(t, p) - exact) / exact <= 4.0 * nl * nl + 1e-15);
    CHECK(reading_from_power_exact(t, p) == doctest::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("weakness bound over the classical range") {
  // 0.03% relative
  const auto t = fixtures::photoreceiver_transfer();
  for (double p = 0.05; p <= 12.0; p += 0.01) CHECK(std::abs(reading_from_power(t, p) - p) / p <= 3e-4);
}

TEST_CASE("transfer_sigma") {
  auto t = fixtures::photoreceiver_transfer();
  CHECK(transfer_sigma(t, 0.0) == 0.0);
  CHECK(transfer_sigma(t, 1.0) == doctest::Approx(std::sqrt(4.102e-11)).epsilon(1e-12));
  CHECK(transfer_sigma(t, 1.0) == doctest::Approx(6.4e-6).epsilon(0.01));
  // homogeneity in C
  auto scaled = t;
  scaled.covariance *= 9.0;
  for (double v : {0.5, 3.0, 11.0}) CHECK(transfer_sigma(scaled, v) == doctest::Approx(3.0 * transfer_sigma(t, v)));
  t.covariance.setZero();
  CHECK(transfer_sigma(t, 5.0) == 0.0);
  // quadratic-form oracle at V = 2
  t = fixtures::photoreceiver_transfer();
  const double v = 2.0;
  const double var = 16.0 * 496e-13 + 2.0 * 32.0 * -45e-13 + 64.0 * 4.2e-13;
  CHECK(transfer_sigma(t, v) == doctest::Approx(std::sqrt(var)));
}

TEST_CASE("response maps are strictly increasing") {
  const auto t = fixtures::photoreceiver_transfer();
  const auto d = fixtures::counting_deadtime();
  double prev_v = -1.0, prev_c = -1.0;
  for (double p = 0.0; p <= 12.0; p += 0.05) {
    const double v = reading_from_power(t, p);
    CHECK(v > prev_v);
    prev_v = v;
    const double c = measured_rate_deadtime(d, p * 1e6);
    CHECK(c > prev_c);
    prev_c = c;
  }
}

TEST_CASE("transfer validation") {
  auto t = fixtures::photoreceiver_transfer();
  CHECK_NOTHROW(t.validate());
  t.coefficients = {1e-2, 0.0};
  CHECK_THROWS_AS(t.validate(), ModelError);
  t = fixtures::photoreceiver_transfer();
  t.covariance(0, 1) = 0.0;
  CHECK_THROWS_AS(t.validate(), ModelError);
}

TEST_CASE("deadtime saturation") {
  DeadtimeModel m{0.0, 0.0, 150.0};
  CHECK(measured_rate_deadtime(m, 1e5) == 1e5 + 150.0);
  m = {33.9e-9, 0.3e-9, 0.0};
  CHECK(measured_rate_deadtime(m, 1e6) == doctest::Approx(1e6 / 1.0339).epsilon(1e-12));
  CHECK(measured_rate_deadtime(m, 1e6) == doctest::Approx(9.672e5).epsilon(1e-4));
  m.dark_rate = 150.0;
  for (double p : {10.0, 3e4, 1e6, 5e6}) {
    const double v = measured_rate_deadtime(m, p) - m.dark_rate;
    CHECK(v / (1.0 - m.tau * v) == doctest::Approx(p).epsilon(1e-12));
    CHECK(true_rate_deadtime(m, measured_rate_deadtime(m, p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(true_rate_deadtime(m, 1.0 / m.tau + 200.0), SaturationError);
}

TEST_CASE("heralded correction") {
  CHECK(correct_heralded(6e5, 6e5, 1e5, 0.0) == 1e5);
  CHECK(correct_heralded(6e5, 6e5, 1e5, 33.9e-9) == doctest::Approx(1e5 / (1.0 - 33.9e-9 * 1.1e6)).epsilon(1e-12));
  CHECK(correct_heralded(6e5, 6e5, 1e5, 33.9e-9) == doctest::Approx(1.0387e5).epsilon(1e-4));
  for (double pc : {1e2, 1e4, 1e5})
    for (double vi : {1e4, 3e5, 6e5}) {
      const double vh = 6e5;
      const double vc = blind_coincidences(pc, vi, vh, 33.9e-9);
      CHECK(std::abs(correct_heralded(vi, vh, vc, 33.9e-9) / pc - 1.0) <= 1e-9);
    }
  CHECK_THROWS_AS(correct_heralded(2e7, 2e7, 1.0, 33.9e-9), SaturationError);
  const auto band = correct_heralded_band(6e5, 6e5, 1e5, fixtures::counting_deadtime());
  CHECK(band.lower_tau < band.value);
  CHECK(band.value < band.upper_tau);
}

TEST_CASE("detector kinds") {
  CHECK(detector_kind(IdealDetector{}) == "ideal");
  CHECK(detector_kind(fixtures::photoreceiver_transfer()) == "polynomial");
  CHECK(detector_kind(fixtures::counting_deadtime()) == "deadtime");
  CHECK(detector_kind(HeraldedDetector{}) == "heralded");
}

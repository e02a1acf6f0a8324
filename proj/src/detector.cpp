#include "sorkin/detector.hpp"

#include <cmath>

#include "sorkin/error.hpp"

namespace sorkin {

double PolynomialTransfer::nonlinear_part(double v) const {
  // Horner over a_n..a_2, then multiply by V^2.
  double acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * v + *it;
  return acc * v * v;
}

double PolynomialTransfer::derivative(double v) const {
  double d = 1.0;
  double vp = v;  // V^{j-1}
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const int j = static_cast<int>(i) + 2;
    d += j * coefficients[i] * vp;
    vp *= v;
  }
  return d;
}

void PolynomialTransfer::validate() const {
  const auto n = static_cast<Eigen::Index>(coefficients.size());
  if (covariance.size() != 0 && (covariance.rows() != n || covariance.cols() != n))
    throw ModelError("transfer covariance must be (n-1)x(n-1)");
  if (covariance.size() != 0) {
    const double scale = std::max(covariance.cwiseAbs().maxCoeff(), 1e-300);
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw ModelError("transfer covariance is not symmetric");
  }
  if (!(domain[1] > domain[0])) throw ModelError("transfer domain must satisfy lo < hi");
  constexpr int kGrid = 512;
  for (int i = 0; i <= kGrid; ++i) {
    const double v = domain[0] + (domain[1] - domain[0]) * i / kGrid;
    if (v == 0.0) continue;
    if (std::abs(nonlinear_part(v)) >= kWeakLimit * std::abs(v))
      throw ModelError("transfer leaves the weak-nonlinearity regime inside its domain");
  }
}

PolynomialTransfer PolynomialTransfer::linear(std::array<double, 2> domain) {
  PolynomialTransfer t;
  t.domain = domain;
  return t;
}

namespace {
void require_domain(const PolynomialTransfer& t, double x) {
  if (!std::isfinite(x) || !t.in_domain(x))
    throw DomainError("value " + std::to_string(x) + " outside transfer domain [" +
                      std::to_string(t.domain[0]) + ", " + std::to_string(t.domain[1]) + "]");
}
}  // namespace

double reading_from_power(const PolynomialTransfer& t, double p) {
  require_domain(t, p);
  return p - t.nonlinear_part(p);
}

double reading_from_power_exact(const PolynomialTransfer& t, double p) {
  require_domain(t, p);
  double v = p - t.nonlinear_part(p);
  for (int it = 0; it < 50; ++it) {
    const double step = (t(v) - p) / t.derivative(v);
    v -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(v))) break;
  }
  return v;
}

double power_from_reading(const PolynomialTransfer& t, double v) {
  require_domain(t, v);
  return t(v);
}

double transfer_sigma(const PolynomialTransfer& t, double v) {
  const auto n = static_cast<Eigen::Index>(t.coefficients.size());
  if (n == 0 || t.covariance.size() == 0) return 0.0;
  Eigen::VectorXd g(n);
  double vp = v * v;
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i) = vp;
    vp *= v;
  }
  const double var = g.dot(t.covariance * g);
  return std::sqrt(std::max(var, 0.0));
}

void DeadtimeModel::validate() const {
  if (!(tau >= 0.0) || !(sigma_tau >= 0.0) || !(dark_rate >= 0.0))
    throw ModelError("deadtime parameters must be non-negative");
}

double measured_rate_deadtime(const DeadtimeModel& m, double p) {
  if (m.tau * p < 0.0) throw DomainError("tau * p must be non-negative");
  return p / (1.0 + m.tau * p) + m.dark_rate;
}

double true_rate_deadtime(const DeadtimeModel& m, double measured) {
  const double v = measured - m.dark_rate;
  const double denom = 1.0 - m.tau * v;
  if (denom <= 0.0) throw SaturationError("measured rate at or beyond 1/tau");
  return v / denom;
}

double correct_heralded(double v_i, double v_h, double v_c, double tau) {
  const double denom = 1.0 - tau * (v_i + v_h - v_c);
  if (denom <= 0.0) throw SaturationError("heralded correction denominator is not positive");
  return v_c / denom;
}

CorrectionBand correct_heralded_band(double v_i, double v_h, double v_c, const DeadtimeModel& m) {
  return {correct_heralded(v_i, v_h, v_c, m.tau),
          correct_heralded(v_i, v_h, v_c, std::max(0.0, m.tau - m.sigma_tau)),
          correct_heralded(v_i, v_h, v_c, m.tau + m.sigma_tau)};
}

double blind_coincidences(double p_c, double v_i, double v_h, double tau) {
  // Solves p_c = V_c / (1 - tau (V_i + V_h - V_c)) for V_c.
  const double denom = 1.0 - tau * p_c;
  if (denom <= 0.0) throw SaturationError("coincidence rate at or beyond 1/tau");
  return p_c * (1.0 - tau * (v_i + v_h)) / denom;
}

std::string detector_kind(const DetectorModel& d) {
  struct V {
    std::string operator()(const IdealDetector&) const { return "ideal"; }
    std::string operator()(const PolynomialTransfer&) const { return "polynomial"; }
    std::string operator()(const DeadtimeModel&) const { return "deadtime"; }
    std::string operator()(const HeraldedDetector&) const { return "heralded"; }
  };
  return std::visit(V{}, d);
}

}  // namespace sorkin

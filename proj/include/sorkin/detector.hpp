#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace sorkin {

/// Classical photoreceiver transfer p = f(V) = V + sum_{j>=2} a_j V^j,
/// with a_0 = 0 and a_1 = 1. `coefficients` holds a_2..a_n and
/// `covariance` their (n-1)x(n-1) covariance.
struct PolynomialTransfer {
  std::vector<double> coefficients;
  Eigen::MatrixXd covariance;
  std::array<double, 2> domain{0.0, 0.0};

  static constexpr double kWeakLimit = 0.01;

  int degree() const noexcept { return static_cast<int>(coefficients.size()) + 1; }
  double nonlinear_part(double v) const;
  double operator()(double v) const { return v + nonlinear_part(v); }
  double derivative(double v) const;
  bool in_domain(double v) const noexcept { return v >= domain[0] && v <= domain[1]; }

  /// Checks covariance shape/symmetry and the weak-nonlinearity bound
  /// |f_NL(V)| < 0.01 |V| across the domain. Throws ModelError.
  void validate() const;

  static PolynomialTransfer linear(std::array<double, 2> domain);
};

/// "true power -> measured reading" to first order: 2p - f(p).
double reading_from_power(const PolynomialTransfer& t, double p);
/// Same direction, solved exactly by Newton iteration on f(V) = p.
double reading_from_power_exact(const PolynomialTransfer& t, double p);
/// "measured reading -> true power": f(V).
double power_from_reading(const PolynomialTransfer& t, double v);
/// sigma_f(V) = sqrt(sum_{p,q>=2} V^{p+q} C_{p-1,q-1}).
double transfer_sigma(const PolynomialTransfer& t, double v);

/// Non-paralyzable single-photon detector.
struct DeadtimeModel {
  double tau = 0.0;        // s
  double sigma_tau = 0.0;  // s
  double dark_rate = 0.0;  // counts/s, additive on measured rates

  void validate() const;
};

/// Measured rate for true rate p: p / (1 + tau p) + dark.
double measured_rate_deadtime(const DeadtimeModel& m, double p);
/// Inverse: f(V - dark) with f(V) = V / (1 - tau V).
double true_rate_deadtime(const DeadtimeModel& m, double measured);

/// Heralded coincidence correction p_c = V_c / (1 - tau (V_i + V_h - V_c)).
double correct_heralded(double v_i, double v_h, double v_c, double tau);

struct CorrectionBand {
  double value = 0.0;
  double lower_tau = 0.0;  // evaluated at tau - sigma_tau
  double upper_tau = 0.0;  // evaluated at tau + sigma_tau
  double half_width() const { return 0.5 * std::abs(upper_tau - lower_tau); }
};
CorrectionBand correct_heralded_band(double v_i, double v_h, double v_c,
                                     const DeadtimeModel& m);

/// Forward blinding model: the coincidence rate a detector pair reports for a
/// true coincidence rate p_c given measured singles V_i and herald rate V_h.
double blind_coincidences(double p_c, double v_i, double v_h, double tau);

/// Heralded single-photon detection: both arms share the deadtime model.
/// Interferometer singles are p_c / herald_efficiency.
struct HeraldedDetector {
  DeadtimeModel deadtime;
  double herald_rate = 0.0;         // true herald-arm rate, counts/s
  double herald_efficiency = 1.0;   // fraction of interferometer photons that are heralded
};

struct IdealDetector {};

using DetectorModel = std::variant<IdealDetector, PolynomialTransfer, DeadtimeModel, HeraldedDetector>;

std::string detector_kind(const DetectorModel& d);

}  // namespace sorkin

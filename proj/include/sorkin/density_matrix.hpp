#pragma once

#include <complex>
#include <span>

#include <Eigen/Dense>

namespace sorkin {

/// N-dimensional path state. Hermiticity and unit trace are enforced on
/// construction (1e-10 relative). Positivity is only reported: direct
/// reconstruction may produce slightly negative eigenvalues and we do not
/// repair them.
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-10;
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kNegativityTol = 1e-8;

  DensityMatrix() = default;
  explicit DensityMatrix(Eigen::MatrixXcd m);

  static DensityMatrix pure(std::span<const std::complex<double>> amplitudes);
  static DensityMatrix maximally_mixed(int n);
  /// rho_kk = w_k / sum(w), rho_kl = X sqrt(rho_kk rho_ll) for k != l.
  static DensityMatrix partially_coherent(std::span<const double> weights, double coherence);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXcd& matrix() const noexcept { return m_; }
  std::complex<double> operator()(int k, int l) const { return m_(k, l); }

  /// Off-diagonals multiplied by X in [0, 1]; stays physical for physical input.
  DensityMatrix with_coherence(double x) const;

  double min_eigenvalue() const;
  bool is_physical(double tol = kNegativityTol) const { return min_eigenvalue() >= -tol; }

 private:
  Eigen::MatrixXcd m_;
};

/// Tr(rho^2).
double purity(const DensityMatrix& rho);

/// Frobenius norm of the difference.
double frobenius_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace sorkin

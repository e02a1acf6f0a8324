#include "sorkin/density_matrix.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "sorkin/error.hpp"

namespace sorkin {

DensityMatrix::DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < 1)
    throw ModelError("density matrix must be square and non-empty");
  if (!m_.allFinite()) throw ModelError("density matrix has non-finite entries");
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol * scale)
    throw ModelError("density matrix is not Hermitian");
  const std::complex<double> tr = m_.trace();
  if (std::abs(tr.real() - 1.0) > kTraceTol || std::abs(tr.imag()) > kTraceTol)
    throw ModelError("density matrix trace differs from 1");
  // Remove round-off asymmetry so downstream quadratic forms are exactly real.
  m_ = 0.5 * (m_ + m_.adjoint()).eval();
}

DensityMatrix DensityMatrix::pure(std::span<const std::complex<double>> amplitudes) {
  Eigen::VectorXcd psi(static_cast<Eigen::Index>(amplitudes.size()));
  for (std::size_t i = 0; i < amplitudes.size(); ++i) psi(static_cast<Eigen::Index>(i)) = amplitudes[i];
  const double norm = psi.norm();
  if (norm == 0.0) throw ModelError("zero state vector");
  psi /= norm;
  return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int n) {
  return DensityMatrix(Eigen::MatrixXcd::Identity(n, n) / static_cast<double>(n));
}

DensityMatrix DensityMatrix::partially_coherent(std::span<const double> weights,
                                                double coherence) {
  if (coherence < 0.0 || coherence > 1.0) throw ModelError("coherence must lie in [0, 1]");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ModelError("negative path weight");
    total += w;
  }
  if (total <= 0.0) throw ModelError("path weights sum to zero");
  const auto n = static_cast<Eigen::Index>(weights.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = 0; l < n; ++l) {
      const double wk = weights[k] / total, wl = weights[l] / total;
      m(k, l) = (k == l) ? wk : coherence * std::sqrt(wk * wl);
    }
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::with_coherence(double x) const {
  if (x < 0.0 || x > 1.0) throw ModelError("coherence must lie in [0, 1]");
  Eigen::MatrixXcd m = m_ * x;
  m.diagonal() = m_.diagonal();
  return DensityMatrix(std::move(m));
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double purity(const DensityMatrix& rho) {
  // Tr(rho^2) = sum |rho_kl|^2 for Hermitian rho.
  return rho.matrix().cwiseAbs2().sum();
}

double frobenius_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw ParameterError("dimension mismatch");
  return (a.matrix() - b.matrix()).norm();
}

}  // namespace sorkin

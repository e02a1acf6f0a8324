#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sorkin/density_matrix.hpp"
#include "sorkin/detector.hpp"
#include "sorkin/rate_tuple.hpp"
#include "sorkin/sorkin.hpp"

namespace sorkin {

struct PhaseScanPoint {
  double phase = 0.0;  // phase set on path k relative to path l, rad
  double rate = 0.0;
};

struct TomographyDataset {
  int n_paths = 0;
  std::vector<double> single_path;  // background included
  std::map<std::pair<int, int>, std::vector<PhaseScanPoint>> two_path_scans;  // key k < l
  double background = 0.0;
  double input_flux = 0.0;  // reference only; 0 if unknown
};

struct Reconstruction {
  DensityMatrix rho;
  double flux = 0.0;  // sum of background-corrected single-path rates
  double min_eigenvalue = 0.0;
  std::vector<std::string> warnings;
};

/// Direct reconstruction. Diagonals from single-path rates, off-diagonals
/// from a cosine least-squares fit p_kl(dphi) = c + alpha cos dphi + beta sin dphi,
/// rho_kl = (alpha - i beta) / (2 F). The result is the effective state, with
/// path transmissions absorbed, and reproduces the data via predict_rates
/// with flux F and unit transmissions.
Reconstruction reconstruct_density(const TomographyDataset& data);

/// Noise-free forward model of the tomography measurements.
TomographyDataset synthesize_tomography(const DensityMatrix& rho, double flux, double background,
                                        std::span<const double> phases);

/// Equally spaced 4-point phase scan {0, pi/2, pi, 3pi/2}.
std::vector<double> default_phase_scan();

/// Rates of every shutter setting at the constructive (zero-offset) phase point.
RateTuple predict_rates(const DensityMatrix& rho, double flux, std::span<const double> transmissions,
                        double background);

struct SubsetPrediction {
  PathSubset subset;
  double kappa_th = 0.0;
  double sigma_uncorrelated = 0.0;
  double sigma_max_correlated = 0.0;
};

struct OrderPrediction {
  int order = 0;
  double kappa_th = 0.0;  // mean over the order's subsets
  double sigma_uncorrelated = 0.0;
  double sigma_max_correlated = 0.0;
  std::vector<SubsetPrediction> subsets;
};

struct KappaPrediction {
  std::string detector;
  std::string scenario = "uncorrelated";  // which sigma is the reported one
  int n_mc = 0;
  double convergence_ratio = 1.0;  // sigma(2 n_mc) / sigma(n_mc), order-3 mean
  std::vector<OrderPrediction> orders;

  const OrderPrediction& order(int j) const;
};

struct KappaThOptions {
  int n_mc = 10000;
  std::uint64_t seed = 1;
  std::vector<int> orders;  // empty: 3..N
  bool background_in_pairwise = true;
};

/// Apparent kappa from detector distortion of Born-rule rates.
/// Polynomial detectors: uncorrelated sigma by Monte-Carlo over independent
/// N(0, sigma_f(p)^2) perturbations, max-correlated sigma from a common +-1 sigma
/// shift. Deadtime detectors: both sigmas from re-evaluation at tau +- sigma_tau.
KappaPrediction kappa_th(const RateTuple& predicted, const DetectorModel& detector,
                         const KappaThOptions& opt = {});

KappaPrediction kappa_th(const DensityMatrix& rho, double flux, std::span<const double> transmissions,
                         double background, const DetectorModel& detector,
                         const KappaThOptions& opt = {});

/// <kappa> - kappa_th with root-sum-square uncertainty.
ValueSem corrected_kappa(ValueSem measured, ValueSem predicted);

/// Mean of per-subset values; sem = (1/n) sqrt(sum_ij R_ij s_i s_j).
ValueSem combine_path_subsets(std::span<const ValueSem> per_subset, const Eigen::MatrixXd& cross_corr);

}  // namespace sorkin

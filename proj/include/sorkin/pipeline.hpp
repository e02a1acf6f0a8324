#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sorkin/detector.hpp"
#include "sorkin/interferometer.hpp"
#include "sorkin/sorkin.hpp"
#include "sorkin/stats.hpp"
#include "sorkin/tomography.hpp"

namespace sorkin {

struct AnalysisOptions {
  double grubbs_alpha = 0.01;
  bool grubbs = true;
  SorkinOptions sorkin;
  std::vector<int> orders;  // empty: 3..N
  std::size_t histogram_bins = 50;
  std::size_t max_lag = 50;
  // heralded regime: coincidences are corrected record by record with this model
  std::optional<DeadtimeModel> heralded_deadtime;
};

struct SubsetResult {
  PathSubset subset;
  int order = 0;
  double mean_epsilon = 0.0;
  double mean_delta = 0.0;
  double kappa = 0.0;
  double kappa_sem = 0.0;
  bool defined = true;  // false: <delta> below the normalization floor
  ValueSem kappa_naive;
  stats::SeriesSummary epsilon_summary;
  double autocorrelation_in_band = 1.0;
  std::vector<stats::HistogramBin> histogram;  // of eps_i / <delta>
};

struct MeasuredOrder {
  int order = 0;
  double kappa = 0.0;
  double kappa_sem = 0.0;
  std::size_t n_subsets = 0;
  bool defined = true;
  // heralded only: kappa re-evaluated with the correction at tau -/+ sigma_tau
  std::optional<double> kappa_tau_minus;
  std::optional<double> kappa_tau_plus;
};

struct AnalysisReport {
  std::string regime = "classical";
  int n_paths = 0;
  std::size_t cycles_total = 0;
  std::size_t cycles_used = 0;
  std::vector<int> incomplete_cycles;
  std::vector<int> outlier_cycles;
  std::vector<SubsetResult> subsets;
  std::vector<MeasuredOrder> orders;
  std::map<int, Eigen::MatrixXd> crosscorrelation;  // per order, subset order as in `subsets`
  std::vector<std::string> warnings;
  std::map<std::string, std::string> provenance;

  const MeasuredOrder& order(int j) const;
};

/// Grubbs filter per shutter setting, per-subset epsilon/delta series, separate
/// averaging estimator, cross-correlation-aware combination per order.
AnalysisReport analyze_campaign(const std::vector<MeasurementCycle>& cycles, int n_paths,
                                Regime regime, const AnalysisOptions& opt = {});

struct PredictedOrder {
  int order = 0;
  double kappa_th = 0.0;
  double sigma = 0.0;
};

struct CorrectionRow {
  int order = 0;
  double kappa = 0.0;
  double kappa_sem = 0.0;
  double kappa_th = 0.0;
  double kappa_th_sigma = 0.0;
  double kappa_tilde = 0.0;
  double kappa_tilde_sigma = 0.0;
};

struct CorrectionReport {
  std::string regime;
  std::vector<CorrectionRow> rows;
  std::map<std::string, std::string> provenance;
};

/// Row-wise kappa_tilde = <kappa> - kappa_th with RSS uncertainty. Orders must
/// match exactly, else InputError.
CorrectionReport correct_reports(const std::string& regime, const std::vector<MeasuredOrder>& measured,
                                 const std::vector<PredictedOrder>& predicted);

/// Heralded data carry their correction already; the kappa_th column is 0 with
/// sigma = half the tau +- sigma_tau spread.
std::vector<PredictedOrder> heralded_correction_terms(const std::vector<MeasuredOrder>& measured);

/// Predicted orders in the reported scenario (uncorrelated or tau band).
std::vector<PredictedOrder> predicted_orders(const KappaPrediction& p);

/// Throws InputError unless every row satisfies the arithmetic invariant.
void check_correction_invariant(const CorrectionReport& r, double rel_tol = 1e-12);

/// Design-decision parameters embedded in reports.
std::map<std::string, std::string> analysis_decisions(const AnalysisOptions& opt);

}  // namespace sorkin

#include "sorkin/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <cmath>
#include <set>
#include <sstream>

#include "sorkin/error.hpp"
#include "sorkin/kernels.hpp"

namespace sorkin {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Coincidence readings corrected for deadtime with tau shifted by `shift`.
std::vector<RateTuple> heralded_corrected(const std::vector<MeasurementCycle>& cycles,
                                          const DeadtimeModel& dm, double shift) {
  const double tau = std::max(0.0, dm.tau + shift);
  std::vector<RateTuple> out;
  out.reserve(cycles.size());
  for (const auto& c : cycles) {
    if (c.singles_rate.size() != c.readings.size() || c.herald_rate.size() != c.readings.size())
      throw InputError("heralded analysis needs singles and herald rates for every reading");
    RateTuple r(c.readings.n_paths());
    for (std::uint32_t m = 0; m < r.size(); ++m)
      r.set(PathSubset(m), correct_heralded(c.singles_rate[m], c.herald_rate[m], c.readings[m], tau));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

const MeasuredOrder& AnalysisReport::order(int j) const {
  for (const auto& o : orders)
    if (o.order == j) return o;
  throw ParameterError("no result for order " + std::to_string(j));
}

std::map<std::string, std::string> analysis_decisions(const AnalysisOptions& opt) {
  return {
      {"estimator", "separate_averaging"},
      {"grubbs_enabled", opt.grubbs ? "true" : "false"},
      {"grubbs_alpha", num(opt.grubbs_alpha)},
      {"grubbs_sides", "two"},
      {"grubbs_scope", "per_shutter_setting_drop_whole_cycle"},
      {"background_in_pairwise", opt.sorkin.background_in_pairwise ? "true" : "false"},
      {"delta_sum", "all_pairs_abs"},
      {"undefined_delta_ratio", num(opt.sorkin.undefined_delta_ratio)},
      {"autocorrelation", "uncentered"},
      {"autocorrelation_max_lag", std::to_string(opt.max_lag)},
      {"crosscorrelation", "pearson_on_epsilon"},
      {"combination", "mean_with_crosscorrelated_sem"},
      {"histogram_bins", std::to_string(opt.histogram_bins)},
  };
}

AnalysisReport analyze_campaign(const std::vector<MeasurementCycle>& cycles, int n_paths, Regime regime,
                                const AnalysisOptions& opt) {
  if (n_paths < 3) throw InputError("analysis needs at least 3 paths");
  AnalysisReport rep;
  rep.regime = to_string(regime);
  rep.n_paths = n_paths;
  rep.cycles_total = cycles.size();
  rep.provenance = analysis_decisions(opt);

  std::vector<MeasurementCycle> kept;
  kept.reserve(cycles.size());
  for (const auto& c : cycles) {
    if (c.readings.n_paths() != n_paths || !c.readings.complete())
      rep.incomplete_cycles.push_back(c.index);
    else
      kept.push_back(c);
  }
  if (!rep.incomplete_cycles.empty())
    rep.warnings.push_back(std::to_string(rep.incomplete_cycles.size()) +
                           " incomplete cycles dropped");

  const std::size_t n_settings = std::size_t{1} << n_paths;
  if (opt.grubbs && kept.size() >= 3) {
    std::set<std::size_t> drop;
    std::vector<double> series(kept.size());
    for (std::uint32_t m = 0; m < n_settings; ++m) {
      for (std::size_t i = 0; i < kept.size(); ++i) series[i] = kept[i].readings[m];
      for (std::size_t i : stats::grubbs_filter(series, opt.grubbs_alpha).removed) drop.insert(i);
    }
    if (!drop.empty()) {
      std::vector<MeasurementCycle> filtered;
      filtered.reserve(kept.size() - drop.size());
      for (std::size_t i = 0; i < kept.size(); ++i) {
        if (drop.count(i))
          rep.outlier_cycles.push_back(kept[i].index);
        else
          filtered.push_back(std::move(kept[i]));
      }
      kept = std::move(filtered);
    }
  }
  rep.cycles_used = kept.size();
  if (kept.size() < 2) throw InputError("fewer than 2 usable cycles");

  std::vector<int> orders = opt.orders;
  if (orders.empty())
    for (int j = 3; j <= n_paths; ++j) orders.push_back(j);
  std::vector<PathSubset> subsets;
  for (int j : orders) {
    if (j < 3 || j > n_paths) throw InputError("order " + std::to_string(j) + " not available");
    const auto list = enumerate_order_subsets(PathSubset::full(n_paths), j);
    subsets.insert(subsets.end(), list.begin(), list.end());
  }

  std::vector<RateTuple> tuples;
  std::vector<RateTuple> tuples_minus, tuples_plus;
  if (regime == Regime::heralded) {
    if (!opt.heralded_deadtime) throw InputError("heralded analysis needs a deadtime model");
    const auto& dm = *opt.heralded_deadtime;
    tuples = heralded_corrected(kept, dm, 0.0);
    tuples_minus = heralded_corrected(kept, dm, -dm.sigma_tau);
    tuples_plus = heralded_corrected(kept, dm, +dm.sigma_tau);
    rep.provenance["heralded_tau"] = num(dm.tau);
    rep.provenance["heralded_sigma_tau"] = num(dm.sigma_tau);
  } else {
    tuples.reserve(kept.size());
    for (const auto& c : kept) tuples.push_back(c.readings);
  }

  const bool bg = opt.sorkin.background_in_pairwise;
  const auto block = kernels::omp::sorkin_series(tuples, subsets, bg);
  const std::size_t max_lag = std::min(opt.max_lag, (tuples.size() - 1) / 2);

  rep.subsets.resize(subsets.size());
  std::vector<std::exception_ptr> failures(subsets.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(subsets.size()); ++si) {
    const auto s = static_cast<std::size_t>(si);
    try {
      auto& out = rep.subsets[s];
      const auto& eps = block.epsilon[s];
      const auto& del = block.delta[s];
      out.subset = subsets[s];
      out.order = subsets[s].size();
      out.epsilon_summary = stats::summarize(eps);
      out.epsilon_summary.n_removed_outliers = rep.outlier_cycles.size();
      out.autocorrelation_in_band = stats::autocorrelation(eps, max_lag).fraction_in_band();
      out.mean_delta = stats::mean(del);
      out.mean_epsilon = out.epsilon_summary.mean;
      try {
        const auto est = kappa_from_series(subsets[s], eps, del, block.max_reading[s], opt.sorkin);
        out.kappa = est.kappa;
        out.kappa_sem = est.kappa_sem;
      } catch (const UndefinedNormalizationError&) {
        out.defined = false;
        out.kappa = out.kappa_sem = std::nan("");
      }
      bool any_zero_delta = false;
      for (double d : del) any_zero_delta = any_zero_delta || d == 0.0;
      if (!any_zero_delta)
        out.kappa_naive = kappa_naive(eps, del);
      else
        out.kappa_naive = {std::nan(""), std::nan("")};
      if (out.defined) {
        std::vector<double> scaled(eps.size());
        for (std::size_t i = 0; i < eps.size(); ++i) scaled[i] = eps[i] / out.mean_delta;
        out.histogram = stats::histogram(scaled, opt.histogram_bins);
      } else {
        out.histogram = stats::histogram(eps, opt.histogram_bins);
      }
    } catch (...) {
      failures[s] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  for (const auto& r : rep.subsets)
    if (!r.defined)
      rep.warnings.push_back("subset " + r.subset.label() +
                             ": mean delta vanishes, kappa undefined (incoherent paths?)");

  auto order_kappa = [&](const std::vector<RateTuple>& t, int j) {
    const auto list = enumerate_order_subsets(PathSubset::full(n_paths), j);
    const auto b = kernels::omp::sorkin_series(t, list, bg);
    double s = 0.0;
    for (std::size_t i = 0; i < list.size(); ++i)
      s += kappa_from_series(list[i], b.epsilon[i], b.delta[i], b.max_reading[i], opt.sorkin).kappa;
    return s / static_cast<double>(list.size());
  };

  std::size_t first = 0;
  for (int j : orders) {
    const std::size_t count = binomial(n_paths, j);
    MeasuredOrder mo;
    mo.order = j;
    mo.n_subsets = count;
    bool defined = true;
    for (std::size_t i = 0; i < count; ++i) defined = defined && rep.subsets[first + i].defined;
    if (!defined) {
      mo.defined = false;
      mo.kappa = mo.kappa_sem = std::nan("");
      rep.orders.push_back(mo);
      first += count;
      continue;
    }
    std::vector<ValueSem> vs;
    std::vector<std::vector<double>> eps_series;
    std::vector<std::size_t> varying;  // positions with nonzero variance
    for (std::size_t i = 0; i < count; ++i) {
      const auto& r = rep.subsets[first + i];
      vs.push_back({r.kappa, r.kappa_sem});
      if (r.epsilon_summary.std > 0.0) {
        varying.push_back(i);
        eps_series.push_back(block.epsilon[first + i]);
      }
    }
    Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(count),
                                                     static_cast<Eigen::Index>(count));
    if (varying.size() >= 2) {
      const auto sub = stats::crosscorrelation(eps_series);
      for (std::size_t a = 0; a < varying.size(); ++a)
        for (std::size_t b = 0; b < varying.size(); ++b)
          corr(static_cast<Eigen::Index>(varying[a]), static_cast<Eigen::Index>(varying[b])) =
              sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    const auto comb = combine_path_subsets(vs, corr);
    mo.kappa = comb.value;
    mo.kappa_sem = comb.sem;
    if (regime == Regime::heralded) {
      mo.kappa_tau_minus = order_kappa(tuples_minus, j);
      mo.kappa_tau_plus = order_kappa(tuples_plus, j);
    }
    rep.crosscorrelation[j] = std::move(corr);
    rep.orders.push_back(mo);
    first += count;
  }
  return rep;
}

CorrectionReport correct_reports(const std::string& regime, const std::vector<MeasuredOrder>& measured,
                                 const std::vector<PredictedOrder>& predicted) {
  std::set<int> a, b;
  for (const auto& m : measured) a.insert(m.order);
  for (const auto& p : predicted) b.insert(p.order);
  if (a != b || a.size() != measured.size() || b.size() != predicted.size())
    throw InputError("measured and predicted reports cover different orders");
  CorrectionReport r;
  r.regime = regime;
  for (const auto& m : measured) {
    const auto it = std::find_if(predicted.begin(), predicted.end(),
                                 [&](const PredictedOrder& p) { return p.order == m.order; });
    CorrectionRow row;
    row.order = m.order;
    row.kappa = m.kappa;
    row.kappa_sem = m.kappa_sem;
    row.kappa_th = it->kappa_th;
    row.kappa_th_sigma = it->sigma;
    const auto c = corrected_kappa({m.kappa, m.kappa_sem}, {it->kappa_th, it->sigma});
    row.kappa_tilde = c.value;
    row.kappa_tilde_sigma = c.sem;
    r.rows.push_back(row);
  }
  std::sort(r.rows.begin(), r.rows.end(),
            [](const CorrectionRow& x, const CorrectionRow& y) { return x.order < y.order; });
  check_correction_invariant(r);
  return r;
}

std::vector<PredictedOrder> heralded_correction_terms(const std::vector<MeasuredOrder>& measured) {
  std::vector<PredictedOrder> out;
  for (const auto& m : measured) {
    if (!m.kappa_tau_minus || !m.kappa_tau_plus)
      throw InputError("heralded report lacks the tau band for order " + std::to_string(m.order));
    out.push_back({m.order, 0.0, 0.5 * std::abs(*m.kappa_tau_plus - *m.kappa_tau_minus)});
  }
  return out;
}

std::vector<PredictedOrder> predicted_orders(const KappaPrediction& p) {
  std::vector<PredictedOrder> out;
  for (const auto& o : p.orders)
    out.push_back({o.order, o.kappa_th,
                   p.scenario == "max_correlated" ? o.sigma_max_correlated : o.sigma_uncorrelated});
  return out;
}

void check_correction_invariant(const CorrectionReport& r, double rel_tol) {
  for (const auto& row : r.rows) {
    const double t = row.kappa - row.kappa_th;
    const double s = std::hypot(row.kappa_sem, row.kappa_th_sigma);
    const auto close = [&](double x, double y) {
      return std::abs(x - y) <= rel_tol * std::max({std::abs(x), std::abs(y), 1e-300});
    };
    if (!close(t, row.kappa_tilde) || !close(s, row.kappa_tilde_sigma))
      throw InputError("order " + std::to_string(row.order) +
                       ": kappa_tilde row violates kappa_tilde = kappa - kappa_th");
  }
}

}  // namespace sorkin

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sorkin/density_matrix.hpp"
#include "sorkin/detector.hpp"
#include "sorkin/path_subset.hpp"
#include "sorkin/rate_tuple.hpp"

namespace sorkin {

/// Ground truth of the simulated device. The rate for open subset S is
///   p_0 + p_in * sum_{k,l in S} sqrt(T_k T_l) Re(rho_kl exp(i(phi_k - phi_l))).
struct InterferometerModel {
  int n_paths = 0;
  DensityMatrix density;
  std::vector<double> transmissions;
  std::vector<double> mean_phases;
  double input_flux = 1.0;
  double background = 0.0;

  void validate() const;

  /// Balanced device: equal weights, coherence X, unit transmissions, zero phases.
  static InterferometerModel balanced(int n_paths, double input_flux, double coherence = 1.0,
                                      double background = 0.0);
};

/// Rate for `subset` with per-path phase offsets added to the mean phases.
/// An empty `phase_offsets` means no offsets.
double ideal_rate(const InterferometerModel& model, PathSubset subset,
                  std::span<const double> phase_offsets = {});
double ideal_rate(const InterferometerModel& model, PathSubset subset,
                  std::span<const double> phase_offsets, double input_flux);

/// Ideal readings for every subset at the given offsets.
RateTuple ideal_rates(const InterferometerModel& model, std::span<const double> phase_offsets = {});

struct NoiseConfig {
  double sigma_phase = 0.0;      // rad, per path per measurement
  double coherence = 1.0;        // X, folded into the density matrix
  double sigma_power_rel = 0.0;  // sigma_p / p_in, per measurement
  bool shot_noise = false;
  double integration_time = 1.0;  // s per reading, for Poisson sampling
  std::uint64_t seed = 0;

  void validate() const;
};

enum class ShutterOrder { random, canonical };
enum class Regime { classical, semiclassical, heralded };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

struct CampaignConfig {
  InterferometerModel model;
  NoiseConfig noise;
  DetectorModel detector = IdealDetector{};
  Regime regime = Regime::classical;
  int n_cycles = 1;
  ShutterOrder shutter_order = ShutterOrder::random;
  int stabilize_every = 100;
  double phase_drift_step = 0.0;  // rad, per-cycle random-walk step
  double dwell_time = 1.0;        // s per shutter setting, for timestamps
  // Hook for non-Born models: adds e_j * C(|S|, j) to each ideal rate, which
  // gives epsilon_j = e_j on every j-subset and leaves other orders untouched.
  std::map<int, double> injected_epsilon;

  void validate() const;
};

/// Phase-drift schedule: drift[c][k] for cycle c and path k. Random walk with
/// step phase_drift_step, reset to exactly 0 whenever c % stabilize_every == 0.
std::vector<std::vector<double>> phase_drift_schedule(const CampaignConfig& config);

struct MeasurementCycle {
  int index = 0;
  RateTuple readings;
  std::vector<std::uint32_t> draw_order;  // subset mask per draw index
  std::vector<double> timestamps;         // per draw index
  // Heralded regime only, indexed by mask: measured singles and herald rates.
  std::vector<double> singles_rate;
  std::vector<double> herald_rate;
};

struct Campaign {
  CampaignConfig config;
  Regime regime = Regime::classical;
  std::vector<MeasurementCycle> cycles;
};

/// Model with the configured coherence folded into the density matrix.
InterferometerModel effective_model(const CampaignConfig& config);

/// One shutter cycle. The RNG is derived from (seed, cycle_index), so a cycle
/// can be generated independently of all others. `model` must come from
/// effective_model(config).
MeasurementCycle simulate_cycle(const CampaignConfig& config, const InterferometerModel& model,
                                int cycle_index, std::span<const double> drift);

Campaign run_campaign(const CampaignConfig& config);

/// Closed-form spread of epsilon_3 for a balanced 3-path device at the
/// constructive point, single-path rate p.
struct SigmaEpsilon3 {
  double phase = 0.0;  // sqrt(60) p sigma_phi^2 (~7.7 p sigma_phi^2)
  double power = 0.0;  // 2 sqrt(33) p sigma_p/p_in
  double count = 0.0;  // 2 sqrt(6) sqrt(p)
  double combined = 0.0;
};
SigmaEpsilon3 predict_sigma_epsilon3(double p, double sigma_phase, double sigma_power_rel,
                                     bool shot);

/// sigma_kappa3 ~ (1/sqrt 3) sqrt(5 sigma_phi^4 + 11 (sigma_p/p_in)^2 + 2/p).
double predict_sigma_kappa3(double p, double sigma_phase, double sigma_power_rel);

}  // namespace sorkin

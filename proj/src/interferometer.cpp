#include "sorkin/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "sorkin/error.hpp"
#include "sorkin/kernels.hpp"
#include "sorkin/rng.hpp"

namespace sorkin {

void InterferometerModel::validate() const {
  if (n_paths < 1 || n_paths > PathSubset::kMaxPaths)
    throw ModelError("n_paths must be in [1, 16]");
  if (density.dim() != n_paths) throw ModelError("density matrix dimension differs from n_paths");
  if (!density.is_physical()) throw ModelError("density matrix is not positive semidefinite");
  if (static_cast<int>(transmissions.size()) != n_paths)
    throw ModelError("need one transmission per path");
  if (static_cast<int>(mean_phases.size()) != n_paths)
    throw ModelError("need one mean phase per path");
  for (double t : transmissions)
    if (!(t >= 0.0 && t <= 1.0)) throw ModelError("transmissions must lie in [0, 1]");
  for (double p : mean_phases)
    if (!std::isfinite(p)) throw ModelError("mean phases must be finite");
  if (!(input_flux >= 0.0) || !std::isfinite(input_flux)) throw ModelError("input flux must be >= 0");
  if (!(background >= 0.0)) throw ModelError("background must be >= 0");
}

InterferometerModel InterferometerModel::balanced(int n_paths, double input_flux,
                                                  double coherence, double background) {
  InterferometerModel m;
  m.n_paths = n_paths;
  const std::vector<double> w(static_cast<std::size_t>(n_paths), 1.0);
  m.density = DensityMatrix::partially_coherent(w, coherence);
  m.transmissions.assign(static_cast<std::size_t>(n_paths), 1.0);
  m.mean_phases.assign(static_cast<std::size_t>(n_paths), 0.0);
  m.input_flux = input_flux;
  m.background = background;
  return m;
}

double ideal_rate(const InterferometerModel& model, PathSubset subset,
                  std::span<const double> phase_offsets, double input_flux) {
  if (!phase_offsets.empty() && static_cast<int>(phase_offsets.size()) != model.n_paths)
    throw ParameterError("need one phase offset per path");
  if (!subset.is_subset_of(PathSubset::full(model.n_paths)))
    throw ParameterError("subset outside the device's path set");
  const auto& rho = model.density.matrix();
  const auto paths = subset.paths();
  double sum = 0.0;
  for (std::size_t a = 0; a < paths.size(); ++a) {
    const int k = paths[a];
    sum += model.transmissions[k] * rho(k, k).real();
    const double phk = model.mean_phases[k] + (phase_offsets.empty() ? 0.0 : phase_offsets[k]);
    for (std::size_t b = a + 1; b < paths.size(); ++b) {
      const int l = paths[b];
      const double phl = model.mean_phases[l] + (phase_offsets.empty() ? 0.0 : phase_offsets[l]);
      const std::complex<double> z = rho(k, l) * std::polar(1.0, phk - phl);
      // kl and lk terms are complex conjugates.
      sum += 2.0 * std::sqrt(model.transmissions[k] * model.transmissions[l]) * z.real();
    }
  }
  return model.background + input_flux * sum;
}

double ideal_rate(const InterferometerModel& model, PathSubset subset,
                  std::span<const double> phase_offsets) {
  return ideal_rate(model, subset, phase_offsets, model.input_flux);
}

RateTuple ideal_rates(const InterferometerModel& model, std::span<const double> phase_offsets) {
  RateTuple r(model.n_paths);
  for (std::uint32_t m = 0; m < r.size(); ++m)
    r.set(PathSubset(m), ideal_rate(model, PathSubset(m), phase_offsets));
  return r;
}

void NoiseConfig::validate() const {
  if (!(sigma_phase >= 0.0) || !(sigma_power_rel >= 0.0))
    throw ModelError("noise standard deviations must be >= 0");
  if (!(coherence >= 0.0 && coherence <= 1.0)) throw ModelError("coherence must lie in [0, 1]");
  if (shot_noise && !(integration_time > 0.0))
    throw ModelError("shot noise needs a positive integration time");
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::classical: return "classical";
    case Regime::semiclassical: return "semiclassical";
    case Regime::heralded: return "heralded";
  }
  return "classical";
}

Regime regime_from_string(const std::string& s) {
  if (s == "classical") return Regime::classical;
  if (s == "semiclassical" || s == "semi-classical") return Regime::semiclassical;
  if (s == "heralded" || s == "quantum") return Regime::heralded;
  throw InputError("unknown regime: " + s);
}

void CampaignConfig::validate() const {
  model.validate();
  noise.validate();
  if (n_cycles < 1) throw ModelError("n_cycles must be >= 1");
  if (stabilize_every < 1) throw ModelError("stabilize_every must be >= 1");
  if (!(phase_drift_step >= 0.0)) throw ModelError("phase_drift_step must be >= 0");
  if (!(dwell_time > 0.0)) throw ModelError("dwell_time must be > 0");
  for (const auto& [order, value] : injected_epsilon) {
    if (order < 2 || order > model.n_paths) throw ModelError("injected epsilon order out of range");
    if (!std::isfinite(value)) throw ModelError("injected epsilon must be finite");
  }
  if (const auto* t = std::get_if<PolynomialTransfer>(&detector)) t->validate();
  if (const auto* d = std::get_if<DeadtimeModel>(&detector)) d->validate();
  if (const auto* h = std::get_if<HeraldedDetector>(&detector)) {
    h->deadtime.validate();
    if (!(h->herald_efficiency > 0.0 && h->herald_efficiency <= 1.0))
      throw ModelError("herald efficiency must lie in (0, 1]");
    if (!(h->herald_rate >= 0.0)) throw ModelError("herald rate must be >= 0");
  }
}

InterferometerModel effective_model(const CampaignConfig& config) {
  InterferometerModel m = config.model;
  if (config.noise.coherence < 1.0) m.density = m.density.with_coherence(config.noise.coherence);
  return m;
}

std::vector<std::vector<double>> phase_drift_schedule(const CampaignConfig& config) {
  const auto n = static_cast<std::size_t>(config.model.n_paths);
  std::vector<std::vector<double>> drift(static_cast<std::size_t>(config.n_cycles),
                                         std::vector<double>(n, 0.0));
  if (config.phase_drift_step == 0.0) return drift;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int c = 0; c < config.n_cycles; ++c) {
    if (c % config.stabilize_every == 0) continue;  // re-zeroed by stabilization
    auto eng = rng::make_engine(config.noise.seed, rng::Stream::phase_drift,
                                static_cast<std::uint64_t>(c));
    for (std::size_t k = 0; k < n; ++k)
      drift[c][k] = drift[c - 1][k] + config.phase_drift_step * gauss(eng);
  }
  return drift;
}

namespace {

constexpr double kPoissonExactLimit = 1e6;

template <class Engine>
double sample_counts(double rate, double t, Engine& eng) {
  const double mean = rate * t;
  if (mean <= 0.0) return 0.0;
  if (mean < kPoissonExactLimit) {
    std::poisson_distribution<long long> pois(mean);
    return static_cast<double>(pois(eng)) / t;
  }
  std::normal_distribution<double> g(mean, std::sqrt(mean));
  return g(eng) / t;
}

std::vector<std::uint32_t> canonical_masks(int n_paths) {
  std::vector<std::uint32_t> out;
  for (PathSubset s : all_subsets(PathSubset::full(n_paths))) out.push_back(s.mask());
  return out;
}

}  // namespace

MeasurementCycle simulate_cycle(const CampaignConfig& config, const InterferometerModel& model,
                                int cycle_index, std::span<const double> drift) {
  const int n = model.n_paths;
  const std::size_t n_settings = std::size_t{1} << n;
  auto eng = rng::make_engine(config.noise.seed, rng::Stream::cycle_noise,
                              static_cast<std::uint64_t>(cycle_index));
  std::normal_distribution<double> gauss(0.0, 1.0);

  MeasurementCycle cyc;
  cyc.index = cycle_index;
  cyc.readings = RateTuple(n);
  cyc.draw_order = canonical_masks(n);
  if (config.shutter_order == ShutterOrder::random)
    std::shuffle(cyc.draw_order.begin(), cyc.draw_order.end(), eng);
  cyc.timestamps.resize(n_settings);

  const auto* herald = std::get_if<HeraldedDetector>(&config.detector);
  if (herald) {
    cyc.singles_rate.assign(n_settings, 0.0);
    cyc.herald_rate.assign(n_settings, 0.0);
  }

  std::vector<double> offsets(static_cast<std::size_t>(n));
  for (std::size_t d = 0; d < n_settings; ++d) {
    const std::uint32_t mask = cyc.draw_order[d];
    const PathSubset subset(mask);
    const double power = model.input_flux * (1.0 + config.noise.sigma_power_rel * gauss(eng));
    for (int k = 0; k < n; ++k)
      offsets[k] = (drift.empty() ? 0.0 : drift[k]) + config.noise.sigma_phase * gauss(eng);

    double rate = ideal_rate(model, subset, offsets, power);
    for (const auto& [order, value] : config.injected_epsilon)
      rate += value * static_cast<double>(binomial(subset.size(), order));

    double reading = rate;
    if (const auto* t = std::get_if<PolynomialTransfer>(&config.detector)) {
      reading = reading_from_power(*t, rate);
    } else if (const auto* dt = std::get_if<DeadtimeModel>(&config.detector)) {
      reading = measured_rate_deadtime(*dt, rate);
    } else if (herald) {
      const auto& dm = herald->deadtime;
      const double p_i = rate / herald->herald_efficiency;
      const double v_i = measured_rate_deadtime(dm, p_i);
      const double v_h = measured_rate_deadtime(dm, herald->herald_rate);
      reading = blind_coincidences(rate, v_i, v_h, dm.tau);
      cyc.singles_rate[mask] = v_i;
      cyc.herald_rate[mask] = v_h;
    }
    if (config.noise.shot_noise) reading = sample_counts(reading, config.noise.integration_time, eng);

    cyc.readings.set(subset, reading);
    cyc.timestamps[d] =
        (static_cast<double>(cycle_index) * static_cast<double>(n_settings) + static_cast<double>(d)) *
        config.dwell_time;
  }
  return cyc;
}

Campaign run_campaign(const CampaignConfig& config) {
  config.validate();
  Campaign c;
  c.config = config;
  c.regime = config.regime;
  const InterferometerModel model = effective_model(config);
  const auto drift = phase_drift_schedule(config);
  c.cycles = kernels::omp::generate_cycles(config, model, drift);
  return c;
}

SigmaEpsilon3 predict_sigma_epsilon3(double p, double sigma_phase, double sigma_power_rel,
                                     bool shot) {
  if (p < 0.0) throw ParameterError("single-path rate must be >= 0");
  SigmaEpsilon3 s;
  s.phase = std::sqrt(60.0) * p * sigma_phase * sigma_phase;
  s.power = 2.0 * std::sqrt(33.0) * p * sigma_power_rel;
  s.count = shot ? 2.0 * std::sqrt(6.0) * std::sqrt(p) : 0.0;
  s.combined = std::sqrt(s.phase * s.phase + s.power * s.power + s.count * s.count);
  return s;
}

double predict_sigma_kappa3(double p, double sigma_phase, double sigma_power_rel) {
  if (!(p > 0.0)) throw ParameterError("single-path rate must be > 0");
  const double s2 = sigma_phase * sigma_phase;
  const double shot = std::isinf(p) ? 0.0 : 2.0 / p;
  return std::sqrt(5.0 * s2 * s2 + 11.0 * sigma_power_rel * sigma_power_rel + shot) / std::sqrt(3.0);
}

}  // namespace sorkin

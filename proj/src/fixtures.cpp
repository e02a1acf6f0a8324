#include "sorkin/fixtures.hpp"

#include <array>
#include <cmath>

namespace sorkin::fixtures {

namespace {
constexpr std::array<double, 5> kWeights{0.21, 0.19, 0.20, 0.22, 0.18};
}

PolynomialTransfer photoreceiver_transfer() {
  PolynomialTransfer t;
  t.coefficients = {-59.8e-6, 3.1e-6};
  t.covariance.resize(2, 2);
  t.covariance << 496e-13, -45e-13, -45e-13, 4.2e-13;
  t.domain = {0.0, 12.0};
  return t;
}

DeadtimeModel counting_deadtime() { return {33.9e-9, 0.3e-9, 150.0}; }

double five_path_coherence() {
  double sum = 0.0, sq = 0.0;
  for (double w : kWeights) sum += w;
  for (double w : kWeights) sq += (w / sum) * (w / sum);
  // Tr rho^2 = sum r_k^2 + X^2 (1 - sum r_k^2)
  return std::sqrt((kFixturePurity - sq) / (1.0 - sq));
}

DensityMatrix five_path_state() {
  return DensityMatrix::partially_coherent(kWeights, five_path_coherence());
}

namespace {

CampaignConfig base(std::uint64_t seed, int cycles, double flux) {
  CampaignConfig c;
  c.model.n_paths = 5;
  c.model.density = five_path_state();
  c.model.transmissions.assign(5, 1.0);
  c.model.mean_phases.assign(5, 0.0);
  c.model.input_flux = flux;
  c.noise.seed = seed;
  c.n_cycles = cycles;
  return c;
}

}  // namespace

CampaignConfig classical_campaign(std::uint64_t seed, int cycles) {
  auto c = base(seed, cycles, kClassicalFlux);
  c.regime = Regime::classical;
  c.detector = photoreceiver_transfer();
  c.noise.sigma_power_rel = 1e-3;
  return c;
}

CampaignConfig semiclassical_campaign(std::uint64_t seed, int cycles) {
  auto c = base(seed, cycles, kSemiclassicalFlux);
  c.regime = Regime::semiclassical;
  c.detector = counting_deadtime();
  c.noise.sigma_power_rel = 1e-2;
  c.noise.shot_noise = true;
  c.noise.integration_time = 10.0;
  return c;
}

CampaignConfig heralded_campaign(std::uint64_t seed, int cycles) {
  auto c = base(seed, cycles, kHeraldedFlux);
  c.regime = Regime::heralded;
  HeraldedDetector h;
  h.deadtime = counting_deadtime();
  h.herald_rate = 2.0e5;
  h.herald_efficiency = 0.1;
  c.detector = h;
  c.noise.sigma_power_rel = 1e-2;
  c.noise.shot_noise = true;
  c.noise.integration_time = 10.0;
  return c;
}

}  // namespace sorkin::fixtures

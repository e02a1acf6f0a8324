#pragma once

#include <cstdint>

#include "sorkin/density_matrix.hpp"
#include "sorkin/detector.hpp"
#include "sorkin/interferometer.hpp"

// Reference devices and detectors shared by tests, benchmarks and the CLI.
namespace sorkin::fixtures {

/// Photoreceiver: a = (-59.8, 3.1)e-6, C = [[496, -45], [-45, 4.2]]e-13, domain [0, 12] V.
PolynomialTransfer photoreceiver_transfer();

/// Counting module: tau = 33.9 ns, sigma_tau = 0.3 ns, 150 dark counts/s.
DeadtimeModel counting_deadtime();

inline constexpr double kFixturePurity = 0.74;

/// Slightly unbalanced 5-path state with uniform coherence chosen so that Tr rho^2 = 0.74.
DensityMatrix five_path_state();
double five_path_coherence();

inline constexpr double kClassicalFlux = 2.25;        // V, summed single-path level
inline constexpr double kSemiclassicalFlux = 3.0e4;   // counts/s
inline constexpr double kHeraldedFlux = 2.0e3;        // coincidences/s

/// Laser campaign: photoreceiver nonlinearity, 0.1% power noise.
CampaignConfig classical_campaign(std::uint64_t seed, int cycles = 5618);
/// Unheralded photons: deadtime saturation, shot noise.
CampaignConfig semiclassical_campaign(std::uint64_t seed, int cycles = 1912);
/// Heralded photons: coincidence counting with herald-arm blinding.
CampaignConfig heralded_campaign(std::uint64_t seed, int cycles = 1912);

}  // namespace sorkin::fixtures

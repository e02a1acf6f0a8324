// sorkinlab: simulate, analyze, calibrate, predict, correct, selftest.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sorkin/calibration.hpp"
#include "sorkin/error.hpp"
#include "sorkin/fixtures.hpp"
#include "sorkin/interferometer.hpp"
#include "sorkin/io.hpp"
#include "sorkin/pipeline.hpp"
#include "sorkin/tomography.hpp"

namespace fs = std::filesystem;
using namespace sorkin;
using io::Json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string slurp_stream(const std::function<void(std::ostream&)>& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open " + p.string());
  return in;
}

std::vector<int> orders_from_flag(const std::optional<int>& order) {
  if (!order) return {};
  return {*order};
}

// simulate --------------------------------------------------------------------

struct SimulateArgs {
  std::string config, out, regime;
  std::optional<std::uint64_t> seed;
  std::optional<int> cycles;
};

int cmd_simulate(const SimulateArgs& a) {
  Json cfg_json = io::read_json(a.config);
  if (a.seed) cfg_json["seed"] = *a.seed;
  if (!a.regime.empty()) cfg_json["regime"] = a.regime;
  if (a.cycles) cfg_json["n_cycles"] = *a.cycles;
  const auto cfg = io::config_from_json(cfg_json);
  const auto campaign = run_campaign(cfg);

  const fs::path out(a.out);
  io::write_text_atomic(out / "campaign.csv",
                        slurp_stream([&](std::ostream& os) { io::write_campaign_csv(os, campaign.cycles); }));
  if (cfg.regime == Regime::heralded)
    io::write_text_atomic(out / "sideband.csv",
                          slurp_stream([&](std::ostream& os) { io::write_sideband_csv(os, campaign.cycles); }));
  Json snap = io::config_to_json(cfg);
  snap["config_hash"] = io::config_hash(io::config_to_json(cfg));
  io::write_json(out / "config.json", snap);
  std::cout << "simulated " << campaign.cycles.size() << " cycles x " << (1u << cfg.model.n_paths)
            << " settings (" << to_string(cfg.regime) << ") -> " << (out / "campaign.csv").string() << "\n";
  return 0;
}

// analyze ---------------------------------------------------------------------

struct AnalyzeArgs {
  std::string campaign, out, regime = "classical", sideband, transfer, config;
  std::optional<int> order;
  double alpha = 0.01;
  bool no_grubbs = false;
  std::size_t bins = 50;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const Regime regime = regime_from_string(a.regime);
  auto in = open_in(a.campaign);
  auto data = io::read_campaign_csv(in);

  AnalysisOptions opt;
  opt.grubbs_alpha = a.alpha;
  opt.grubbs = !a.no_grubbs;
  opt.histogram_bins = a.bins;
  opt.orders = orders_from_flag(a.order);
  if (regime == Regime::heralded) {
    if (a.sideband.empty() || a.transfer.empty())
      throw InputError("heralded analysis needs --sideband and --transfer (deadtime model)");
    auto sb = open_in(a.sideband);
    io::read_sideband_csv(sb, data);
    const auto det = io::detector_from_json(io::read_json(a.transfer));
    if (const auto* d = std::get_if<DeadtimeModel>(&det))
      opt.heralded_deadtime = *d;
    else if (const auto* h = std::get_if<HeraldedDetector>(&det))
      opt.heralded_deadtime = h->deadtime;
    else
      throw InputError("heralded analysis needs a deadtime transfer");
  }

  auto rep = analyze_campaign(data.cycles, data.n_paths, regime, opt);
  rep.provenance["input_hash"] = io::hex64(io::fnv1a64(io::read_text(a.campaign)));
  rep.provenance["version"] = kVersion;
  if (!a.config.empty()) {
    const auto snap = io::read_json(a.config);
    if (snap.contains("seed")) rep.provenance["seed"] = snap.at("seed").dump();
    if (snap.contains("config_hash")) rep.provenance["config_hash"] = snap.at("config_hash").get<std::string>();
  }

  const fs::path out(a.out);
  io::write_json(out / "analysis.json", io::analysis_to_json(rep));
  for (const auto& s : rep.subsets)
    io::write_text_atomic(out / "histograms" / ("epsilon_" + s.subset.label() + ".csv"),
                          slurp_stream([&](std::ostream& os) { io::write_histogram_csv(os, s.histogram); }));
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  std::printf("%-6s %14s %12s %9s\n", "order", "<kappa>", "sem", "subsets");
  for (const auto& o : rep.orders)
    std::printf("%-6d %14.4e %12.4e %9zu\n", o.order, o.kappa, o.kappa_sem, o.n_subsets);
  std::printf("cycles used %zu of %zu (%zu outlier, %zu incomplete)\n", rep.cycles_used, rep.cycles_total,
              rep.outlier_cycles.size(), rep.incomplete_cycles.size());
  return 0;
}

// calibrate -------------------------------------------------------------------

struct CalibrateArgs {
  std::string data, out, mode = "polynomial";
  int n_max = 5;
  int window = 101;
  double theta = 0.01;
};

int cmd_calibrate(const CalibrateArgs& a) {
  auto in = open_in(a.data);
  const auto data = io::read_calibration_csv(in);
  CalibrationOptions opt;
  opt.n_max = a.n_max;
  opt.window = a.window;
  opt.theta = a.theta;
  const fs::path out(a.out);

  if (a.mode == "deadtime") {
    const auto fit = fit_deadtime(data, opt);
    io::write_json(out / "transfer.json", io::detector_to_json(fit.model));
    io::write_json(out / "calibration.json", Json{{"kind", "calibration"},
                                                  {"mode", "deadtime"},
                                                  {"tau", fit.model.tau},
                                                  {"sigma_tau", fit.model.sigma_tau},
                                                  {"residual", fit.residual},
                                                  {"tau_max", fit.tau_max}});
    std::printf("tau = %.4e s +- %.2e s\n", fit.model.tau, fit.model.sigma_tau);
    return 0;
  }
  if (a.mode != "polynomial") throw InputError("--mode must be polynomial or deadtime");

  const auto sel = select_order(data, opt);
  const auto fit = fit_polynomial_nl(data, sel.chosen_degree, opt);
  io::write_json(out / "transfer.json", io::transfer_to_json(fit.transfer));
  io::write_json(out / "calibration.json", io::selection_to_json(sel, fit.diagnostics));
  io::write_text_atomic(out / "sigma_band.csv", slurp_stream([&](std::ostream& os) {
                          os << "V,f_nl,sigma_f\n";
                          const auto& t = fit.transfer;
                          for (int i = 0; i <= 200; ++i) {
                            const double v = t.domain[0] + (t.domain[1] - t.domain[0]) * i / 200.0;
                            char buf[96];
                            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", v, t.nonlinear_part(v),
                                          transfer_sigma(t, v));
                            os << buf;
                          }
                        }));
  for (const auto& [n, x] : sel.x_table) std::printf("X(%d) = %.6e\n", n, x);
  std::printf("degree %d%s\n", sel.chosen_degree, sel.significant ? "" : " (no significant nonlinearity)");
  for (std::size_t i = 0; i < fit.transfer.coefficients.size(); ++i)
    std::printf("a%zu = %.4e +- %.2e\n", i + 2, fit.transfer.coefficients[i],
                std::sqrt(fit.transfer.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))));
  return 0;
}

// predict ---------------------------------------------------------------------

struct PredictArgs {
  std::string density, transfer, out, scenario = "uncorrelated";
  std::optional<double> flux, background;
  std::optional<int> order;
  std::uint64_t seed = 1;
  int n_mc = 10000;
};

int cmd_predict(const PredictArgs& a) {
  const auto dens = io::density_from_json(io::read_json(a.density));
  const auto det = io::detector_from_json(io::read_json(a.transfer));
  const double flux = a.flux ? *a.flux : dens.flux.value_or(0.0);
  if (!(flux > 0.0)) throw InputError("flux unknown: pass --flux or include 'flux' in the density file");
  const double bg = a.background ? *a.background : dens.background.value_or(0.0);
  if (a.scenario != "uncorrelated" && a.scenario != "max_correlated")
    throw InputError("--scenario must be uncorrelated or max_correlated");

  KappaThOptions opt;
  opt.seed = a.seed;
  opt.n_mc = a.n_mc;
  opt.orders = orders_from_flag(a.order);
  auto pred = kappa_th(dens.rho, flux, {}, bg, det, opt);
  if (std::holds_alternative<PolynomialTransfer>(det)) pred.scenario = a.scenario;

  std::map<std::string, std::string> prov{{"seed", std::to_string(a.seed)},
                                          {"n_mc", std::to_string(a.n_mc)},
                                          {"flux", std::to_string(flux)},
                                          {"background", std::to_string(bg)},
                                          {"inverse", "first_order_2p_minus_f"},
                                          {"version", kVersion}};
  io::write_json(fs::path(a.out) / "prediction.json", io::prediction_to_json(pred, prov));
  std::printf("%-6s %14s %12s   (%s)\n", "order", "kappa_th", "sigma", pred.scenario.c_str());
  for (const auto& p : predicted_orders(pred)) std::printf("%-6d %14.4e %12.4e\n", p.order, p.kappa_th, p.sigma);
  return 0;
}

// correct ---------------------------------------------------------------------

struct CorrectArgs {
  std::string analysis, prediction, out;
};

int cmd_correct(const CorrectArgs& a) {
  std::string regime;
  const auto measured = io::measured_orders_from_json(io::read_json(a.analysis), regime);
  std::vector<PredictedOrder> predicted;
  if (!a.prediction.empty())
    predicted = io::predicted_orders_from_json(io::read_json(a.prediction));
  else if (regime == "heralded")
    predicted = heralded_correction_terms(measured);
  else
    throw InputError("--prediction is required outside the heralded regime");

  auto rep = correct_reports(regime, measured, predicted);
  rep.provenance["version"] = kVersion;
  rep.provenance["analysis_hash"] = io::hex64(io::fnv1a64(io::read_text(a.analysis)));
  if (!a.prediction.empty()) rep.provenance["prediction_hash"] = io::hex64(io::fnv1a64(io::read_text(a.prediction)));
  io::write_json(fs::path(a.out) / "corrected.json", io::correction_to_json(rep));
  std::printf("%-6s %12s %10s %12s %10s %12s %10s\n", "order", "<kappa>", "sem", "kappa_th", "sigma",
              "kappa~", "sigma");
  for (const auto& r : rep.rows)
    std::printf("%-6d %12.3e %10.2e %12.3e %10.2e %12.3e %10.2e\n", r.order, r.kappa, r.kappa_sem, r.kappa_th,
                r.kappa_th_sigma, r.kappa_tilde, r.kappa_tilde_sigma);
  return 0;
}

// fixture ---------------------------------------------------------------------

int cmd_fixture(const std::string& out_dir, std::uint64_t seed) {
  const fs::path out(out_dir);
  io::write_json(out / "config_classical.json", io::config_to_json(fixtures::classical_campaign(seed, 500)));
  io::write_json(out / "config_semiclassical.json",
                 io::config_to_json(fixtures::semiclassical_campaign(seed, 500)));
  io::write_json(out / "config_heralded.json", io::config_to_json(fixtures::heralded_campaign(seed, 500)));
  io::write_json(out / "density.json",
                 io::density_to_json(fixtures::five_path_state(), fixtures::kClassicalFlux, 0.0));
  io::write_json(out / "density_semiclassical.json",
                 io::density_to_json(fixtures::five_path_state(), fixtures::kSemiclassicalFlux, 0.0));
  io::write_json(out / "transfer_classical.json", io::transfer_to_json(fixtures::photoreceiver_transfer()));
  io::write_json(out / "transfer_deadtime.json", io::detector_to_json(fixtures::counting_deadtime()));
  // Cover the full photoreceiver range so the fitted domain spans every campaign reading.
  PolynomialRamp ramp;
  ramp.beam1_max = ramp.beam2_max = 5.9;
  auto truth = fixtures::photoreceiver_transfer();
  io::write_text_atomic(out / "beams_polynomial.csv", slurp_stream([&](std::ostream& os) {
                          io::write_calibration_csv(os, synthesize_polynomial_dataset(truth, ramp, seed));
                        }));
  io::write_text_atomic(out / "beams_deadtime.csv", slurp_stream([&](std::ostream& os) {
                          io::write_calibration_csv(
                              os, synthesize_deadtime_dataset(fixtures::counting_deadtime().tau, {}, seed));
                        }));
  std::cout << "fixtures written to " << out.string() << "\n";
  return 0;
}

// selftest --------------------------------------------------------------------

int cmd_selftest() {
  int failed = 0;
  auto check = [&](const char* name, bool ok) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
    failed += ok ? 0 : 1;
  };

  {
    auto cfg = fixtures::classical_campaign(3, 20);
    cfg.detector = IdealDetector{};
    cfg.noise = {};
    cfg.noise.seed = 3;
    const auto c = run_campaign(cfg);
    double worst = 0.0;
    for (const auto& cyc : c.cycles)
      for (int j = 3; j <= 5; ++j)
        for (PathSubset s : enumerate_order_subsets(PathSubset::full(5), j))
          worst = std::max(worst, std::abs(epsilon(cyc.readings, s)) / cyc.readings.max_abs());
    check("born-rule null (noise-free epsilon <= 1e-12 max reading)", worst <= 1e-12);
  }
  {
    const auto rho = fixtures::five_path_state();
    const auto rec = reconstruct_density(synthesize_tomography(rho, 2.0, 0.01, default_phase_scan()));
    check("tomography round trip", frobenius_distance(rec.rho, rho) <= 1e-9 &&
                                       std::abs(purity(rec.rho) - fixtures::kFixturePurity) <= 1e-6);
  }
  {
    const auto d = fixtures::counting_deadtime();
    const double p_c = 1.2e3, v_i = 4.0e4, v_h = 1.9e5;
    const double v_c = blind_coincidences(p_c, v_i, v_h, d.tau);
    check("heralded correction round trip", std::abs(correct_heralded(v_i, v_h, v_c, d.tau) / p_c - 1.0) <= 1e-9);
  }
  {
    PolynomialRamp ramp;
    ramp.records = 600;
    const auto data = synthesize_polynomial_dataset(fixtures::photoreceiver_transfer(), ramp, 5);
    CalibrationOptions opt;
    opt.n_max = 4;
    check("calibration order selection (cubic truth)", select_order(data, opt).chosen_degree == 3);
  }
  {
    const std::vector<MeasuredOrder> m{{.order = 3, .kappa = 9.7e-5, .kappa_sem = 0.1e-5}};
    const std::vector<PredictedOrder> p{{3, 9.7e-5, 3.1e-5}};
    const auto r = correct_reports("classical", m, p);
    check("correction arithmetic", std::abs(r.rows[0].kappa_tilde) < 1e-20 &&
                                       std::abs(r.rows[0].kappa_tilde_sigma - std::hypot(0.1e-5, 3.1e-5)) < 1e-20);
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis of multi-path interference null tests"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "generate a campaign from a JSON config");
  s->add_option("--config", sim.config, "campaign config JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--out", sim.out, "output directory")->required();
  s->add_option("--seed", sim.seed, "override the config seed");
  s->add_option("--regime", sim.regime, "override the regime")
      ->check(CLI::IsMember({"classical", "semiclassical", "heralded"}));
  s->add_option("--cycles", sim.cycles, "override n_cycles")->check(CLI::PositiveNumber);

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "estimate kappa per subset and order");
  a->add_option("campaign", an.campaign, "campaign CSV")->required()->check(CLI::ExistingFile);
  a->add_option("--out", an.out, "output directory")->required();
  a->add_option("--regime", an.regime)->check(CLI::IsMember({"classical", "semiclassical", "heralded"}));
  a->add_option("--order", an.order, "restrict to one order")->check(CLI::IsMember({3, 4, 5}));
  a->add_option("--sideband", an.sideband, "heralded singles/herald rates CSV")->check(CLI::ExistingFile);
  a->add_option("--transfer", an.transfer, "deadtime model JSON (heralded)")->check(CLI::ExistingFile);
  a->add_option("--config", an.config, "config snapshot, recorded in provenance")->check(CLI::ExistingFile);
  a->add_option("--alpha", an.alpha, "Grubbs significance")->check(CLI::Range(1e-9, 0.5));
  a->add_flag("--no-grubbs", an.no_grubbs, "skip outlier filtering");
  a->add_option("--bins", an.bins, "histogram bins")->check(CLI::PositiveNumber);

  CalibrateArgs ca;
  auto* c = app.add_subcommand("calibrate", "fit a detector transfer from beam-combination data");
  c->add_option("data", ca.data, "beam-combination CSV")->required()->check(CLI::ExistingFile);
  c->add_option("--out", ca.out, "output directory")->required();
  c->add_option("--mode", ca.mode)->check(CLI::IsMember({"polynomial", "deadtime"}));
  c->add_option("--n-max", ca.n_max, "highest degree tried")->check(CLI::Range(2, 12));
  c->add_option("--window", ca.window, "floating std window")->check(CLI::Range(3, 100001));
  c->add_option("--theta", ca.theta, "order selection threshold")->check(CLI::Range(0.0, 1.0));

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "kappa_th from a density matrix and a detector model");
  p->add_option("--density", pr.density, "density JSON")->required()->check(CLI::ExistingFile);
  p->add_option("--transfer", pr.transfer, "detector JSON")->required()->check(CLI::ExistingFile);
  p->add_option("--out", pr.out, "output directory")->required();
  p->add_option("--flux", pr.flux, "total single-path flux");
  p->add_option("--background", pr.background, "background rate");
  p->add_option("--order", pr.order)->check(CLI::IsMember({3, 4, 5}));
  p->add_option("--seed", pr.seed, "Monte-Carlo seed");
  p->add_option("--n-mc", pr.n_mc, "Monte-Carlo trials")->check(CLI::Range(2, 100000000));
  p->add_option("--scenario", pr.scenario)->check(CLI::IsMember({"uncorrelated", "max_correlated"}));

  CorrectArgs co;
  auto* k = app.add_subcommand("correct", "kappa_tilde = <kappa> - kappa_th");
  k->add_option("--analysis", co.analysis, "analysis report JSON")->required()->check(CLI::ExistingFile);
  k->add_option("--prediction", co.prediction, "prediction report JSON")->check(CLI::ExistingFile);
  k->add_option("--out", co.out, "output directory")->required();

  auto* t = app.add_subcommand("selftest", "quick internal consistency checks");

  std::string fx_out;
  std::uint64_t fx_seed = 1;
  auto* f = app.add_subcommand("fixture", "write reference configs, detector models and calibration data");
  f->add_option("--out", fx_out, "output directory")->required();
  f->add_option("--seed", fx_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*a) return cmd_analyze(an);
    if (*c) return cmd_calibrate(ca);
    if (*p) return cmd_predict(pr);
    if (*k) return cmd_correct(co);
    if (*t) return cmd_selftest();
    if (*f) return cmd_fixture(fx_out, fx_seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_domain_error() ? 3 : 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

#include "sorkin/io.hpp"

#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "sorkin/error.hpp"

namespace sorkin::io {

namespace fs = std::filesystem;

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_atomic(const fs::path& p, std::string_view text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

Json read_json(const fs::path& p) {
  const auto text = read_text(p);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

void write_json(const fs::path& p, const Json& j) { write_text_atomic(p, j.dump(2) + "\n"); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string config_hash(const Json& j) { return hex64(fnv1a64(j.dump())); }

namespace {

// Typed field access with InputError on wrong type.
template <class T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, key) : fallback;
}

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw InputError(std::string(where) + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw InputError(std::string(where) + ": unknown field '" + k + "'");
  }
}

Eigen::MatrixXd matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be a nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows)
      throw InputError(std::string(what) + " must be square");
    for (Eigen::Index c = 0; c < rows; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number())
        throw InputError(std::string(what) + " entries must be numbers");
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\n')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && s[b] == ' ') ++b;
  return s.substr(b);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

long long to_int(const std::string& s, std::size_t line) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("line " + std::to_string(line) + ": not an integer: '" + s + "'");
  }
}

// Reads header and returns data rows with their line numbers.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_rows(std::istream& is,
                                                                        std::string_view header) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw InputError("empty file");
  if (trim(line) != header)
    throw InputError("unexpected header '" + trim(line) + "', expected '" + std::string(header) + "'");
  const std::size_t cols = split(std::string(header)).size();
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  while (std::getline(is, line)) {
    ++n;
    if (trim(line).empty()) continue;
    auto f = split(trim(line));
    if (f.size() != cols)
      throw InputError("line " + std::to_string(n) + ": expected " + std::to_string(cols) + " fields");
    rows.emplace_back(n, std::move(f));
  }
  return rows;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ShutterOrder shutter_order_from_string(const std::string& s) {
  if (s == "random") return ShutterOrder::random;
  if (s == "canonical") return ShutterOrder::canonical;
  throw InputError("shutter_order must be 'random' or 'canonical'");
}

}  // namespace

DetectorModel detector_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("detector must be a JSON object");
  std::string model = get_or<std::string>(j, "model", j.contains("degree") ? "polynomial" : "ideal");
  if (model == "ideal") {
    reject_unknown(j, {"model"}, "detector");
    return IdealDetector{};
  }
  if (model == "polynomial") return transfer_from_json(j);
  if (model == "deadtime") {
    reject_unknown(j, {"model", "tau", "sigma_tau", "dark_rate"}, "detector");
    DeadtimeModel d;
    d.tau = get<double>(j, "tau");
    d.sigma_tau = get_or<double>(j, "sigma_tau", 0.0);
    d.dark_rate = get_or<double>(j, "dark_rate", 0.0);
    if (!(d.tau >= 0.0) || !(d.sigma_tau >= 0.0) || !(d.dark_rate >= 0.0))
      throw InputError("deadtime parameters must be >= 0");
    return d;
  }
  if (model == "heralded") {
    reject_unknown(j, {"model", "tau", "sigma_tau", "dark_rate", "herald_rate", "herald_efficiency"},
                   "detector");
    HeraldedDetector h;
    h.deadtime.tau = get<double>(j, "tau");
    h.deadtime.sigma_tau = get_or<double>(j, "sigma_tau", 0.0);
    h.deadtime.dark_rate = get_or<double>(j, "dark_rate", 0.0);
    h.herald_rate = get<double>(j, "herald_rate");
    h.herald_efficiency = get_or<double>(j, "herald_efficiency", 1.0);
    return h;
  }
  throw InputError("unknown detector model '" + model + "'");
}

Json detector_to_json(const DetectorModel& d) {
  if (std::holds_alternative<IdealDetector>(d)) return Json{{"model", "ideal"}};
  if (const auto* t = std::get_if<PolynomialTransfer>(&d)) return transfer_to_json(*t);
  if (const auto* m = std::get_if<DeadtimeModel>(&d))
    return Json{{"model", "deadtime"}, {"tau", m->tau}, {"sigma_tau", m->sigma_tau}, {"dark_rate", m->dark_rate}};
  const auto& h = std::get<HeraldedDetector>(d);
  return Json{{"model", "heralded"},
              {"tau", h.deadtime.tau},
              {"sigma_tau", h.deadtime.sigma_tau},
              {"dark_rate", h.deadtime.dark_rate},
              {"herald_rate", h.herald_rate},
              {"herald_efficiency", h.herald_efficiency}};
}

PolynomialTransfer transfer_from_json(const Json& j) {
  reject_unknown(j, {"model", "degree", "coefficients", "covariance", "domain"}, "transfer");
  if (j.contains("model") && get<std::string>(j, "model") != "polynomial")
    throw InputError("transfer model must be 'polynomial'");
  PolynomialTransfer t;
  const int degree = get<int>(j, "degree");
  t.coefficients = get<std::vector<double>>(j, "coefficients");
  if (degree < 1 || static_cast<int>(t.coefficients.size()) != degree - 1)
    throw InputError("transfer needs degree - 1 coefficients (a_2..a_n)");
  t.covariance = matrix_from_json(j.at("covariance"), "covariance");
  if (t.covariance.rows() != degree - 1) throw InputError("covariance must be (degree-1) square");
  const auto dom = get<std::vector<double>>(j, "domain");
  if (dom.size() != 2 || !(dom[0] < dom[1])) throw InputError("domain must be [lo, hi] with lo < hi");
  t.domain = {dom[0], dom[1]};
  try {
    t.validate();
  } catch (const ModelError& e) {
    throw InputError(std::string("transfer: ") + e.what());
  }
  return t;
}

Json transfer_to_json(const PolynomialTransfer& t) {
  return Json{{"model", "polynomial"},
              {"degree", t.degree()},
              {"coefficients", t.coefficients},
              {"covariance", matrix_to_json(t.covariance)},
              {"domain", {t.domain[0], t.domain[1]}}};
}

DensityFile density_from_json(const Json& j) {
  reject_unknown(j, {"dim", "re", "im", "flux", "background"}, "density");
  const int dim = get<int>(j, "dim");
  const auto re = matrix_from_json(j.at("re"), "re");
  const Eigen::MatrixXd im = j.contains("im") ? matrix_from_json(j.at("im"), "im")
                                              : Eigen::MatrixXd::Zero(re.rows(), re.cols());
  if (re.rows() != dim || im.rows() != dim) throw InputError("density dim does not match re/im");
  Eigen::MatrixXcd m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = {re(r, c), im(r, c)};
  DensityFile f;
  try {
    f.rho = DensityMatrix(m);
  } catch (const ModelError& e) {
    throw InputError(std::string("density: ") + e.what());
  }
  if (j.contains("flux")) f.flux = get<double>(j, "flux");
  if (j.contains("background")) f.background = get<double>(j, "background");
  return f;
}

Json density_to_json(const DensityMatrix& rho, std::optional<double> flux, std::optional<double> background) {
  Json j{{"dim", rho.dim()},
         {"re", matrix_to_json(rho.matrix().real())},
         {"im", matrix_to_json(rho.matrix().imag())}};
  if (flux) j["flux"] = *flux;
  if (background) j["background"] = *background;
  return j;
}

CampaignConfig config_from_json(const Json& j) {
  reject_unknown(j,
                 {"seed", "regime", "n_cycles", "shutter_order", "stabilize_every", "phase_drift_step",
                  "dwell_time", "model", "noise", "detector", "injected_epsilon"},
                 "config");
  if (!j.contains("seed")) throw InputError("config: 'seed' is mandatory");
  if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
    throw InputError("config: 'seed' must be a non-negative integer");
  if (j.at("seed").is_number_integer() && j.at("seed").get<long long>() < 0)
    throw InputError("config: 'seed' must be a non-negative integer");

  CampaignConfig c;
  c.noise.seed = j.at("seed").get<std::uint64_t>();
  c.regime = regime_from_string(get_or<std::string>(j, "regime", "classical"));
  c.n_cycles = get_or<int>(j, "n_cycles", 100);
  c.shutter_order = shutter_order_from_string(get_or<std::string>(j, "shutter_order", "random"));
  c.stabilize_every = get_or<int>(j, "stabilize_every", 100);
  c.phase_drift_step = get_or<double>(j, "phase_drift_step", 0.0);
  c.dwell_time = get_or<double>(j, "dwell_time", 1.0);

  if (!j.contains("model")) throw InputError("config: 'model' is required");
  const auto& m = j.at("model");
  reject_unknown(m, {"n_paths", "input_flux", "background", "transmissions", "mean_phases", "density", "weights",
                     "coherence"},
                 "model");
  auto& im = c.model;
  im.n_paths = get<int>(m, "n_paths");
  if (im.n_paths < 1 || im.n_paths > 16) throw InputError("model: n_paths must be in 1..16");
  const auto n = static_cast<std::size_t>(im.n_paths);
  im.input_flux = get_or<double>(m, "input_flux", 1.0);
  im.background = get_or<double>(m, "background", 0.0);
  im.transmissions = get_or<std::vector<double>>(m, "transmissions", std::vector<double>(n, 1.0));
  im.mean_phases = get_or<std::vector<double>>(m, "mean_phases", std::vector<double>(n, 0.0));
  if (m.contains("density")) {
    if (m.contains("weights") || m.contains("coherence"))
      throw InputError("model: give either 'density' or 'weights'/'coherence'");
    im.density = density_from_json(m.at("density")).rho;
  } else {
    const auto w = get_or<std::vector<double>>(m, "weights", std::vector<double>(n, 1.0));
    if (w.size() != n) throw InputError("model: need one weight per path");
    try {
      im.density = DensityMatrix::partially_coherent(w, get_or<double>(m, "coherence", 1.0));
    } catch (const Error& e) {
      throw InputError(std::string("model: ") + e.what());
    }
  }

  if (j.contains("noise")) {
    const auto& nz = j.at("noise");
    reject_unknown(nz, {"sigma_phase", "coherence", "sigma_power_rel", "shot_noise", "integration_time"},
                   "noise");
    c.noise.sigma_phase = get_or<double>(nz, "sigma_phase", 0.0);
    c.noise.coherence = get_or<double>(nz, "coherence", 1.0);
    c.noise.sigma_power_rel = get_or<double>(nz, "sigma_power_rel", 0.0);
    c.noise.shot_noise = get_or<bool>(nz, "shot_noise", false);
    c.noise.integration_time = get_or<double>(nz, "integration_time", 1.0);
  }
  if (j.contains("detector")) c.detector = detector_from_json(j.at("detector"));
  if (j.contains("injected_epsilon")) {
    const auto& e = j.at("injected_epsilon");
    if (!e.is_object()) throw InputError("injected_epsilon must map order to value");
    for (const auto& [k, v] : e.items()) {
      int order = 0;
      try {
        order = std::stoi(k);
      } catch (const std::exception&) {
        throw InputError("injected_epsilon: key '" + k + "' is not an order");
      }
      if (!v.is_number()) throw InputError("injected_epsilon values must be numbers");
      c.injected_epsilon[order] = v.get<double>();
    }
  }
  try {
    c.validate();
  } catch (const ModelError& e) {
    throw InputError(std::string("config: ") + e.what());
  } catch (const ParameterError& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

Json config_to_json(const CampaignConfig& c) {
  Json inj = Json::object();
  for (const auto& [k, v] : c.injected_epsilon) inj[std::to_string(k)] = v;
  return Json{
      {"seed", c.noise.seed},
      {"regime", to_string(c.regime)},
      {"n_cycles", c.n_cycles},
      {"shutter_order", c.shutter_order == ShutterOrder::random ? "random" : "canonical"},
      {"stabilize_every", c.stabilize_every},
      {"phase_drift_step", c.phase_drift_step},
      {"dwell_time", c.dwell_time},
      {"model",
       {{"n_paths", c.model.n_paths},
        {"input_flux", c.model.input_flux},
        {"background", c.model.background},
        {"transmissions", c.model.transmissions},
        {"mean_phases", c.model.mean_phases},
        {"density", density_to_json(c.model.density)}}},
      {"noise",
       {{"sigma_phase", c.noise.sigma_phase},
        {"coherence", c.noise.coherence},
        {"sigma_power_rel", c.noise.sigma_power_rel},
        {"shot_noise", c.noise.shot_noise},
        {"integration_time", c.noise.integration_time}}},
      {"detector", detector_to_json(c.detector)},
      {"injected_epsilon", inj},
  };
}

void write_campaign_csv(std::ostream& os, const std::vector<MeasurementCycle>& cycles) {
  os << kCampaignHeader << '\n';
  char buf[128];
  for (const auto& c : cycles)
    for (std::size_t d = 0; d < c.draw_order.size(); ++d) {
      const auto mask = c.draw_order[d];
      std::snprintf(buf, sizeof buf, "%d,%zu,%u,%s,%s\n", c.index, d, mask, fmt17(c.readings[mask]).c_str(),
                    fmt17(c.timestamps[d]).c_str());
      os << buf;
    }
}

CampaignData read_campaign_csv(std::istream& is) {
  const auto rows = read_rows(is, kCampaignHeader);
  if (rows.empty()) throw InputError("campaign file has no data rows");
  std::uint32_t max_mask = 0;
  for (const auto& [line, f] : rows) {
    const auto mask = to_int(f[2], line);
    if (mask < 0 || mask >= (1LL << 16)) throw InputError("line " + std::to_string(line) + ": bad subset_mask");
    max_mask = std::max(max_mask, static_cast<std::uint32_t>(mask));
  }
  CampaignData data;
  data.n_paths = std::bit_width(max_mask);
  if (data.n_paths < 1) throw InputError("campaign file has no open-path readings");

  std::map<long long, MeasurementCycle> by_cycle;
  std::set<std::pair<long long, std::uint32_t>> seen;
  for (const auto& [line, f] : rows) {
    const auto cyc = to_int(f[0], line);
    const auto mask = static_cast<std::uint32_t>(to_int(f[2], line));
    if (!seen.insert({cyc, mask}).second)
      throw InputError("line " + std::to_string(line) + ": duplicate reading for cycle " + f[0]);
    auto [it, fresh] = by_cycle.try_emplace(cyc);
    auto& c = it->second;
    if (fresh) {
      c.index = static_cast<int>(cyc);
      c.readings = RateTuple(data.n_paths);
    }
    to_int(f[1], line);
    c.readings.set(PathSubset(mask), to_double(f[3], line));
    c.draw_order.push_back(mask);
    c.timestamps.push_back(to_double(f[4], line));
  }
  for (auto& [k, c] : by_cycle) data.cycles.push_back(std::move(c));
  return data;
}

void write_sideband_csv(std::ostream& os, const std::vector<MeasurementCycle>& cycles) {
  os << kSidebandHeader << '\n';
  for (const auto& c : cycles)
    for (std::size_t m = 0; m < c.singles_rate.size(); ++m)
      os << c.index << ',' << m << ',' << fmt17(c.singles_rate[m]) << ',' << fmt17(c.herald_rate[m]) << '\n';
}

void read_sideband_csv(std::istream& is, CampaignData& data) {
  const auto rows = read_rows(is, kSidebandHeader);
  std::map<int, MeasurementCycle*> idx;
  const std::size_t settings = std::size_t{1} << data.n_paths;
  for (auto& c : data.cycles) {
    idx[c.index] = &c;
    c.singles_rate.assign(settings, std::nan(""));
    c.herald_rate.assign(settings, std::nan(""));
  }
  for (const auto& [line, f] : rows) {
    const auto cyc = static_cast<int>(to_int(f[0], line));
    const auto mask = to_int(f[1], line);
    if (mask < 0 || static_cast<std::size_t>(mask) >= settings)
      throw InputError("line " + std::to_string(line) + ": bad subset_mask");
    auto it = idx.find(cyc);
    if (it == idx.end()) continue;
    it->second->singles_rate[static_cast<std::size_t>(mask)] = to_double(f[2], line);
    it->second->herald_rate[static_cast<std::size_t>(mask)] = to_double(f[3], line);
  }
  for (auto& c : data.cycles)
    for (std::size_t m = 0; m < settings; ++m)
      if (std::isnan(c.singles_rate[m]) || std::isnan(c.herald_rate[m]))
        // mark the cycle incomplete so the analysis drops it
        c.readings.readings()[m] = std::nan("");
}

void write_calibration_csv(std::ostream& os, const BeamCombinationDataset& d) {
  os << kCalibrationHeader << '\n';
  for (std::size_t k = 0; k < d.records.size(); ++k) {
    const auto& r = d.records[k];
    os << k << ',' << fmt17(r.v0) << ',' << fmt17(r.v1) << ',' << fmt17(r.v2) << ',' << fmt17(r.v3) << '\n';
  }
}

BeamCombinationDataset read_calibration_csv(std::istream& is) {
  const auto rows = read_rows(is, kCalibrationHeader);
  if (rows.empty()) throw InputError("calibration file has no data rows");
  BeamCombinationDataset d;
  d.records.reserve(rows.size());
  for (const auto& [line, f] : rows) {
    to_int(f[0], line);
    d.records.push_back({to_double(f[1], line), to_double(f[2], line), to_double(f[3], line),
                         to_double(f[4], line)});
  }
  return d;
}

void write_histogram_csv(std::ostream& os, const std::vector<stats::HistogramBin>& bins) {
  os << kHistogramHeader << '\n';
  for (const auto& b : bins) os << fmt17(b.lo) << ',' << fmt17(b.hi) << ',' << b.count << '\n';
}

namespace {

Json provenance_json(const std::map<std::string, std::string>& p) {
  Json j = Json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

}  // namespace

Json analysis_to_json(const AnalysisReport& r) {
  Json orders = Json::array();
  for (const auto& o : r.orders) {
    Json row{{"order", o.order},
             {"defined", o.defined},
             {"kappa", o.defined ? Json(o.kappa) : Json(nullptr)},
             {"kappa_sem", o.defined ? Json(o.kappa_sem) : Json(nullptr)},
             {"n_subsets", o.n_subsets}};
    if (o.kappa_tau_minus) row["kappa_tau_minus"] = *o.kappa_tau_minus;
    if (o.kappa_tau_plus) row["kappa_tau_plus"] = *o.kappa_tau_plus;
    orders.push_back(row);
  }
  Json subsets = Json::array();
  for (const auto& s : r.subsets) {
    const auto& e = s.epsilon_summary;
    subsets.push_back(Json{{"subset", s.subset.label()},
                           {"mask", s.subset.mask()},
                           {"order", s.order},
                           {"mean_epsilon", s.mean_epsilon},
                           {"mean_delta", s.mean_delta},
                           {"defined", s.defined},
                           {"kappa", s.defined ? Json(s.kappa) : Json(nullptr)},
                           {"kappa_sem", s.defined ? Json(s.kappa_sem) : Json(nullptr)},
                           {"kappa_naive", s.kappa_naive.value},
                           {"kappa_naive_sem", s.kappa_naive.sem},
                           {"epsilon_std", e.std},
                           {"epsilon_skewness", e.skewness},
                           {"epsilon_excess_kurtosis", e.excess_kurtosis},
                           {"normality_pvalue", stats::jarque_bera_pvalue(e)},
                           {"autocorrelation_in_band", s.autocorrelation_in_band}});
  }
  Json cc = Json::object();
  for (const auto& [j, m] : r.crosscorrelation) cc[std::to_string(j)] = matrix_to_json(m);
  return Json{{"kind", "analysis"},
              {"regime", r.regime},
              {"n_paths", r.n_paths},
              {"cycles_total", r.cycles_total},
              {"cycles_used", r.cycles_used},
              {"incomplete_cycles", r.incomplete_cycles},
              {"outlier_cycles", r.outlier_cycles},
              {"orders", orders},
              {"subsets", subsets},
              {"crosscorrelation", cc},
              {"warnings", r.warnings},
              {"provenance", provenance_json(r.provenance)}};
}

std::vector<MeasuredOrder> measured_orders_from_json(const Json& j, std::string& regime) {
  if (!j.is_object() || !j.contains("orders") || !j.at("orders").is_array())
    throw InputError("analysis report needs an 'orders' array");
  regime = get_or<std::string>(j, "regime", "classical");
  std::vector<MeasuredOrder> out;
  for (const auto& row : j.at("orders")) {
    MeasuredOrder m;
    m.order = get<int>(row, "order");
    if (row.contains("kappa") && row.at("kappa").is_null())
      throw InputError("kappa is undefined for order " + std::to_string(m.order));
    m.kappa = get<double>(row, "kappa");
    m.kappa_sem = get<double>(row, "kappa_sem");
    m.n_subsets = get_or<std::size_t>(row, "n_subsets", 0);
    if (row.contains("kappa_tau_minus")) m.kappa_tau_minus = get<double>(row, "kappa_tau_minus");
    if (row.contains("kappa_tau_plus")) m.kappa_tau_plus = get<double>(row, "kappa_tau_plus");
    if (!(m.kappa_sem >= 0.0)) throw InputError("kappa_sem must be >= 0");
    out.push_back(m);
  }
  return out;
}

Json prediction_to_json(const KappaPrediction& p, const std::map<std::string, std::string>& provenance) {
  Json orders = Json::array();
  for (const auto& pred : predicted_orders(p)) {
    const auto& o = p.order(pred.order);
    Json subsets = Json::array();
    for (const auto& s : o.subsets)
      subsets.push_back(Json{{"subset", s.subset.label()},
                             {"kappa_th", s.kappa_th},
                             {"sigma_uncorrelated", s.sigma_uncorrelated},
                             {"sigma_max_correlated", s.sigma_max_correlated}});
    orders.push_back(Json{{"order", o.order},
                          {"kappa_th", pred.kappa_th},
                          {"kappa_th_sigma", pred.sigma},
                          {"sigma_uncorrelated", o.sigma_uncorrelated},
                          {"sigma_max_correlated", o.sigma_max_correlated},
                          {"subsets", subsets}});
  }
  return Json{{"kind", "prediction"},
              {"detector", p.detector},
              {"scenario", p.scenario},
              {"n_mc", p.n_mc},
              {"convergence_ratio", p.convergence_ratio},
              {"orders", orders},
              {"provenance", provenance_json(provenance)}};
}

std::vector<PredictedOrder> predicted_orders_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("orders") || !j.at("orders").is_array())
    throw InputError("prediction report needs an 'orders' array");
  std::vector<PredictedOrder> out;
  for (const auto& row : j.at("orders")) {
    PredictedOrder p;
    p.order = get<int>(row, "order");
    p.kappa_th = get<double>(row, "kappa_th");
    p.sigma = get<double>(row, "kappa_th_sigma");
    if (!(p.sigma >= 0.0)) throw InputError("kappa_th_sigma must be >= 0");
    out.push_back(p);
  }
  return out;
}

Json correction_to_json(const CorrectionReport& r) {
  check_correction_invariant(r);
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"order", row.order},
                        {"kappa", row.kappa},
                        {"kappa_sem", row.kappa_sem},
                        {"kappa_th", row.kappa_th},
                        {"kappa_th_sigma", row.kappa_th_sigma},
                        {"kappa_tilde", row.kappa_tilde},
                        {"kappa_tilde_sigma", row.kappa_tilde_sigma}});
  return Json{{"kind", "corrected"}, {"regime", r.regime}, {"rows", rows},
              {"provenance", provenance_json(r.provenance)}};
}

CorrectionReport correction_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rows")) throw InputError("corrected report needs 'rows'");
  CorrectionReport r;
  r.regime = get_or<std::string>(j, "regime", "classical");
  for (const auto& row : j.at("rows"))
    r.rows.push_back({get<int>(row, "order"), get<double>(row, "kappa"), get<double>(row, "kappa_sem"),
                      get<double>(row, "kappa_th"), get<double>(row, "kappa_th_sigma"),
                      get<double>(row, "kappa_tilde"), get<double>(row, "kappa_tilde_sigma")});
  if (j.contains("provenance"))
    for (const auto& [k, v] : j.at("provenance").items()) r.provenance[k] = v.is_string() ? v.get<std::string>() : v.dump();
  check_correction_invariant(r);
  return r;
}

Json selection_to_json(const OrderSelection& s, const FitDiagnostics& d) {
  Json table = Json::array();
  for (const auto& [n, x] : s.x_table) table.push_back(Json{{"n", n}, {"X", x}});
  return Json{{"kind", "calibration"},
              {"chosen_degree", s.chosen_degree},
              {"significant", s.significant},
              {"x_table", table},
              {"residual", d.residual},
              {"condition_number", d.condition_number}};
}

}  // namespace sorkin::io

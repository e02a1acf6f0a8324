#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "sorkin/fixtures.hpp"
#include "sorkin/io.hpp"

namespace fs = std::filesystem;
using sorkin::io::Json;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("sorkinlab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + SORKINLAB_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("simulate: deterministic, row count, mandatory seed") {
  const auto dir = scratch("simulate");
  auto cfg = sorkin::fixtures::classical_campaign(4, 100);
  sorkin::io::write_json(dir / "cfg.json", sorkin::io::config_to_json(cfg));
  REQUIRE(run("simulate --config " + q(dir / "cfg.json") + " --out " + q(dir / "a")) == 0);
  REQUIRE(run("simulate --config " + q(dir / "cfg.json") + " --out " + q(dir / "b")) == 0);
  const auto a = slurp(dir / "a" / "campaign.csv");
  CHECK(a == slurp(dir / "b" / "campaign.csv"));
  std::size_t lines = 0;
  for (char ch : a) lines += ch == '\n';
  CHECK(lines == 1 + 100 * 32);

  Json j = sorkin::io::config_to_json(cfg);
  j.erase("seed");
  sorkin::io::write_json(dir / "noseed.json", j);
  CHECK(run("simulate --config " + q(dir / "noseed.json") + " --out " + q(dir / "c")) == 2);
  CHECK(run("simulate --out " + q(dir / "c")) == 2);
  CHECK(run("bogus") == 2);
}

TEST_CASE("analyze, predict, correct end to end") {
  const auto dir = scratch("pipeline");
  REQUIRE(run("fixture --out " + q(dir)) == 0);
  REQUIRE(run("simulate --config " + q(dir / "config_classical.json") + " --out " + q(dir / "sim")) == 0);
  REQUIRE(run("analyze " + q(dir / "sim" / "campaign.csv") + " --out " + q(dir / "an")) == 0);
  CHECK(fs::exists(dir / "an" / "analysis.json"));
  CHECK(fs::exists(dir / "an" / "histograms" / "epsilon_ABC.csv"));

  REQUIRE(run("predict --density " + q(dir / "density.json") + " --transfer " + q(dir / "transfer_classical.json") +
              " --n-mc 500 --out " + q(dir / "pr")) == 0);
  REQUIRE(run("correct --analysis " + q(dir / "an" / "analysis.json") + " --prediction " +
              q(dir / "pr" / "prediction.json") + " --out " + q(dir / "co")) == 0);
  const auto corrected = sorkin::io::read_json(dir / "co" / "corrected.json");
  CHECK(corrected.at("rows").size() == 3);

  // out-of-domain flux
  CHECK(run("predict --density " + q(dir / "density.json") + " --transfer " + q(dir / "transfer_classical.json") +
            " --flux 10 --n-mc 100 --out " + q(dir / "pr2")) == 3);

  // order mismatch between analysis and prediction
  REQUIRE(run("predict --density " + q(dir / "density.json") + " --transfer " + q(dir / "transfer_classical.json") +
              " --order 4 --n-mc 100 --out " + q(dir / "pr4")) == 0);
  CHECK(run("correct --analysis " + q(dir / "an" / "analysis.json") + " --prediction " +
            q(dir / "pr4" / "prediction.json") + " --out " + q(dir / "co4")) == 2);
}

TEST_CASE("correct: identical inputs give zero rows") {
  const auto dir = scratch("identical");
  const Json analysis = {{"regime", "classical"},
                         {"orders", Json::array({{{"order", 3}, {"kappa", 1e-4}, {"kappa_sem", 2e-5}, {"defined", true}}})}};
  const Json prediction = {{"orders", Json::array({{{"order", 3}, {"kappa_th", 1e-4}, {"kappa_th_sigma", 0.0}}})}};
  sorkin::io::write_json(dir / "a.json", analysis);
  sorkin::io::write_json(dir / "p.json", prediction);
  REQUIRE(run("correct --analysis " + q(dir / "a.json") + " --prediction " + q(dir / "p.json") + " --out " +
              q(dir / "o")) == 0);
  const auto out = sorkin::io::read_json(dir / "o" / "corrected.json");
  CHECK(out.at("rows").at(0).at("kappa_tilde").get<double>() == 0.0);
}

TEST_CASE("calibrate: fixtures and empty input") {
  const auto dir = scratch("calibrate");
  REQUIRE(run("fixture --out " + q(dir)) == 0);
  REQUIRE(run("calibrate " + q(dir / "beams_polynomial.csv") + " --out " + q(dir / "poly")) == 0);
  const auto t = sorkin::io::read_json(dir / "poly" / "transfer.json");
  CHECK(t.at("degree") == 3);
  REQUIRE(run("calibrate " + q(dir / "beams_deadtime.csv") + " --mode deadtime --out " + q(dir / "dt")) == 0);
  {
    std::ofstream(dir / "empty.csv");
  }
  CHECK(run("calibrate " + q(dir / "empty.csv") + " --out " + q(dir / "e")) == 2);
}

TEST_CASE("selftest passes") { CHECK(run("selftest") == 0); }

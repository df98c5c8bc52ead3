#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = fs::temp_directory_path() / "lltomo_cli_test";

int lltomo(const std::string& args, const std::string& env = "") {
  fs::create_directories(kWork);
  const std::string cmd = "cd '" + kWork.string() + "' && " + env + " '" LLTOMO_CLI "' " + args +
                          " > last_stdout.txt 2> last_stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& name) {
  std::ifstream in(kWork / name, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<json> json_lines(const std::string& name) {
  std::vector<json> out;
  std::istringstream in(slurp(name));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

std::vector<std::vector<std::string>> csv(const std::string& name) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(name));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

void write(const std::string& name, const std::string& text) {
  fs::create_directories(kWork);
  std::ofstream(kWork / name) << text;
}

}  // namespace

TEST_CASE("tomogram command") {
  REQUIRE(lltomo("tomogram --state fock:0,0 --field constant:1 --mu 0,0 --nu 1,1 --grid 64 --out f.csv") == 0);
  const auto rows = csv("f.csv");
  REQUIRE(rows.size() == 64 * 64 + 1);
  CHECK(rows[0] == std::vector<std::string>{"X1", "X2", "mu1", "nu1", "mu2", "nu2", "w"});
  double peak = 0.0, at_origin = -1.0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double w = std::stod(rows[k][6]);
    peak = std::max(peak, w);
    if (std::stod(rows[k][0]) == 0.0 && std::stod(rows[k][1]) == 0.0) at_origin = w;
  }
  CHECK(peak == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
  CHECK(at_origin == peak);

  const json m = json::parse(slurp("f.csv.manifest.json"));
  CHECK(m["schema"] == "lltomo.manifest/1");
  CHECK(m["command"] == "tomogram");
  CHECK(m["normalization"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));

  REQUIRE(lltomo("tomogram --state coherent:0,0 --field constant:1 --mu 0,0 --nu 1,1 --grid 64 --out c.csv") == 0);
  CHECK(slurp("c.csv") == slurp("f.csv"));
}

TEST_CASE("tomogram usage errors") {
  CHECK(lltomo("tomogram --state fock:0,0 --grid 64") == 2);
  CHECK(slurp("last_stderr.txt").find("--field") != std::string::npos);
  CHECK(lltomo("tomogram --state fock:0,x --field constant:1") == 2);
  CHECK(slurp("last_stderr.txt").find("--state") != std::string::npos);
  CHECK(lltomo("tomogram --state fock:0,0 --field constant:-1") == 2);
  CHECK(lltomo("tomogram --state fock:0,0 --field constant:1 --mu 0,0 --nu 0,1") == 2);
  CHECK(lltomo("tomogram --state fock:0,30 --field constant:1") == 2);
  CHECK(lltomo("frobnicate") == 2);
}

TEST_CASE("coherent labels accept complex parameters") {
  REQUIRE(lltomo("tomogram --state coherent:0.3+0.2i,-0.5i --field constant:1 --grid 32 --out z.csv") == 0);
  const json m = json::parse(slurp("z.csv.manifest.json"));
  CHECK(m["state"]["alpha"][0].get<double>() == 0.3);
  CHECK(m["state"]["alpha"][1].get<double>() == 0.2);
  CHECK(m["state"]["beta"][1].get<double>() == -0.5);
}

TEST_CASE("transition table on the step profile") {
  write("step.json", R"({"kind": "step", "omega0": 1.0, "omega1": 4.0, "t_jump": 0.0})");
  REQUIRE(lltomo("transition --profile step.json --nmax 1 --routes overlap,jacobi --out t.jsonl") == 0);
  int transitions = 0;
  for (const json& r : json_lines("t.jsonl")) {
    CHECK(r["profile_hash"].get<std::string>().size() == 16);
    if (r["schema"] == "lltomo.transition/1") {
      ++transitions;
    } else {
      REQUIRE(r["schema"] == "lltomo.completeness/1");
      CHECK(std::abs(1.0 - r["sum"].get<double>()) < 1e-4);
      CHECK(1.0 - r["sum"].get<double>() <= r["tail_bound"].get<double>() + 1e-9);
    }
  }
  CHECK(transitions == 16 * 2);
}

TEST_CASE("constant profile gives the identity") {
  write("const.json", R"({"kind": "constant", "omega0": 1.0})");
  REQUIRE(lltomo("transition --profile const.json --nmax 2 --routes overlap,jacobi --out id.jsonl") == 0);
  for (const json& r : json_lines("id.jsonl")) {
    if (r["schema"] != "lltomo.transition/1") continue;
    const double target = r["initial"] == r["final"] ? 1.0 : 0.0;
    CHECK(std::abs(r["value"].get<double>() - target) < 1e-9);
  }
}

TEST_CASE("tomographic runs are reproducible") {
  write("step.json", R"({"kind": "step", "omega0": 1.0, "omega1": 4.0, "t_jump": 0.0})");
  const std::string args = "transition --profile step.json --nmax 1 --routes tomographic --samples 1e5 --seed 7";
  REQUIRE(lltomo(args + " --out a.jsonl", "LLTOMO_THREADS=1") == 0);
  REQUIRE(lltomo(args + " --out b.jsonl", "LLTOMO_THREADS=3") == 0);
  REQUIRE(lltomo(args + " --out c.jsonl") == 0);
  CHECK(slurp("a.jsonl") == slurp("b.jsonl"));
  CHECK(slurp("a.jsonl") == slurp("c.jsonl"));
  REQUIRE(lltomo("replay a.jsonl.manifest.json --out r.jsonl") == 0);
  CHECK(slurp("a.jsonl") == slurp("r.jsonl"));
}

TEST_CASE("consistency and budget failures have their own exit codes") {
  write("step.json", R"({"kind": "step", "omega0": 1.0, "omega1": 4.0, "t_jump": 0.0})");
  // Routes agree to ~1e-12; an absurd tolerance must raise the alarm.
  CHECK(lltomo("transition --profile step.json --nmax 0 --routes overlap,jacobi --agree 1e-18 --out d.jsonl") == 3);
  bool diagnostic = false;
  for (const json& r : json_lines("d.jsonl")) diagnostic |= r["schema"] == "lltomo.diagnostic/1";
  CHECK(diagnostic);
  CHECK(lltomo("transition --profile step.json --nmax 1 --routes tomographic --samples 1000 "
               "--strata 10 --stderr-abs 1e-9 --stderr-rel 0") == 4);
  CHECK(lltomo("transition --profile missing.json") == 2);
  write("bad.json", R"({"kind": "step", "omega0": -1.0, "omega1": 4.0, "t_jump": 0.0})");
  CHECK(lltomo("transition --profile bad.json") == 2);
}

TEST_CASE("reflection sweep") {
  REQUIRE(lltomo("reflection --kind step --omega0 1 --omega1 1,2,4 --out r.csv") == 0);
  const auto rows = csv("r.csv");
  REQUIRE(rows.size() == 4);
  const double expected[] = {0.0, 1.0 / 9.0, 0.36};
  for (int k = 0; k < 3; ++k) {
    const auto& row = rows[static_cast<std::size_t>(k) + 1];
    CHECK(std::abs(std::stod(row[4]) - expected[k]) < 1e-8);
    const double sd = std::stod(row[6]);
    CHECK(std::abs(std::stod(row[5]) - expected[k]) <= 2.0 * std::max(sd, 1e-12));
  }
  CHECK(rows[1][4] == "0");

  REQUIRE(lltomo("reflection --kind ramp --omega1 4 --width 0.25,0.5,1,2,4 --routes envelope --out w.csv") == 0);
  const auto ramp = csv("w.csv");
  for (std::size_t k = 2; k < ramp.size(); ++k) {
    CHECK(std::stod(ramp[k][4]) < std::stod(ramp[k - 1][4]));
  }
  CHECK(std::stod(ramp.back()[4]) < 1e-4);
}

TEST_CASE("validate") {
  CHECK(lltomo("validate") == 0);
  const std::string report = slurp("last_stdout.txt");
  for (const char* name : {"normalization", "route_agreement_overlap_jacobi", "wronskian"}) {
    CHECK(report.find(std::string("PASS ") + name) != std::string::npos);
  }
  CHECK(report.find("FAIL") == std::string::npos);
}

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "svarkit/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("svarkit_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "svarkit");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  return svarkit::cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

std::vector<std::vector<std::string>> csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

fs::path simulated(const fs::path& dir, const std::string& coeffs = "0.5,0.1;0.2,0.3",
                   const std::string& extra_sigma = "") {
  std::vector<std::string> args = {"simulate", "--coeffs", coeffs, "--T", "200",
                                   "--seed", "1", "--out", (dir / "sim").string()};
  if (!extra_sigma.empty()) {
    args.push_back("--sigma");
    args.push_back(extra_sigma);
  }
  REQUIRE(run(args) == 0);
  return dir / "sim" / "data.csv";
}

}  // namespace

TEST_CASE("simulate is deterministic and records the truth") {
  const fs::path d = scratch("sim");
  REQUIRE(run({"simulate", "--coeffs", "0.5", "--T", "100", "--seed", "1", "--out",
               (d / "a").string()}) == 0);
  REQUIRE(run({"simulate", "--coeffs", "0.5", "--T", "100", "--seed", "1", "--out",
               (d / "b").string()}) == 0);
  CHECK(slurp(d / "a" / "data.csv") == slurp(d / "b" / "data.csv"));
  CHECK(load(d / "a" / "result.json")["payload"] == load(d / "b" / "result.json")["payload"]);
  CHECK(csv(d / "a" / "data.csv").size() == 101);

  REQUIRE(run({"simulate", "--dgp", "break", "--coeffs", "0.6,0;0,0.6", "--coeffs-after",
               "-0.6,0;0,-0.6", "--T", "400", "--seed", "2", "--out", (d / "brk").string()}) == 0);
  const json j = load(d / "brk" / "result.json");
  CHECK(j["payload"]["break_index"] == 200);

  CHECK(run({"simulate", "--coeffs", "1.2", "--T", "50", "--seed", "1", "--out",
             (d / "u").string()}) == 1);
  CHECK(run({"simulate", "--coeffs", "0.5", "--T", "50", "--out", (d / "ns").string()}) == 2);
}

TEST_CASE("fit: JSON payload and CSV agree exactly") {
  const fs::path d = scratch("fit");
  const fs::path data = simulated(d);
  REQUIRE(run({"fit", "--input", data.string(), "--p", "2", "--out", (d / "fit").string()}) == 0);
  const json j = load(d / "fit" / "result.json");
  CHECK(j["schema"] == "svarkit.result.v1");
  CHECK(j["command"] == "fit");
  CHECK(j["payload"]["stability"]["stable"] == true);
  CHECK(j["payload"]["sigma_u"].size() == 2);
  const auto rows = csv(d / "fit" / "coefficients.csv");
  REQUIRE(rows.size() == 1 + 2 * 5);
  const std::vector<std::string> names = {"v1", "v2"};
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t eq = rows[r][0] == "v1" ? 0 : 1;
    const double v = std::strtod(rows[r][3].c_str(), nullptr);
    if (rows[r][1] == "const") {
      CHECK(v == j["payload"]["intercept"][eq].get<double>());
    } else {
      const int lag = std::stoi(rows[r][2]);
      const std::size_t col = rows[r][1] == "v1" ? 0 : 1;
      CHECK(v == j["payload"]["coefficients"][lag - 1][eq][col].get<double>());
    }
  }
}

TEST_CASE("irf with bootstrap bands is byte-identical across runs and threads") {
  const fs::path d = scratch("irf");
  const fs::path data = simulated(d);
  auto go = [&](const std::string& out, const std::string& threads) {
    return run({"irf", "--input", data.string(), "--p", "1", "--scheme", "recursive",
                "--horizon", "12", "--boot", "999", "--block", "auto", "--seed", "7",
                "--threads", threads, "--out", (d / out).string()});
  };
  REQUIRE(go("a", "4") == 0);
  REQUIRE(go("b", "0") == 0);
  REQUIRE(go("c", "1") == 0);
  CHECK(slurp(d / "a" / "irf.csv") == slurp(d / "b" / "irf.csv"));
  CHECK(slurp(d / "a" / "irf.csv") == slurp(d / "c" / "irf.csv"));

  const json j = load(d / "a" / "result.json");
  const auto rows = csv(d / "a" / "irf.csv");
  REQUIRE(rows.size() == 1 + 13 * 4);
  CHECK(rows[0] == std::vector<std::string>{"horizon", "response", "shock", "value", "lower", "upper"});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const int h = std::stoi(rows[r][0]);
    const int i = rows[r][1] == "v1" ? 0 : 1;
    const int k = rows[r][2] == "shock_v1" ? 0 : 1;
    CHECK(std::strtod(rows[r][3].c_str(), nullptr) == j["payload"]["theta"][h][i][k].get<double>());
    CHECK(std::strtod(rows[r][4].c_str(), nullptr) == j["payload"]["lower"][h][i][k].get<double>());
    CHECK(std::strtod(rows[r][5].c_str(), nullptr) == j["payload"]["upper"][h][i][k].get<double>());
  }
  CHECK(run({"irf", "--input", data.string(), "--boot", "10", "--out", (d / "x").string()}) == 2);
}

TEST_CASE("fevd on one variable is all ones") {
  const fs::path d = scratch("fevd");
  REQUIRE(run({"simulate", "--coeffs", "0.5", "--T", "120", "--seed", "4", "--out",
               (d / "sim").string()}) == 0);
  REQUIRE(run({"fevd", "--input", (d / "sim" / "data.csv").string(), "--p", "1", "--horizon", "8",
               "--out", (d / "f").string()}) == 0);
  const auto rows = csv(d / "f" / "fevd.csv");
  REQUIRE(rows.size() == 9);
  for (std::size_t r = 1; r < rows.size(); ++r) CHECK(std::strtod(rows[r][3].c_str(), nullptr) == 1.0);
}

TEST_CASE("zero-noise data fails with SingularRegressors") {
  const fs::path d = scratch("zero");
  REQUIRE(run({"simulate", "--coeffs", "0.5,0;0,0.5", "--sigma", "0,0;0,0", "--T", "60", "--seed",
               "1", "--out", (d / "sim").string()}) == 0);
  std::ostringstream captured;
  auto* old = std::cout.rdbuf(captured.rdbuf());
  const int code = run({"fit", "--input", (d / "sim" / "data.csv").string(), "--p", "1", "--out",
                        (d / "fit").string()});
  std::cout.rdbuf(old);
  std::cerr << captured.str();
  CHECK(code == 1);
}

TEST_CASE("configuration files") {
  const fs::path d = scratch("config");
  const fs::path data = simulated(d);
  {
    std::ofstream cfg(d / "good.ini");
    cfg << "[fit]\np = 2\ninput = " << data.string() << "\n";
  }
  {
    std::ofstream cfg(d / "bad.ini");
    cfg << "[fit]\npp = 2\n";
  }
  REQUIRE(run({"--config", (d / "good.ini").string(), "fit", "--out", (d / "a").string()}) == 0);
  CHECK(load(d / "a" / "result.json")["payload"]["p"] == 2);
  REQUIRE(run({"--config", (d / "good.ini").string(), "fit", "--p", "1", "--out",
               (d / "b").string()}) == 0);
  CHECK(load(d / "b" / "result.json")["payload"]["p"] == 1);
  CHECK(run({"--config", (d / "bad.ini").string(), "fit", "--input", data.string(), "--out",
             (d / "c").string()}) == 2);
}

TEST_CASE("usage errors") {
  const fs::path d = scratch("usage");
  const fs::path data = simulated(d);
  CHECK(run({"nonsense"}) == 2);
  CHECK(run({"fit", "--input", data.string(), "--p", "x"}) == 2);
  CHECK(run({"boot", "--input", data.string(), "--out", (d / "b").string()}) == 2);
  CHECK(run({"robust", "--input", data.string(), "--out", (d / "r").string()}) == 2);
  CHECK(run({"fit", "--input", (d / "missing.csv").string(), "--out", (d / "m").string()}) == 1);
}

TEST_CASE("every stochastic command is reproducible") {
  const fs::path d = scratch("repro");
  const fs::path data = simulated(d);
  const std::string in = data.string();
  const std::vector<std::vector<std::string>> commands = {
      {"boot", "--input", in, "--p", "1", "--boot", "50", "--seed", "3"},
      {"robust", "--input", in, "--p", "1", "--seed", "3", "--starts", "50", "--pmax", "2"},
      {"breaks", "--input", in, "--p", "1"},
      {"cusum", "--input", in},
      {"critvals", "--paths", "500", "--grid", "100", "--seed", "3"},
  };
  int idx = 0;
  for (const auto& c : commands) {
    std::string first, second;
    for (int rep = 0; rep < 2; ++rep) {
      std::vector<std::string> args = c;
      const fs::path out = d / ("c" + std::to_string(idx) + "_" + std::to_string(rep));
      args.push_back("--out");
      args.push_back(out.string());
      args.push_back("--threads");
      args.push_back(rep == 0 ? "4" : "1");
      REQUIRE(run(args) == 0);
      std::string all;
      // the envelope echoes --out and --threads; compare its payload only
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(out)) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const fs::path& f : files) {
        if (f.filename() != "result.json") {
          all += f.filename().string() + slurp(f);
          continue;
        }
        json payload = load(f)["payload"];
        payload.erase("table");  // output path
        all += payload.dump();
      }
      (rep == 0 ? first : second) = all;
    }
    INFO(c[0]);
    CHECK(first == second);
    ++idx;
  }
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dcm/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "dcm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dcm::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(DCM_EXAMPLE_CONFIG_DIR) + "/" + name; }

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dcm_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({"--bogus", "solve"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  const Run r = run({"solve", "--unknown-flag"});
  CHECK(r.code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("selftest passes") {
  const Run r = run({"selftest", "--seed", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS monotonicity") != std::string::npos);
}

TEST_CASE("negative source is an input error naming the node") {
  const fs::path dir = fresh_dir("bad");
  const Run r = run({"solve", "--config", data("bad_f_negative.cfg"), "--out", dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("node (0.125, 0.125)") != std::string::npos);
  CHECK(run({"solve", "--config", data("missing.cfg")}).code == 2);
}

TEST_CASE("refine-study on the quadratic problem") {
  const fs::path dir = fresh_dir("quad");
  const Run r = run({"refine-study", "--config", data("quad.cfg"), "--out", dir.string()});
  CHECK(r.code == 0);
  std::istringstream table(slurp(dir / "table.csv"));
  std::string line;
  std::getline(table, line);
  CHECK(line == "h,sup_err_K,sup_err_all,shell_err,ma_mass,lipschitz_K,sup_norm,iters,seconds,order");
  int rows = 0;
  while (std::getline(table, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() >= 9);
    for (int c = 1; c <= 3; ++c) CHECK(std::stod(cells[c]) <= 1e-9);
    CHECK(cells[8] == "0");
  }
  CHECK(rows == 3);
  const auto js = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(js["records"].size() == 3);
  CHECK(fs::exists(dir / "boundary_probe.csv"));
}

TEST_CASE("solve, measure, check-abp and envelope write their outputs") {
  const fs::path dir = fresh_dir("misc");
  CHECK(run({"solve", "--config", data("quad.cfg"), "--out", dir.string()}).code == 0);
  const auto rep = nlohmann::json::parse(slurp(dir / "solve_report.json"));
  for (const char* key : {"iterations", "residual_history", "ma_total_mass", "sup_norm"}) CHECK(rep.contains(key));
  CHECK(slurp(dir / "solution.csv").rfind("x,y,value", 0) == 0);

  const Run m = run({"measure", "--config", data("disk_measure.cfg"), "--out", dir.string()});
  CHECK(m.code == 0);
  CHECK(slurp(dir / "masses.csv").rfind("x,y,mass\n", 0) == 0);

  const Run a = run({"check-abp", "--config", data("abp_quadratic.cfg"), "--out", dir.string()});
  CHECK(a.code == 0);
  const auto abp = nlohmann::json::parse(slurp(dir / "abp.json"));
  CHECK(abp["empirical_C"].get<double>() > 0.0);
  CHECK(fs::exists(dir / "abp_violations.csv"));

  CHECK(run({"envelope", "--out", dir.string()}).code == 0);
  CHECK(slurp(dir / "envelope.csv").rfind("x,y,value\n", 0) == 0);
}

TEST_CASE("failed checks exit with 1") {
  const fs::path dir = fresh_dir("fail");
  const fs::path cfg = dir / "tight.cfg";
  std::ofstream(cfg) << "lattice.h = 1/16\nabp.z = ((x - 0.5)^2 + (y - 0.5)^2) / 2 - 1/8\nabp.C = 0.01\n";
  CHECK(run({"check-abp", "--config", cfg.string(), "--out", dir.string()}).code == 1);
  const fs::path cfg2 = dir / "mass.cfg";
  std::ofstream(cfg2) << "lattice.h = 1/8\nmeasure.function = 3 * (x^2 + y^2)\nmeasure.f = 1\nmeasure.C = 2\n";
  CHECK(run({"measure", "--config", cfg2.string(), "--out", dir.string()}).code == 1);
}

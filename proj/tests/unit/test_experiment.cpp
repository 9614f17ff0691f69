#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "ddinv/experiment.hpp"

using namespace ddinv;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("ddinv_test_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int significant_digits(const std::string& number) {
  int digits = 0;
  bool leading = true;
  for (char c : number) {
    if (c == 'e' || c == 'E') break;
    if (c < '0' || c > '9') continue;
    if (leading && c == '0') continue;
    leading = false;
    ++digits;
  }
  return digits;
}

RunConfig quick(const std::string& id, int nx, Algorithm alg = Algorithm::kMsa) {
  RunConfig c;
  c.experiment = id;
  c.nx = nx;
  c.algorithm = alg;
  return c;
}

}  // namespace

TEST_CASE("single runs reproduce the table rows") {
  const RunOutcome flux = run_experiment(quick("5.1", 14));
  CHECK(flux.row.nx == 14);
  CHECK(flux.row.ny == 28);
  CHECK(flux.row.beta == 0.0001);
  CHECK(flux.row.converged);
  CHECK(flux.row.error <= 0.1);
  CHECK(flux.row.iterations >= 4);
  CHECK(flux.row.iterations <= 16);
  CHECK(flux.exit_code() == kExitConverged);

  const RunOutcome asa = run_experiment(quick("5.3", 7, Algorithm::kAsa));
  CHECK(asa.row.converged);
  CHECK(asa.row.iterations >= 11);
  CHECK(asa.row.iterations <= 42);
}

TEST_CASE("iteration cap gives exit code 2") {
  RunConfig c = quick("5.3", 7);
  c.max_iter = 2;
  const RunOutcome o = run_experiment(c);
  CHECK_FALSE(o.row.converged);
  CHECK(o.row.iterations == 2);
  CHECK(o.exit_code() == kExitMaxIterations);
}

TEST_CASE("configuration errors are rejected before anything is written") {
  TempDir dir("invalid");
  RunConfig c = quick("5.3", 10);
  c.out = dir.path;
  CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
  CHECK_FALSE(fs::exists(dir.path));

  auto rejects = [](auto edit) {
    RunConfig r;
    edit(r);
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  };
  rejects([](RunConfig& r) { r.experiment = "6.1"; });
  rejects([](RunConfig& r) { r.ny = 15; });
  rejects([](RunConfig& r) { r.beta = -1.0; });
  rejects([](RunConfig& r) { r.delta = -0.01; });
  rejects([](RunConfig& r) { r.A = 0.0; });
  rejects([](RunConfig& r) { r.lambda = 1.5; });
  rejects([](RunConfig& r) { r.tol = 0.0; });
  rejects([](RunConfig& r) { r.max_iter = 0; });
  rejects([](RunConfig& r) {
    r.experiment = "5.6";
    r.nt = -1;
  });
  rejects([](RunConfig& r) {
    r.experiment = "5.6";
    r.sigma = 5.0;
  });
  rejects([](RunConfig& r) {
    r.experiment = "5.6";
    r.sigma = 0.1;  // not a whole number of steps
  });

  CHECK(parse_algorithm("asa") == Algorithm::kAsa);
  CHECK(parse_algorithm("MSA") == Algorithm::kMsa);
  CHECK_THROWS_AS(parse_algorithm("gmres"), std::invalid_argument);
}

TEST_CASE("artifacts are byte-identical across runs") {
  for (const char* id : {"5.3", "5.1", "5.6"}) {
    CAPTURE(std::string(id));
    TempDir a("det_a");
    TempDir b("det_b");
    RunConfig c = quick(id, std::string(id) == "5.1" ? 14 : 7);
    c.seed = 5;
    c.out = a.path;
    write_artifacts(c, run_experiment(c));
    c.out = b.path;
    write_artifacts(c, run_experiment(c));
    for (const char* f : {"table.csv", "history.csv", "profile.csv", "meta.json"}) {
      CAPTURE(std::string(f));
      CHECK(slurp(a.path / f) == slurp(b.path / f));
    }
  }
}

TEST_CASE("CSV layout and number format") {
  TempDir dir("csv");
  RunConfig c = quick("5.3", 7);
  c.out = dir.path;
  const RunOutcome o = run_experiment(c);
  write_artifacts(c, o);

  const auto table = csv(slurp(dir.path / "table.csv"));
  REQUIRE(table.size() == 2);
  CHECK(table[0] == std::vector<std::string>{"algorithm", "N", "M", "beta", "error", "k"});
  CHECK(table[1][0] == "msa");
  CHECK(table[1][1] == "7");
  CHECK(table[1][2] == "14");
  CHECK(table[1][3] == "0.001");
  CHECK(std::stod(table[1][4]) == doctest::Approx(o.row.error).epsilon(1e-5));
  CHECK(std::stoi(table[1][5]) == o.row.iterations);

  const auto history = csv(slurp(dir.path / "history.csv"));
  CHECK(history[0] == std::vector<std::string>{"iter", "increment_norm", "rel_error", "objective"});
  CHECK(static_cast<int>(history.size()) == o.row.iterations + 1);

  const auto profile = csv(slurp(dir.path / "profile.csv"));
  CHECK(profile[0] == std::vector<std::string>{"x", "y", "exact", "recon"});
  CHECK(profile.size() == 121);

  for (const auto* rows : {&history, &profile}) {
    for (std::size_t r = 1; r < rows->size(); ++r)
      for (const auto& cell : (*rows)[r]) CHECK(significant_digits(cell) <= 6);
  }
  CHECK(format_number(0.123456789) == "0.123457");
}

TEST_CASE("meta.json echoes the resolved configuration") {
  RunConfig c = quick("5.6", 7);
  c.sigma = 2.0;
  c.nt = 14;
  const RunOutcome o = run_experiment(c);
  const auto j = nlohmann::json::parse(meta_json(c, o));
  CHECK(j["experiment"] == "5.6");
  CHECK(j["problem"] == "initial_temperature");
  CHECK(j["algorithm"] == "msa");
  CHECK(j["nx"] == 7);
  CHECK(j["ny"] == 14);
  CHECK(j["beta"] == 5e-5);
  CHECK(j["delta"] == 0.02);
  CHECK(j["A"] == 1.0);
  CHECK(j["lambda"] == 0.5);
  CHECK(j["seed"] == 1);
  CHECK(j["tol"].is_null());
  CHECK(j["T"] == 4.0);
  CHECK(j["nt"] == 14);
  CHECK(j["sigma"] == 2.0);
  CHECK(j["result"]["iterations"] == o.row.iterations);
  CHECK(j["result"]["stop_reason"] == to_string(o.result.report.reason));
  CHECK(j["surrogate"]["satisfied"].is_boolean());
}

TEST_CASE("sweeps") {
  RunConfig base = quick("5.4", 7);
  {
    TempDir dir("sweep_empty");
    base.out = dir.path;
    CHECK_THROWS_AS(run_sweep(base, {}), std::invalid_argument);
    CHECK_THROWS_AS(run_sweep(base, {7, 10}), std::invalid_argument);
    CHECK_FALSE(fs::exists(dir.path));
  }
  {
    TempDir dir("sweep_54");
    base.out = dir.path;
    const SweepOutcome s = run_sweep(base, {7, 14, 28, 56});
    CHECK(s.exit_code == kExitConverged);
    CHECK_FALSE(s.failed_nx);
    REQUIRE(s.rows.size() == 4);
    const auto table = csv(slurp(dir.path / "table.csv"));
    REQUIRE(table.size() == 5);
    CHECK(table[0].back() == "status");
    for (std::size_t r = 1; r < table.size(); ++r) CHECK(table[r].back() == "converged");
    for (int n : {7, 14, 28, 56}) CHECK(fs::exists(dir.path / ("nx" + std::to_string(n)) / "profile.csv"));
    // iteration counts stay flat under refinement
    for (const auto& row : s.rows) {
      CHECK(row.iterations >= 3);
      CHECK(row.iterations <= 16);
    }
    CHECK(s.rows.back().iterations <= 2 * s.rows.front().iterations);
  }
  {
    TempDir dir("sweep_58");
    RunConfig asa = quick("5.8", 7, Algorithm::kAsa);
    asa.out = dir.path;
    const SweepOutcome s = run_sweep(asa, {7, 14, 28});
    REQUIRE(s.rows.size() == 3);
    CHECK(s.rows[0].iterations <= s.rows[1].iterations);
    CHECK(s.rows[1].iterations <= s.rows[2].iterations);
  }
  {
    TempDir dir("sweep_cap");
    base.out = dir.path;
    base.max_iter = 1;
    const SweepOutcome s = run_sweep(base, {7});
    CHECK(s.exit_code == kExitMaxIterations);
    CHECK(csv(slurp(dir.path / "table.csv"))[1].back() == "max_iter");
  }
}

// ddinv: run the domain-decomposition inversions from the command line.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ddinv/experiment.hpp"
#include "ddinv/mesh.hpp"

namespace {

using ddinv::RunConfig;
using json = nlohmann::json;

struct Flags {
  std::string experiment;
  std::string algorithm;
  int nx = 0;
  double beta = 0;
  double delta = 0;
  double A = 0;
  double lambda = 0;
  std::uint64_t seed = 0;
  double tol = 0;
  int max_iter = 0;
  int nt = 0;
  double sigma = 0;
  std::string out;
  std::string config;
  bool no_target = false;
  bool serial = false;
  std::vector<int> meshes;
};

struct Options {
  CLI::Option* experiment;
  CLI::Option* algorithm;
  CLI::Option* nx;
  CLI::Option* beta;
  CLI::Option* delta;
  CLI::Option* A;
  CLI::Option* lambda;
  CLI::Option* seed;
  CLI::Option* tol;
  CLI::Option* max_iter;
  CLI::Option* nt;
  CLI::Option* sigma;
  CLI::Option* out;
  CLI::Option* config;
};

Options add_run_flags(CLI::App* app, Flags& f) {
  Options o;
  o.experiment = app->add_option("--experiment", f.experiment, "Experiment id, 5.1 to 5.8");
  o.algorithm = app->add_option("--algorithm", f.algorithm, "msa or asa");
  o.nx = app->add_option("--nx", f.nx, "Cells in x (multiple of 7); M = 2N");
  o.beta = app->add_option("--beta", f.beta, "Regularization weight");
  o.delta = app->add_option("--delta", f.delta, "Relative noise level");
  o.A = app->add_option("--A", f.A, "Surrogate constant");
  o.lambda = app->add_option("--lambda", f.lambda, "Additive relaxation in (0,1)");
  o.seed = app->add_option("--seed", f.seed, "Noise seed");
  o.tol = app->add_option("--tol", f.tol, "Stop when ||q(n+1) - q(n)|| <= tol");
  o.max_iter = app->add_option("--max-iter", f.max_iter, "Iteration cap");
  o.nt = app->add_option("--nt", f.nt, "Crank-Nicolson steps on [0,T] (heat problems)");
  o.sigma = app->add_option("--sigma", f.sigma, "Observation window length (heat problems)");
  o.out = app->add_option("--out", f.out, "Output directory");
  o.config = app->add_option("--config", f.config, "JSON file with the same keys; flags win")->check(CLI::ExistingFile);
  app->add_flag("--no-target", f.no_target, "Ignore the exact parameter when deciding to stop");
  app->add_flag("--serial", f.serial, "Run subdomain work on one thread");
  return o;
}

template <typename T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key) && !j[key].is_null()) dst = j[key].get<T>();
}

template <typename T>
void take(const json& j, const char* key, std::optional<T>& dst) {
  if (j.contains(key)) dst = j[key].is_null() ? std::nullopt : std::optional<T>(j[key].get<T>());
}

void apply_config_file(const std::string& path, RunConfig& c) {
  std::ifstream in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("cannot parse " + path + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument(path + ": expected a JSON object");
  try {
    take(j, "experiment", c.experiment);
    if (j.contains("algorithm")) c.algorithm = ddinv::parse_algorithm(j["algorithm"].get<std::string>());
    take(j, "nx", c.nx);
    take(j, "ny", c.ny);
    take(j, "beta", c.beta);
    take(j, "delta", c.delta);
    take(j, "A", c.A);
    take(j, "lambda", c.lambda);
    take(j, "seed", c.seed);
    take(j, "tol", c.tol);
    take(j, "max_iter", c.max_iter);
    take(j, "target_rel_error", c.target_rel_error);
    take(j, "nt", c.nt);
    take(j, "sigma", c.sigma);
    if (j.contains("out")) c.out = j["out"].get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

RunConfig resolve(const Options& o, const Flags& f) {
  RunConfig c;
  if (*o.config) apply_config_file(f.config, c);
  if (*o.experiment) c.experiment = f.experiment;
  if (*o.algorithm) c.algorithm = ddinv::parse_algorithm(f.algorithm);
  if (*o.nx) {
    c.nx = f.nx;
    c.ny = 0;
  }
  if (*o.beta) c.beta = f.beta;
  if (*o.delta) c.delta = f.delta;
  if (*o.A) c.A = f.A;
  if (*o.lambda) c.lambda = f.lambda;
  if (*o.seed) c.seed = f.seed;
  if (*o.tol) c.tol = f.tol;
  if (*o.max_iter) c.max_iter = f.max_iter;
  if (*o.nt) c.nt = f.nt;
  if (*o.sigma) c.sigma = f.sigma;
  if (*o.out) c.out = f.out;
  if (f.no_target) c.target_rel_error.reset();
  if (f.serial) c.parallel = false;
  return c;
}

int run(const Options& o, const Flags& f) {
  RunConfig c;
  ddinv::RunOutcome outcome;
  try {
    c = resolve(o, f);
    outcome = ddinv::run_experiment(c);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ddinv::kExitConfigError;
  }
  if (!outcome.surrogate.satisfied) {
    std::cerr << "warning: A*scale = " << ddinv::format_number(outcome.surrogate.threshold)
              << " is below the estimated ||U||^2 = " << ddinv::format_number(outcome.surrogate.norm_squared) << '\n';
  }
  ddinv::write_artifacts(c, outcome);
  std::cerr << ddinv::to_string(c.algorithm) << " " << c.experiment << " N=" << outcome.row.nx
            << " M=" << outcome.row.ny << " error=" << ddinv::format_number(outcome.row.error)
            << " k=" << outcome.row.iterations << " (" << ddinv::to_string(outcome.result.report.reason) << ", "
            << ddinv::format_number(outcome.seconds) << " s)\n";
  return outcome.exit_code();
}

int sweep(const Options& o, const Flags& f) {
  try {
    const RunConfig c = resolve(o, f);
    std::vector<int> meshes = f.meshes;
    if (meshes.empty()) meshes = ddinv::find_experiment(c.experiment).meshes;
    const ddinv::SweepOutcome s = ddinv::run_sweep(c, meshes);
    for (const auto& r : s.rows) {
      std::cerr << ddinv::to_string(r.algorithm) << " N=" << r.nx << " error=" << ddinv::format_number(r.error)
                << " k=" << r.iterations << '\n';
    }
    if (s.failed_nx) std::cerr << "error: run with N=" << *s.failed_nx << " failed: " << s.failure << '\n';
    return s.exit_code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ddinv::kExitConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overlapping Schwarz inversion of elliptic and parabolic inverse problems"};
  app.require_subcommand(1);

  Flags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment and write table/history/profile/meta files");
  const Options run_opts = add_run_flags(run_cmd, run_flags);

  Flags sweep_flags;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run one experiment over several mesh sizes");
  const Options sweep_opts = add_run_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--meshes", sweep_flags.meshes, "Mesh sizes N (default: the experiment's list)")
      ->delimiter(',');

  int mesh_nx = 7;
  int mesh_ny = 0;
  std::string mesh_out;
  CLI::App* mesh_cmd = app.add_subcommand("mesh", "Print the triangulation");
  mesh_cmd->add_option("--nx", mesh_nx, "Cells in x");
  mesh_cmd->add_option("--ny", mesh_ny, "Cells in y (default 2*nx)");
  mesh_cmd->add_option("--out", mesh_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ddinv::kExitConfigError;
  }

  if (*run_cmd) return run(run_opts, run_flags);
  if (*sweep_cmd) return sweep(sweep_opts, sweep_flags);

  try {
    const ddinv::TriMesh mesh = ddinv::build_mesh(mesh_nx, mesh_ny == 0 ? 2 * mesh_nx : mesh_ny);
    if (mesh_out.empty()) {
      ddinv::write_mesh(std::cout, mesh);
    } else {
      std::ofstream f(mesh_out);
      ddinv::write_mesh(f, mesh);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ddinv::kExitConfigError;
  }
  return 0;
}

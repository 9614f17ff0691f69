#include "ddinv/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ddinv {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

void check_mesh(int n, const char* what) {
  if (n < 7 || n % 7 != 0) {
    throw std::invalid_argument(std::string(what) + " must be a positive multiple of 7, got " + std::to_string(n));
  }
}

std::string row_line(const TableRow& r) {
  std::ostringstream s;
  s << to_string(r.algorithm) << ',' << r.nx << ',' << r.ny << ',' << format_number(r.beta) << ','
    << format_number(r.error) << ',' << r.iterations;
  return s.str();
}

}  // namespace

std::string to_string(Algorithm algorithm) { return algorithm == Algorithm::kMsa ? "msa" : "asa"; }

Algorithm parse_algorithm(const std::string& name) {
  if (name == "msa" || name == "MSA") return Algorithm::kMsa;
  if (name == "asa" || name == "ASA") return Algorithm::kAsa;
  throw std::invalid_argument("unknown algorithm '" + name + "' (expected msa or asa)");
}

void RunConfig::validate() const {
  const ExperimentSpec& spec = find_experiment(experiment);
  check_mesh(nx, "nx");
  if (ny != 0) check_mesh(ny, "ny");
  if (beta && !(*beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (delta && !(*delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
  if (nt < 0) throw std::invalid_argument("nt must be nonnegative");
  if (sigma && !(*sigma > 0.0 && *sigma <= spec.final_time)) {
    throw std::invalid_argument("sigma must lie in (0, T]");
  }
  dd_config(spec).validate();
  if (spec.kind == ProblemKind::kInitialTemperature) {
    const int steps = nt == 0 ? kDefaultTimeSteps : nt;
    TimeGrid(spec.final_time, steps, sigma.value_or(spec.final_time));
  }
}

DDConfig RunConfig::dd_config(const ExperimentSpec& spec) const {
  DDConfig c;
  c.A = A;
  c.beta = beta.value_or(spec.beta);
  c.lambda = lambda;
  c.epsilon1 = tol;
  c.max_iter = max_iter;
  c.target_rel_error = target_rel_error;
  c.parallel = parallel;
  return c;
}

ProblemOptions RunConfig::problem_options() const {
  ProblemOptions o;
  o.nx = nx;
  o.ny = ny;
  o.delta = delta;
  o.seed = seed;
  o.time_steps = nt;
  o.window = sigma;
  return o;
}

RunOutcome run_experiment(const RunConfig& config) {
  config.validate();
  const ExperimentSpec& spec = find_experiment(config.experiment);
  const DDConfig dd = config.dd_config(spec);

  RunOutcome out;
  out.problem = build_problem(spec, config.problem_options());
  const SchwarzModel& model = *out.problem.model;
  out.surrogate = check_surrogate_constant(model, dd);

  const auto t0 = std::chrono::steady_clock::now();
  out.result = config.algorithm == Algorithm::kMsa ? run_msa(model, dd, out.problem.initial, &out.problem.exact)
                                                   : run_asa(model, dd, out.problem.initial, &out.problem.exact);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  out.row.algorithm = config.algorithm;
  out.row.nx = out.problem.mesh.nx();
  out.row.ny = out.problem.mesh.ny();
  out.row.beta = dd.beta;
  out.row.error = out.result.report.final_rel_error();
  out.row.iterations = out.result.report.iterations;
  out.row.converged = out.result.report.converged();
  return out;
}

void write_table_csv(std::ostream& out, const std::vector<TableRow>& rows) {
  out << "algorithm,N,M,beta,error,k\n";
  for (const auto& r : rows) out << row_line(r) << '\n';
}

void write_profile_csv(std::ostream& out, const RunOutcome& outcome) {
  const ProblemInstance& p = outcome.problem;
  const Vector& recon = outcome.result.state.iterate;
  out << "x,y,exact,recon\n";
  for (std::size_t k = 0; k < p.parameter_nodes.size(); ++k) {
    const Point& pt = p.mesh.node(p.parameter_nodes[k]);
    const auto i = static_cast<Index>(k);
    out << format_number(pt.x) << ',' << format_number(pt.y) << ',' << format_number(p.exact[i]) << ','
        << format_number(recon[i]) << '\n';
  }
}

std::string meta_json(const RunConfig& config, const RunOutcome& outcome) {
  const ExperimentSpec& spec = find_experiment(config.experiment);
  const DDConfig dd = config.dd_config(spec);
  const ProblemInstance& p = outcome.problem;
  nlohmann::ordered_json j;
  j["experiment"] = spec.id;
  j["problem"] = to_string(spec.kind);
  j["exact"] = spec.exact_formula;
  j["algorithm"] = to_string(config.algorithm);
  j["nx"] = p.mesh.nx();
  j["ny"] = p.mesh.ny();
  j["beta"] = dd.beta;
  j["delta"] = config.delta.value_or(spec.delta);
  j["A"] = dd.A;
  j["lambda"] = dd.lambda;
  j["seed"] = config.seed;
  j["tol"] = config.tol ? nlohmann::ordered_json(*config.tol) : nlohmann::ordered_json(nullptr);
  j["tol_relative"] = dd.epsilon1_relative;
  j["max_iter"] = dd.max_iter;
  j["target_rel_error"] =
      config.target_rel_error ? nlohmann::ordered_json(*config.target_rel_error) : nlohmann::ordered_json(nullptr);
  j["initial_guess"] = spec.initial_guess;
  if (p.grid) {
    j["T"] = p.grid->final_time;
    j["nt"] = p.grid->steps;
    j["sigma"] = p.grid->window;
  }
  j["result"] = {
      {"iterations", outcome.row.iterations},
      {"error", outcome.row.error},
      {"stop_reason", to_string(outcome.result.report.reason)},
      {"global_solves", outcome.result.report.global_solves},
  };
  j["surrogate"] = {
      {"norm_squared_estimate", outcome.surrogate.norm_squared},
      {"threshold", outcome.surrogate.threshold},
      {"satisfied", outcome.surrogate.satisfied},
  };
  return j.dump(2) + "\n";
}

void write_artifacts(const RunConfig& config, const RunOutcome& outcome) {
  std::ostringstream table;
  write_table_csv(table, {outcome.row});
  std::ostringstream history;
  write_history_csv(history, outcome.result.report);
  std::ostringstream profile;
  write_profile_csv(profile, outcome);
  const std::string meta = meta_json(config, outcome);

  std::filesystem::create_directories(config.out);
  write_file(config.out / "table.csv", table.str());
  write_file(config.out / "history.csv", history.str());
  write_file(config.out / "profile.csv", profile.str());
  write_file(config.out / "meta.json", meta);
}

SweepOutcome run_sweep(const RunConfig& base, const std::vector<int>& meshes) {
  if (meshes.empty()) throw std::invalid_argument("sweep needs at least one mesh size");
  for (int n : meshes) {
    RunConfig c = base;
    c.nx = n;
    c.ny = 0;
    c.validate();
  }

  SweepOutcome sweep;
  std::vector<std::string> status;
  for (int n : meshes) {
    RunConfig c = base;
    c.nx = n;
    c.ny = 0;
    c.out = base.out / ("nx" + std::to_string(n));
    try {
      const RunOutcome o = run_experiment(c);
      write_artifacts(c, o);
      sweep.rows.push_back(o.row);
      status.push_back(o.row.converged ? "converged" : "max_iter");
      if (!o.row.converged) sweep.exit_code = kExitMaxIterations;
    } catch (const std::exception& e) {
      TableRow r;
      r.algorithm = base.algorithm;
      r.nx = n;
      r.ny = 2 * n;
      r.beta = c.dd_config(find_experiment(c.experiment)).beta;
      r.error = std::nan("");
      sweep.rows.push_back(r);
      status.push_back("failed");
      sweep.failed_nx = n;
      sweep.failure = e.what();
      sweep.exit_code = kExitConfigError;
      break;
    }
  }

  std::ostringstream table;
  table << "algorithm,N,M,beta,error,k,status\n";
  for (std::size_t k = 0; k < sweep.rows.size(); ++k) table << row_line(sweep.rows[k]) << ',' << status[k] << '\n';
  std::filesystem::create_directories(base.out);
  write_file(base.out / "table.csv", table.str());
  return sweep;
}

}  // namespace ddinv

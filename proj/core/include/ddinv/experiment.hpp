#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddinv/problems.hpp"
#include "ddinv/schwarz.hpp"

namespace ddinv {

enum class Algorithm { kMsa, kAsa };

std::string to_string(Algorithm algorithm);
/// Accepts "msa" or "asa"; throws std::invalid_argument otherwise.
Algorithm parse_algorithm(const std::string& name);

/// Everything needed to reproduce one run. Unset optionals fall back to the
/// experiment's catalog values.
struct RunConfig {
  std::string experiment = "5.3";
  Algorithm algorithm = Algorithm::kMsa;
  int nx = 7;
  int ny = 0;  // 0: 2 * nx
  std::optional<double> beta;
  std::optional<double> delta;
  double A = 1.0;
  double lambda = 0.5;
  std::uint64_t seed = 1;
  /// Absolute increment threshold; unset uses the relative default.
  std::optional<double> tol;
  int max_iter = 200;
  std::optional<double> target_rel_error = 0.1;
  int nt = 0;  // 0: kDefaultTimeSteps
  std::optional<double> sigma;
  bool parallel = true;
  std::filesystem::path out = "out";

  /// Throws std::invalid_argument on an unknown experiment or an invalid value.
  void validate() const;
  DDConfig dd_config(const ExperimentSpec& spec) const;
  ProblemOptions problem_options() const;
};

enum ExitCode : int { kExitConverged = 0, kExitConfigError = 1, kExitMaxIterations = 2 };

struct TableRow {
  Algorithm algorithm = Algorithm::kMsa;
  int nx = 0;
  int ny = 0;
  double beta = 0.0;
  double error = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct RunOutcome {
  TableRow row;
  DDResult result;
  ProblemInstance problem;
  SurrogateCheck surrogate;
  double seconds = 0.0;

  int exit_code() const { return row.converged ? kExitConverged : kExitMaxIterations; }
};

/// Builds the problem and runs the selected algorithm. Throws
/// std::invalid_argument on configuration errors; writes nothing.
RunOutcome run_experiment(const RunConfig& config);

/// Writes table.csv, history.csv, profile.csv and meta.json into config.out
/// (created when missing).
void write_artifacts(const RunConfig& config, const RunOutcome& outcome);

/// Header "algorithm,N,M,beta,error,k" plus one line per row.
void write_table_csv(std::ostream& out, const std::vector<TableRow>& rows);
/// Header "x,y,exact,recon", one line per parameter node.
void write_profile_csv(std::ostream& out, const RunOutcome& outcome);
/// Resolved configuration and outcome summary.
std::string meta_json(const RunConfig& config, const RunOutcome& outcome);

struct SweepOutcome {
  std::vector<TableRow> rows;
  /// Mesh size whose run threw, if any; the sweep stops there.
  std::optional<int> failed_nx;
  std::string failure;
  int exit_code = kExitConverged;
};

/// Runs `base` once per mesh size, each in out/nx<N>/, and writes the
/// aggregated out/table.csv. Rows of failed runs are marked in a trailing
/// "status" column. Throws std::invalid_argument on an empty or invalid
/// mesh list.
SweepOutcome run_sweep(const RunConfig& base, const std::vector<int>& meshes);

}  // namespace ddinv

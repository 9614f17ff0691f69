#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ddinv/elliptic.hpp"
#include "ddinv/models.hpp"
#include "ddinv/parabolic.hpp"

namespace ddinv {

enum class ProblemKind { kFlux, kSource, kInitialTemperature };

std::string to_string(ProblemKind kind);

/// Reference result row: algorithm ("msa"/"asa"), N, relative error, k.
struct ReferenceRow {
  std::string algorithm;
  int nx = 0;
  double error = 0.0;
  int iterations = 0;
};

struct ExperimentSpec {
  std::string id;
  ProblemKind kind = ProblemKind::kSource;
  /// Exact parameter as a function of (x, y); for flux problems it is
  /// evaluated on x = 1.
  Coefficient exact;
  std::string exact_formula;
  Coefficient a;
  Coefficient c;
  /// Volume source and boundary data of the state equation (both zero in the
  /// catalog, kept for u(0)).
  Coefficient source;
  Coefficient boundary;
  double delta = 0.0;
  double initial_guess = 0.0;
  double beta = 0.0;
  double final_time = 4.0;
  std::vector<int> meshes;
  std::vector<ReferenceRow> reference;
};

/// The eight numerical experiments, ids "5.1" to "5.8".
const std::vector<ExperimentSpec>& example_catalog();

/// Throws std::invalid_argument for an unknown id.
const ExperimentSpec& find_experiment(const std::string& id);

/// z = u (1 + delta R) entrywise, R uniform on [-1, 1] from a 64-bit Mersenne
/// twister seeded with `seed`, drawn in column-major order.
Matrix add_noise(const Matrix& clean, double delta, std::uint64_t seed);

/// ||recon - exact||_M / ||exact||_M. Throws std::invalid_argument when the
/// exact field has zero norm.
double relative_l2_error(const Vector& recon, const Vector& exact, const SparseOperator& mass);

struct ProblemOptions {
  int nx = 7;
  /// 0 selects 2 * nx.
  int ny = 0;
  std::optional<double> delta;  // defaults to the experiment's noise level
  std::uint64_t seed = 1;
  /// Parabolic only. 0 selects kDefaultTimeSteps.
  int time_steps = 0;
  /// Observation window length; unset selects the whole interval.
  std::optional<double> window;
  SolverOptions solver;
};

/// Default number of Crank-Nicolson steps on [0, T], independent of the mesh
/// (dt = 2/7 for T = 4). Iteration counts grow quickly as dt shrinks.
inline constexpr int kDefaultTimeSteps = 14;

/// A fully assembled experiment: operators, synthetic data and the model the
/// Schwarz drivers iterate on.
struct ProblemInstance {
  ProblemKind kind = ProblemKind::kSource;
  TriMesh mesh;
  SubdomainDecomposition decomposition;
  std::shared_ptr<const SourceOperators> source_ops;
  std::shared_ptr<const FluxOperators> flux_ops;
  std::shared_ptr<const HeatOperators> heat_ops;
  std::shared_ptr<const SchwarzModel> model;
  /// Exact parameter interpolated on the parameter nodes.
  Vector exact;
  Vector initial;
  /// Noise-free and noisy observations (one column per time level).
  Matrix clean_data;
  Matrix noisy_data;
  /// Mesh nodes carrying the parameter, in parameter order.
  std::vector<NodeId> parameter_nodes;
  std::optional<TimeGrid> grid;
};

/// Builds mesh, decomposition, operators and data for `spec`. Throws
/// std::invalid_argument on an invalid mesh size or options.
ProblemInstance build_problem(const ExperimentSpec& spec, const ProblemOptions& options);

}  // namespace ddinv

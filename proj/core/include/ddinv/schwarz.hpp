#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddinv/fem.hpp"
#include "ddinv/mesh.hpp"

namespace ddinv {

struct DDConfig {
  /// Surrogate constant; should dominate the squared norm of the forward map.
  double A = 1.0;
  double beta = 1e-3;
  /// Relaxation of the additive variant, in (0, 1).
  double lambda = 0.5;
  /// Absolute stopping threshold on ||q^{n+1} - q^n||. When unset the
  /// threshold is epsilon1_relative times the first increment norm.
  std::optional<double> epsilon1;
  double epsilon1_relative = 1e-4;
  int max_iter = 200;
  /// Stop as soon as the relative error to the exact parameter drops to this
  /// value (needs the exact parameter).
  std::optional<double> target_rel_error = 0.1;
  /// Evaluate the global objective after every iteration (one global solve).
  bool track_objective = true;
  /// Run independent subdomain work on separate threads.
  bool parallel = true;

  /// Throws std::invalid_argument on A <= 0, beta < 0, lambda outside (0, 1),
  /// epsilon1 <= 0 or max_iter < 1.
  void validate() const;
};

/// Solution on every mesh node (rows) and time level (columns; one column
/// for stationary problems).
using StateField = Matrix;

/// Problem-specific operations the Schwarz drivers are generic over.
///
/// Parameters are vectors of length parameter_size(); component i is
/// supported on the indices flagged by support(i). Interface traces of
/// subdomain i have one row per node of decomposition().interfaces[i] and one
/// column per time level.
class SchwarzModel {
 public:
  virtual ~SchwarzModel() = default;

  virtual const SubdomainDecomposition& decomposition() const = 0;
  virtual Index parameter_size() const = 0;
  virtual const std::vector<char>& support(int i) const = 0;
  /// Partition-of-unity weights used to split a parameter into components.
  virtual const Vector& partition(int i) const = 0;
  /// L2 inner product of the parameter space.
  virtual double parameter_inner(const Vector& u, const Vector& v) const = 0;

  /// U(q) on the whole domain.
  virtual StateField global_state(const Vector& q) const = 0;
  /// U_i(q, p) on subdomain i.
  virtual StateField local_state(int i, const Vector& q, const Matrix& trace) const = 0;
  /// Closed-form minimizer of the local surrogate functional over V_i, given
  /// the sum of the other components, the auxiliary point `a` and the trace.
  virtual Vector local_minimize(int i, const Vector& others, const Vector& a, const Matrix& trace,
                                const DDConfig& config) const = 0;
  /// Global Tikhonov objective.
  virtual double objective(const Vector& q, double beta) const = 0;
  /// U*U q (adjoint in the parameter and data inner products).
  virtual Vector apply_normal(const Vector& q) const = 0;
  /// Factor multiplying A in the surrogate term (the window length for the
  /// heat problem, 1 otherwise).
  virtual double surrogate_scale() const { return 1.0; }
};

struct IterationRecord {
  int iter = 0;
  double increment_norm = 0.0;
  double rel_error = 0.0;  // NaN without an exact parameter
  double objective = 0.0;  // NaN when not tracked
};

enum class StopReason { kTargetReached, kIncrementBelowTolerance, kMaxIterations };

struct IterationReport {
  std::vector<IterationRecord> history;
  StopReason reason = StopReason::kMaxIterations;
  /// Number of outer iterations performed.
  int iterations = 0;
  /// Global solves: one for the initial traces plus one per tracked objective.
  int global_solves = 0;

  bool converged() const { return reason != StopReason::kMaxIterations; }
  double final_rel_error() const;
};

struct DDState {
  std::vector<Vector> components;
  std::vector<Matrix> traces;
  Vector iterate;
  int n = 0;
};

struct DDResult {
  DDState state;
  IterationReport report;
};

/// q_i = chi_i q.
std::vector<Vector> split_components(const SchwarzModel& model, const Vector& q);

/// p_i = U(q) restricted to each interface.
std::vector<Matrix> initial_traces(const SchwarzModel& model, const Vector& q);

/// Rows of `state` at the given nodes.
Matrix restrict_rows(const StateField& state, const std::vector<NodeId>& nodes);

/// New interface traces: at each interface node, the mean of the local
/// solutions over the open subdomains containing it. Throws std::logic_error
/// when an interface node lies in no open subdomain.
std::vector<Matrix> update_traces(const std::vector<StateField>& local_solutions,
                                  const SubdomainDecomposition& decomp);

/// Overwrites, for every j > i, the rows of traces[j] whose node lies in the
/// open subdomain i with the values of `local_solution`.
void push_traces(int i, const StateField& local_solution, const SubdomainDecomposition& decomp,
                 std::vector<Matrix>& traces);

/// Relative error ||q - exact|| / ||exact|| in the parameter norm.
double relative_error(const SchwarzModel& model, const Vector& q, const Vector& exact);

/// Multiplicative Schwarz iteration from the given initial parameter. With a
/// non-null `exact` the relative error is recorded and the target rule applies.
DDResult run_msa(const SchwarzModel& model, const DDConfig& config, const Vector& initial,
                 const Vector* exact = nullptr);

/// lambda * sum(local_minimizers) + (1 - lambda) * previous.
Vector relax(double lambda, const std::vector<Vector>& local_minimizers, const Vector& previous);

/// Additive Schwarz iteration with relaxation config.lambda.
DDResult run_asa(const SchwarzModel& model, const DDConfig& config, const Vector& initial,
                 const Vector* exact = nullptr);

struct SurrogateCheck {
  double norm_squared = 0.0;  // estimate of the largest eigenvalue of U*U
  double threshold = 0.0;     // A times surrogate_scale()
  int iterations = 0;
  bool estimate_converged = false;
  bool satisfied = false;
};

/// Power iteration on U*U (seeded random start, at most 200 iterations,
/// relative change below 1e-6). Logs a warning to `log` when A is too small.
SurrogateCheck check_surrogate_constant(const SchwarzModel& model, const DDConfig& config,
                                        unsigned seed = 1, std::ostream* log = nullptr);

/// Header "iter,increment_norm,rel_error,objective" and one row per iteration.
void write_history_csv(std::ostream& out, const IterationReport& report);

std::string to_string(StopReason reason);

/// "%.6g", the number format of every CSV artifact.
std::string format_number(double v);

/// Calls fn(0..count-1), on separate threads when `parallel`.
void for_each_subdomain(int count, bool parallel, const std::function<void(int)>& fn);

}  // namespace ddinv

#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>

#include "ddinv/mesh.hpp"

namespace ddinv {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Nodal P1 coefficients over all mesh nodes.
using Field = Vector;

/// Spatially varying coefficient a(x, y) or c(x, y).
using Coefficient = std::function<double(double, double)>;

Coefficient constant(double value);

/// Values attached to an ordered node set (a boundary segment or an interface).
struct TraceField {
  std::vector<NodeId> nodes;
  Vector values;

  TraceField() = default;
  TraceField(std::vector<NodeId> n, Vector v);

  /// Zero trace on the given nodes.
  static TraceField zeros(std::vector<NodeId> n);
  /// Samples a full field at the given nodes.
  static TraceField restrict(const Field& field, std::vector<NodeId> n);

  Index size() const { return values.size(); }
  /// Scatters the values into a zero field of the given length.
  Field scatter(Index length) const;
};

struct SparseOperator {
  SparseMatrix matrix;
  bool symmetric = true;

  Index dimension() const { return matrix.rows(); }
  Vector apply(const Vector& v) const { return matrix * v; }
  /// "row col value" per nonzero, zero-based.
  void write_coordinates(std::ostream& out) const;
};

/// Stiffness (a grad.grad + c u v) and mass (u v) forms.
struct AssembledForms {
  SparseOperator stiffness;
  SparseOperator mass;
};

/// Assembles P1 forms over the elements whose three nodes are all in
/// `node_subset` (all elements when null). Coefficients are sampled at element
/// centroids. Matrices keep the full mesh dimension. Throws
/// std::invalid_argument when a is not positive at some centroid.
AssembledForms assemble(const TriMesh& mesh, const Coefficient& a, const Coefficient& c,
                        const std::vector<char>* node_subset = nullptr);

/// 1D P1 mass matrix over the boundary edges on `sides`, restricted to edges
/// with both endpoints in `node_subset` when given. Throws when no edge
/// qualifies.
SparseOperator assemble_boundary_mass(const TriMesh& mesh, std::uint8_t sides,
                                      const std::vector<char>* node_subset = nullptr);

/// Edge-sampled variant: each edge's entries are scaled by a at the edge midpoint.
SparseOperator assemble_boundary_mass(const TriMesh& mesh, std::uint8_t sides,
                                      const Coefficient& weight,
                                      const std::vector<char>* node_subset = nullptr);

struct SolverOptions {
  /// Relative residual ||b - A x|| / ||b|| at which CG stops.
  double tolerance = 1e-10;
  /// 0 selects max(1000, 4 * dimension).
  int max_iterations = 0;
};

class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Symmetric system restricted to a set of free nodes, with values on a set of
/// fixed (Dirichlet) nodes eliminated into the right-hand side. Nodes in
/// neither set are ignored. Solves use Jacobi-preconditioned conjugate
/// gradients; the object is immutable and safe to share between threads.
class DirichletSolver {
 public:
  DirichletSolver() = default;
  DirichletSolver(const SparseMatrix& system, std::vector<NodeId> free_nodes,
                  std::vector<NodeId> fixed_nodes, SolverOptions options = {});

  const std::vector<NodeId>& free_nodes() const { return free_; }
  const std::vector<NodeId>& fixed_nodes() const { return fixed_; }
  Index dimension() const { return full_dimension_; }

  /// Solves A x = rhs on the free nodes with x = fixed_values on the fixed
  /// nodes (zero when empty). `rhs` and the result have full dimension; the
  /// result is zero on nodes in neither set.
  Field solve(const Vector& rhs, const Vector& fixed_values = Vector()) const;

  /// Solve on the compressed free-node numbering.
  Vector solve_free(const Vector& rhs_free, const Vector* guess = nullptr) const;

  /// A_ff x_f for a compressed vector.
  Vector apply_free(const Vector& x_free) const { return free_free_ * x_free; }
  /// A_fd g for values on the fixed nodes.
  Vector apply_coupling(const Vector& fixed_values) const { return free_fixed_ * fixed_values; }

  Vector gather_free(const Vector& full) const;
  Vector gather_fixed(const Vector& full) const;
  void scatter_free(const Vector& compressed, Vector& full) const;

 private:
  std::vector<NodeId> free_;
  std::vector<NodeId> fixed_;
  Index full_dimension_ = 0;
  SparseMatrix free_free_;
  SparseMatrix free_fixed_;
  SolverOptions options_;
};

/// Convenience wrapper: Dirichlet values on `dirichlet` nodes, every other
/// node free.
Field solve(const SparseOperator& system, const Vector& rhs, const std::vector<NodeId>& dirichlet,
            const Vector& dirichlet_values = Vector(), SolverOptions options = {});

/// u^T M v. Throws std::invalid_argument on dimension mismatch.
double inner_product(const Vector& u, const Vector& v, const SparseOperator& mass);

/// Submatrix of `m` on the given rows and columns (compressed numbering).
SparseMatrix extract_block(const SparseMatrix& m, const std::vector<NodeId>& rows,
                           const std::vector<NodeId>& cols);

}  // namespace ddinv

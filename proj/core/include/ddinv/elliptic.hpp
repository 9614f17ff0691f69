#pragma once

#include <vector>

#include "ddinv/fem.hpp"
#include "ddinv/mesh.hpp"

namespace ddinv {

/// Solution operators of -div(a grad u) + c u = f with homogeneous Dirichlet
/// data, on the whole rectangle and on each subdomain.
///
/// The forward map is U(f) = K_ff^{-1} (M f)_f, so it is self-adjoint in the
/// mass inner product for arbitrary nodal f. Local solves U_i(f, p) impose
/// zero on the outer boundary part of the subdomain and p on its interface
/// (ordered as decomposition().interfaces[i]).
class SourceOperators {
 public:
  SourceOperators(TriMesh mesh, SubdomainDecomposition decomp, Coefficient a, Coefficient c,
                  SolverOptions options = {});

  const TriMesh& mesh() const { return mesh_; }
  const SubdomainDecomposition& decomposition() const { return decomp_; }
  const SparseOperator& mass() const { return global_.mass; }
  const SparseOperator& stiffness() const { return global_.stiffness; }
  const SparseOperator& local_mass(int i) const { return local_[i].mass; }
  const SparseOperator& local_stiffness(int i) const { return local_[i].stiffness; }

  /// Free (open subdomain) and fixed (subdomain boundary) nodes of subdomain i.
  const std::vector<NodeId>& local_free_nodes(int i) const { return local_[i].solver.free_nodes(); }
  const std::vector<NodeId>& local_fixed_nodes(int i) const { return local_[i].solver.fixed_nodes(); }

  /// u with source f and Dirichlet data g (interpolated at boundary nodes).
  Field solve_full(const Field& f, const Coefficient& g) const;
  /// u(0): the state with zero source and Dirichlet data g.
  Field solve_u0(const Coefficient& g) const;

  /// U(f): zero Dirichlet data.
  Field forward_global(const Field& f) const;

  /// U_i(f, p). The result vanishes outside the closed subdomain.
  Field forward_local(int i, const Field& f, const Vector& p) const;
  Field forward_local(int i, const Field& f) const;

  /// Mass-weighted lift of values on the fixed nodes of subdomain i into the
  /// open subdomain: returns x with x_f = M_ff^{-1} M_fd v_d (zero elsewhere).
  Field local_mass_lift(int i, const Field& v) const;

 private:
  struct Region {
    SparseOperator stiffness;
    SparseOperator mass;
    DirichletSolver solver;
    DirichletSolver mass_solver;
    std::vector<Index> interface_slot;  // position of each interface node in the fixed list
  };

  TriMesh mesh_;
  SubdomainDecomposition decomp_;
  Coefficient a_;
  Coefficient c_;
  Region global_;
  std::vector<Region> local_;
};

/// Solution operators of the flux problem: -div(a grad u) + c u = 0 with
/// a du/dn = h on the right side (Gamma_1) and a du/dn = omega on the other
/// three sides (Gamma_0).
///
/// The decomposition is kept with natural outer boundary conditions (see
/// OuterBoundary), so local solves also determine the outer boundary nodes of
/// their subdomain and interfaces reach the outer boundary.
///
/// Boundary traces are vectors aligned with gamma1_nodes() (ordered by y) or
/// gamma0_nodes(). The two corner nodes at x = 1 belong to both node lists:
/// they carry flux unknowns and also receive data through the Gamma_0 edges
/// that end there.
class FluxOperators {
 public:
  FluxOperators(TriMesh mesh, SubdomainDecomposition decomp, Coefficient a, Coefficient c,
                SolverOptions options = {});

  const TriMesh& mesh() const { return mesh_; }
  const SubdomainDecomposition& decomposition() const { return decomp_; }

  const std::vector<NodeId>& gamma1_nodes() const { return gamma1_; }
  const std::vector<NodeId>& gamma0_nodes() const { return gamma0_; }

  /// Boundary mass matrices with full mesh dimension.
  const SparseOperator& gamma1_mass() const { return gamma1_mass_; }
  const SparseOperator& gamma0_mass() const { return gamma0_mass_; }
  const SparseOperator& local_gamma1_mass(int i) const { return local_[i].gamma1_mass; }
  const SparseOperator& local_gamma0_mass(int i) const { return local_[i].gamma0_mass; }
  const SparseOperator& mass() const { return forms_.mass; }

  /// Inner products of traces aligned with gamma1_nodes() / gamma0_nodes().
  double gamma1_inner(const Vector& u, const Vector& v) const;
  double gamma0_inner(const Vector& u, const Vector& v) const;
  /// Restricted to the boundary part of subdomain i.
  double local_gamma1_inner(int i, const Vector& u, const Vector& v) const;
  double local_gamma0_inner(int i, const Vector& u, const Vector& v) const;

  /// Gamma_1 indices (into gamma1_nodes()) lying on the closed subdomain i.
  const std::vector<Index>& support(int i) const { return local_[i].support; }

  Field gamma1_scatter(const Vector& h) const;
  Field gamma0_scatter(const Vector& omega) const;
  Vector gamma1_gather(const Field& u) const;
  Vector gamma0_gather(const Field& u) const;

  /// u(0): volume source f, Neumann data g on Gamma_0, zero flux on Gamma_1.
  Field solve_u0(const Coefficient& f, const Coefficient& g) const;

  /// U(h) as a volume field.
  Field forward_global(const Vector& h) const;
  /// U*(omega): volume field and its Gamma_1 trace.
  Field adjoint_global_field(const Vector& omega) const;
  Vector adjoint_global(const Vector& omega) const;

  /// U_i(h, p): Neumann h on the Gamma_1 part of subdomain i, zero Neumann on
  /// its Gamma_0 part, Dirichlet p on its interface.
  Field forward_local(int i, const Vector& h, const Vector& p) const;
  Field forward_local(int i, const Vector& h) const;
  /// U_i*(omega, q): Neumann omega on the Gamma_0 part, zero on the Gamma_1 part.
  Field adjoint_local(int i, const Vector& omega, const Vector& q) const;
  Field adjoint_local(int i, const Vector& omega) const;

 private:
  struct Region {
    SparseOperator gamma1_mass;  // empty when the subdomain misses Gamma_1
    SparseOperator gamma0_mass;
    DirichletSolver solver;
    std::vector<Index> support;
  };

  Field local_solve(int i, const Vector& load, const Vector& p) const;

  TriMesh mesh_;
  SubdomainDecomposition decomp_;
  AssembledForms forms_;
  std::vector<NodeId> gamma1_;
  std::vector<NodeId> gamma0_;
  SparseOperator gamma1_mass_;
  SparseOperator gamma0_mass_;
  SparseOperator gamma1_compact_;  // |gamma1| x |gamma1|
  SparseOperator gamma0_compact_;
  DirichletSolver global_solver_;
  std::vector<Region> local_;
};

}  // namespace ddinv

#pragma once

#include <vector>

#include "ddinv/fem.hpp"
#include "ddinv/mesh.hpp"

namespace ddinv {

/// Uniform time grid t_k = k*dt on [0, T] with an observation window
/// [T - sigma, T] that starts on a grid time.
struct TimeGrid {
  double final_time = 4.0;
  int steps = 1;
  double window = 4.0;

  TimeGrid() = default;
  /// Throws std::invalid_argument unless T > 0, steps >= 1 and sigma is a
  /// positive multiple of dt not exceeding T.
  TimeGrid(double final_time, int steps, double window);

  double dt() const { return final_time / steps; }
  int levels() const { return steps + 1; }
  double time(int k) const { return final_time * k / steps; }
  /// First level inside the observation window.
  int window_start() const;
  /// Trapezoidal weights over the window; zero for levels before it.
  Vector window_weights() const;
};

/// One nodal field per time level: column k holds the solution at t_k.
using SpaceTimeField = Matrix;

/// Crank-Nicolson solution operators of u_t - div(a grad u) = 0 with Dirichlet
/// boundary conditions, globally and per subdomain.
///
/// Forward maps only read the initial value at free nodes (the Dirichlet part
/// is overwritten by the boundary data). Adjoint maps are the adjoints in the
/// mass inner product: the terminal value is first projected onto the
/// zero-trace space. With these conventions
///   <U(phi)(t_k), omega> = <phi, U*(omega)(T - t_k)>
/// holds to solver precision whenever phi vanishes on the fixed nodes.
class HeatOperators {
 public:
  HeatOperators(TriMesh mesh, SubdomainDecomposition decomp, Coefficient a, TimeGrid grid,
                SolverOptions options = {});

  const TriMesh& mesh() const { return mesh_; }
  const SubdomainDecomposition& decomposition() const { return decomp_; }
  const TimeGrid& grid() const { return grid_; }
  const SparseOperator& mass() const { return global_.mass; }
  const SparseOperator& local_mass(int i) const { return local_[i].mass; }

  SpaceTimeField forward_global(const Field& phi) const;
  /// Column k holds U*(omega)(t_k); column steps equals the projected omega.
  SpaceTimeField adjoint_global(const Field& omega) const;

  /// U_i(phi, p) with p given per interface node (rows, ordered as
  /// decomposition().interfaces[i]) and time level (columns). An empty p
  /// means zero.
  SpaceTimeField forward_local(int i, const Field& phi, const Matrix& p = Matrix()) const;
  /// U_i*(omega, q), column k at time t_k; q as for forward_local.
  SpaceTimeField adjoint_local(int i, const Field& omega, const Matrix& q = Matrix()) const;

  /// sum_k w_k U_i*(r(t_k), 0)(T - t_k) over the observation window, computed
  /// with a single backward recursion.
  Field adjoint_accumulate(int i, const SpaceTimeField& r) const;
  /// Global analogue with U*.
  Field adjoint_accumulate_global(const SpaceTimeField& r) const;

  /// x with x_f = M_ff^{-1} M_fd v_d on the open subdomain i, zero elsewhere.
  Field local_mass_lift(int i, const Field& v) const;

 private:
  struct Region {
    SparseOperator mass;
    SparseMatrix explicit_part;  // M - dt/2 K, full dimension
    DirichletSolver implicit;    // M + dt/2 K
    DirichletSolver mass_solver;
    SparseMatrix explicit_free;  // free-free block of M - dt/2 K
    std::vector<Index> interface_slot;
  };

  Region build_region(const std::vector<char>* closure, const std::vector<char>& free_mask,
                      const Coefficient& a, SolverOptions options) const;
  SpaceTimeField march(const Region& r, const Field& initial, const Matrix* fixed_values,
                       bool backward) const;
  Vector project_free(const Region& r, const Field& v) const;
  Field accumulate(const Region& r, const SpaceTimeField& residual) const;
  Matrix expand_trace(int i, const Matrix& p) const;

  TriMesh mesh_;
  SubdomainDecomposition decomp_;
  TimeGrid grid_;
  Region global_;
  std::vector<Region> local_;
};

}  // namespace ddinv

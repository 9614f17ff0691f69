#include "ddinv/parabolic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ddinv {

TimeGrid::TimeGrid(double final_time_, int steps_, double window_)
    : final_time(final_time_), steps(steps_), window(window_) {
  if (!(final_time > 0.0)) throw std::invalid_argument("TimeGrid: final time must be positive");
  if (steps < 1) throw std::invalid_argument("TimeGrid: need at least one time step");
  if (!(window > 0.0) || window > final_time * (1.0 + 1e-12)) {
    throw std::invalid_argument("TimeGrid: observation window must lie in (0, T]");
  }
  const double ratio = window / dt();
  if (std::abs(ratio - std::round(ratio)) > 1e-8) {
    throw std::invalid_argument("TimeGrid: observation window " + std::to_string(window) +
                                " is not a multiple of dt = " + std::to_string(dt()));
  }
}

int TimeGrid::window_start() const {
  return steps - static_cast<int>(std::lround(window / dt()));
}

Vector TimeGrid::window_weights() const {
  Vector w = Vector::Zero(levels());
  const int start = window_start();
  for (int k = start; k <= steps; ++k) w[k] = dt();
  w[start] *= 0.5;
  w[steps] *= 0.5;
  return w;
}

HeatOperators::HeatOperators(TriMesh mesh, SubdomainDecomposition decomp, Coefficient a,
                             TimeGrid grid, SolverOptions options)
    : mesh_(std::move(mesh)), decomp_(std::move(decomp)), grid_(grid) {
  std::vector<char> interior(mesh_.node_count(), 0);
  for (NodeId n = 0; n < mesh_.node_count(); ++n) interior[n] = !mesh_.on_boundary(n);
  global_ = build_region(nullptr, interior, a, options);

  local_.reserve(decomp_.size());
  for (int i = 0; i < decomp_.size(); ++i) {
    Region r = build_region(&decomp_.closure[i], decomp_.open[i], a, options);
    std::vector<Index> slot_of(mesh_.node_count(), -1);
    const auto& fixed = r.implicit.fixed_nodes();
    for (std::size_t k = 0; k < fixed.size(); ++k) slot_of[fixed[k]] = static_cast<Index>(k);
    for (NodeId n : decomp_.interfaces[i]) r.interface_slot.push_back(slot_of[n]);
    local_.push_back(std::move(r));
  }
}

HeatOperators::Region HeatOperators::build_region(const std::vector<char>* closure,
                                                  const std::vector<char>& free_mask,
                                                  const Coefficient& a, SolverOptions options) const {
  const AssembledForms forms = assemble(mesh_, a, constant(0.0), closure);
  const double half_dt = 0.5 * grid_.dt();
  Region r;
  r.mass = forms.mass;
  const SparseMatrix implicit = forms.mass.matrix + half_dt * forms.stiffness.matrix;
  r.explicit_part = forms.mass.matrix - half_dt * forms.stiffness.matrix;

  std::vector<NodeId> free_nodes;
  std::vector<NodeId> fixed_nodes;
  for (NodeId n = 0; n < mesh_.node_count(); ++n) {
    if (closure != nullptr && !(*closure)[n]) continue;
    (free_mask[n] ? free_nodes : fixed_nodes).push_back(n);
  }
  r.implicit = DirichletSolver(implicit, free_nodes, fixed_nodes, options);
  r.mass_solver = DirichletSolver(forms.mass.matrix, free_nodes, fixed_nodes, options);
  r.explicit_free = extract_block(r.explicit_part, free_nodes, free_nodes);
  return r;
}

Vector HeatOperators::project_free(const Region& r, const Field& v) const {
  const Vector fixed = r.mass_solver.gather_fixed(v);
  const Vector free_part = r.mass_solver.gather_free(v);
  if (fixed.size() == 0 || fixed.cwiseAbs().maxCoeff() == 0.0) return free_part;
  // M_ff x = M_ff v_f + M_fd v_d
  return free_part + r.mass_solver.solve_free(r.mass_solver.apply_coupling(fixed));
}

SpaceTimeField HeatOperators::march(const Region& r, const Field& initial,
                                    const Matrix* fixed_values, bool backward) const {
  const int steps = grid_.steps;
  const Index n = mesh_.node_count();
  SpaceTimeField out = SpaceTimeField::Zero(n, steps + 1);
  auto level = [&](int k) { return backward ? steps - k : k; };

  Vector u_free = r.implicit.gather_free(initial);
  Field u = Field::Zero(n);
  r.implicit.scatter_free(u_free, u);
  const auto& fixed = r.implicit.fixed_nodes();
  auto set_fixed = [&](int k) {
    if (fixed_values == nullptr) return;
    for (std::size_t s = 0; s < fixed.size(); ++s) u[fixed[s]] = (*fixed_values)(static_cast<Index>(s), level(k));
  };
  set_fixed(0);
  out.col(level(0)) = u;

  for (int k = 1; k <= steps; ++k) {
    Vector rhs = r.implicit.gather_free(r.explicit_part * u);
    if (fixed_values != nullptr) {
      rhs -= r.implicit.apply_coupling(fixed_values->col(level(k)));
    }
    u_free = r.implicit.solve_free(rhs, &u_free);
    u.setZero();
    r.implicit.scatter_free(u_free, u);
    set_fixed(k);
    out.col(level(k)) = u;
  }
  return out;
}

Matrix HeatOperators::expand_trace(int i, const Matrix& p) const {
  const Region& r = local_[i];
  const Index rows = static_cast<Index>(decomp_.interfaces[i].size());
  if (p.rows() != rows || p.cols() != grid_.levels()) {
    throw std::invalid_argument("HeatOperators: interface trace must be " + std::to_string(rows) +
                                " x " + std::to_string(grid_.levels()));
  }
  Matrix fixed = Matrix::Zero(static_cast<Index>(r.implicit.fixed_nodes().size()), grid_.levels());
  for (std::size_t k = 0; k < r.interface_slot.size(); ++k) {
    fixed.row(r.interface_slot[k]) = p.row(static_cast<Index>(k));
  }
  return fixed;
}

SpaceTimeField HeatOperators::forward_global(const Field& phi) const {
  if (phi.size() != mesh_.node_count()) throw std::invalid_argument("forward_global: wrong length");
  return march(global_, phi, nullptr, false);
}

SpaceTimeField HeatOperators::adjoint_global(const Field& omega) const {
  if (omega.size() != mesh_.node_count()) throw std::invalid_argument("adjoint_global: wrong length");
  Field terminal = Field::Zero(mesh_.node_count());
  global_.implicit.scatter_free(project_free(global_, omega), terminal);
  return march(global_, terminal, nullptr, true);
}

SpaceTimeField HeatOperators::forward_local(int i, const Field& phi, const Matrix& p) const {
  if (i < 0 || i >= decomp_.size()) throw std::out_of_range("forward_local: bad subdomain");
  if (phi.size() != mesh_.node_count()) throw std::invalid_argument("forward_local: wrong length");
  if (p.size() == 0) return march(local_[i], phi, nullptr, false);
  const Matrix fixed = expand_trace(i, p);
  return march(local_[i], phi, &fixed, false);
}

SpaceTimeField HeatOperators::adjoint_local(int i, const Field& omega, const Matrix& q) const {
  if (i < 0 || i >= decomp_.size()) throw std::out_of_range("adjoint_local: bad subdomain");
  if (omega.size() != mesh_.node_count()) throw std::invalid_argument("adjoint_local: wrong length");
  const Region& r = local_[i];
  Field terminal = Field::Zero(mesh_.node_count());
  r.implicit.scatter_free(project_free(r, omega), terminal);
  if (q.size() == 0) return march(r, terminal, nullptr, true);
  const Matrix fixed = expand_trace(i, q);
  return march(r, terminal, &fixed, true);
}

Field HeatOperators::accumulate(const Region& r, const SpaceTimeField& residual) const {
  if (residual.rows() != mesh_.node_count() || residual.cols() != grid_.levels()) {
    throw std::invalid_argument("adjoint_accumulate: residual must be nodes x levels");
  }
  const Vector w = grid_.window_weights();
  const int steps = grid_.steps;
  auto load = [&](int k) -> Vector { return r.implicit.gather_free(r.mass.matrix * residual.col(k)); };

  // psi_k = (A- A+^{-1}) psi_{k+1} + w_k (M r_k)_f, the transpose of the
  // forward recursion, started from psi_T = w_T (M r_T)_f.
  Vector psi = w[steps] * load(steps);
  Vector y = Vector::Zero(psi.size());
  for (int k = steps - 1; k >= 0; --k) {
    y = r.implicit.solve_free(psi, &y);
    psi = r.explicit_free * y;
    if (w[k] != 0.0) psi += w[k] * load(k);
  }
  Field out = Field::Zero(mesh_.node_count());
  r.implicit.scatter_free(r.mass_solver.solve_free(psi), out);
  return out;
}

Field HeatOperators::adjoint_accumulate(int i, const SpaceTimeField& r) const {
  if (i < 0 || i >= decomp_.size()) throw std::out_of_range("adjoint_accumulate: bad subdomain");
  return accumulate(local_[i], r);
}

Field HeatOperators::adjoint_accumulate_global(const SpaceTimeField& r) const {
  return accumulate(global_, r);
}

Field HeatOperators::local_mass_lift(int i, const Field& v) const {
  if (i < 0 || i >= decomp_.size()) throw std::out_of_range("local_mass_lift: bad subdomain");
  const DirichletSolver& ms = local_[i].mass_solver;
  const Vector fixed = ms.gather_fixed(v);
  Field out = Field::Zero(mesh_.node_count());
  if (fixed.size() == 0 || fixed.cwiseAbs().maxCoeff() == 0.0) return out;
  ms.scatter_free(ms.solve_free(ms.apply_coupling(fixed)), out);
  return out;
}

}  // namespace ddinv

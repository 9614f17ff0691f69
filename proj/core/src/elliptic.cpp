#include "ddinv/elliptic.hpp"

#include <stdexcept>
#include <string>

namespace ddinv {

namespace {

void check_subdomain(int i, const SubdomainDecomposition& d) {
  if (i < 0 || i >= d.size()) {
    throw std::out_of_range("subdomain index " + std::to_string(i) + " out of range");
  }
}

void check_length(const Vector& v, Index expected, const char* what) {
  if (v.size() != expected) {
    throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(expected) +
                                ", got " + std::to_string(v.size()));
  }
}

SparseOperator compact(const SparseOperator& full, const std::vector<NodeId>& nodes) {
  return SparseOperator{extract_block(full.matrix, nodes, nodes), true};
}

}  // namespace

// ---------------------------------------------------------------------------
// Source problem

SourceOperators::SourceOperators(TriMesh mesh, SubdomainDecomposition decomp, Coefficient a,
                                 Coefficient c, SolverOptions options)
    : mesh_(std::move(mesh)), decomp_(std::move(decomp)), a_(std::move(a)), c_(std::move(c)) {
  const AssembledForms forms = assemble(mesh_, a_, c_);
  global_.stiffness = forms.stiffness;
  global_.mass = forms.mass;
  std::vector<NodeId> interior;
  std::vector<NodeId> boundary;
  for (NodeId n = 0; n < mesh_.node_count(); ++n) {
    (mesh_.on_boundary(n) ? boundary : interior).push_back(n);
  }
  global_.solver = DirichletSolver(forms.stiffness.matrix, interior, boundary, options);
  global_.mass_solver = DirichletSolver(forms.mass.matrix, interior, boundary, options);

  local_.resize(decomp_.size());
  for (int i = 0; i < decomp_.size(); ++i) {
    Region& r = local_[i];
    const AssembledForms lf = assemble(mesh_, a_, c_, &decomp_.closure[i]);
    r.stiffness = lf.stiffness;
    r.mass = lf.mass;
    std::vector<NodeId> free_nodes;
    std::vector<NodeId> fixed_nodes;
    std::vector<Index> slot_of(mesh_.node_count(), -1);
    for (NodeId n = 0; n < mesh_.node_count(); ++n) {
      if (decomp_.open[i][n]) {
        free_nodes.push_back(n);
      } else if (decomp_.closure[i][n]) {
        slot_of[n] = static_cast<Index>(fixed_nodes.size());
        fixed_nodes.push_back(n);
      }
    }
    for (NodeId n : decomp_.interfaces[i]) r.interface_slot.push_back(slot_of[n]);
    r.solver = DirichletSolver(lf.stiffness.matrix, free_nodes, fixed_nodes, options);
    r.mass_solver = DirichletSolver(lf.mass.matrix, free_nodes, fixed_nodes, options);
  }
}

Field SourceOperators::solve_full(const Field& f, const Coefficient& g) const {
  check_length(f, mesh_.node_count(), "solve_full");
  const auto& fixed = global_.solver.fixed_nodes();
  Vector values(static_cast<Index>(fixed.size()));
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    const Point& p = mesh_.node(fixed[k]);
    values[static_cast<Index>(k)] = g(p.x, p.y);
  }
  return global_.solver.solve(global_.mass.matrix * f, values);
}

Field SourceOperators::solve_u0(const Coefficient& g) const {
  return solve_full(Field::Zero(mesh_.node_count()), g);
}

Field SourceOperators::forward_global(const Field& f) const {
  check_length(f, mesh_.node_count(), "forward_global");
  return global_.solver.solve(global_.mass.matrix * f);
}

Field SourceOperators::forward_local(int i, const Field& f, const Vector& p) const {
  check_subdomain(i, decomp_);
  check_length(f, mesh_.node_count(), "forward_local");
  const Region& r = local_[i];
  check_length(p, static_cast<Index>(r.interface_slot.size()), "forward_local trace");
  Vector fixed = Vector::Zero(static_cast<Index>(r.solver.fixed_nodes().size()));
  for (std::size_t k = 0; k < r.interface_slot.size(); ++k) fixed[r.interface_slot[k]] = p[static_cast<Index>(k)];
  return r.solver.solve(r.mass.matrix * f, fixed);
}

Field SourceOperators::forward_local(int i, const Field& f) const {
  check_subdomain(i, decomp_);
  check_length(f, mesh_.node_count(), "forward_local");
  return local_[i].solver.solve(local_[i].mass.matrix * f);
}

Field SourceOperators::local_mass_lift(int i, const Field& v) const {
  check_subdomain(i, decomp_);
  const DirichletSolver& ms = local_[i].mass_solver;
  const Vector fixed = ms.gather_fixed(v);
  Field out = Field::Zero(mesh_.node_count());
  if (fixed.cwiseAbs().maxCoeff() == 0.0) return out;
  ms.scatter_free(ms.solve_free(ms.apply_coupling(fixed)), out);
  return out;
}

// ---------------------------------------------------------------------------
// Flux problem

FluxOperators::FluxOperators(TriMesh mesh, SubdomainDecomposition decomp, Coefficient a,
                             Coefficient c, SolverOptions options)
    : mesh_(std::move(mesh)) {
  decomp_ = decomp.outer == OuterBoundary::kNatural ? std::move(decomp)
                                                    : build_subdomains(mesh_, decomp.boxes, OuterBoundary::kNatural);
  forms_ = assemble(mesh_, a, c);
  gamma1_ = mesh_.boundary_nodes(kRight);
  gamma0_ = mesh_.boundary_nodes(kLeft | kBottom | kTop);
  gamma1_mass_ = assemble_boundary_mass(mesh_, kRight);
  gamma0_mass_ = assemble_boundary_mass(mesh_, kLeft | kBottom | kTop);
  gamma1_compact_ = compact(gamma1_mass_, gamma1_);
  gamma0_compact_ = compact(gamma0_mass_, gamma0_);

  std::vector<NodeId> all(mesh_.node_count());
  for (NodeId n = 0; n < mesh_.node_count(); ++n) all[n] = n;
  global_solver_ = DirichletSolver(forms_.stiffness.matrix, all, {}, options);

  local_.resize(decomp_.size());
  for (int i = 0; i < decomp_.size(); ++i) {
    Region& r = local_[i];
    const auto& closure = decomp_.closure[i];
    const AssembledForms lf = assemble(mesh_, a, c, &closure);
    const bool touches_right = decomp_.boxes[i].x1 >= mesh_.width();
    r.gamma1_mass = touches_right ? assemble_boundary_mass(mesh_, kRight, &closure)
                                  : SparseOperator{SparseMatrix(mesh_.node_count(), mesh_.node_count()), true};
    r.gamma0_mass = assemble_boundary_mass(mesh_, kLeft | kBottom | kTop, &closure);
    std::vector<char> fixed_mask(mesh_.node_count(), 0);
    for (NodeId n : decomp_.interfaces[i]) fixed_mask[n] = 1;
    std::vector<NodeId> free_nodes;
    for (NodeId n = 0; n < mesh_.node_count(); ++n) {
      if (closure[n] && !fixed_mask[n]) free_nodes.push_back(n);
    }
    r.solver = DirichletSolver(lf.stiffness.matrix, free_nodes, decomp_.interfaces[i], options);
    for (std::size_t k = 0; k < gamma1_.size(); ++k) {
      if (touches_right && closure[gamma1_[k]]) r.support.push_back(static_cast<Index>(k));
    }
  }
}

double FluxOperators::gamma1_inner(const Vector& u, const Vector& v) const {
  return inner_product(u, v, gamma1_compact_);
}

double FluxOperators::gamma0_inner(const Vector& u, const Vector& v) const {
  return inner_product(u, v, gamma0_compact_);
}

double FluxOperators::local_gamma1_inner(int i, const Vector& u, const Vector& v) const {
  check_subdomain(i, decomp_);
  return inner_product(gamma1_scatter(u), gamma1_scatter(v), local_[i].gamma1_mass);
}

double FluxOperators::local_gamma0_inner(int i, const Vector& u, const Vector& v) const {
  check_subdomain(i, decomp_);
  return inner_product(gamma0_scatter(u), gamma0_scatter(v), local_[i].gamma0_mass);
}

Field FluxOperators::gamma1_scatter(const Vector& h) const {
  check_length(h, static_cast<Index>(gamma1_.size()), "gamma1 trace");
  Field out = Field::Zero(mesh_.node_count());
  for (std::size_t k = 0; k < gamma1_.size(); ++k) out[gamma1_[k]] = h[static_cast<Index>(k)];
  return out;
}

Field FluxOperators::gamma0_scatter(const Vector& omega) const {
  check_length(omega, static_cast<Index>(gamma0_.size()), "gamma0 trace");
  Field out = Field::Zero(mesh_.node_count());
  for (std::size_t k = 0; k < gamma0_.size(); ++k) out[gamma0_[k]] = omega[static_cast<Index>(k)];
  return out;
}

Vector FluxOperators::gamma1_gather(const Field& u) const {
  Vector out(static_cast<Index>(gamma1_.size()));
  for (std::size_t k = 0; k < gamma1_.size(); ++k) out[static_cast<Index>(k)] = u[gamma1_[k]];
  return out;
}

Vector FluxOperators::gamma0_gather(const Field& u) const {
  Vector out(static_cast<Index>(gamma0_.size()));
  for (std::size_t k = 0; k < gamma0_.size(); ++k) out[static_cast<Index>(k)] = u[gamma0_[k]];
  return out;
}

Field FluxOperators::solve_u0(const Coefficient& f, const Coefficient& g) const {
  Field fn(mesh_.node_count());
  Vector gn(static_cast<Index>(gamma0_.size()));
  for (NodeId n = 0; n < mesh_.node_count(); ++n) fn[n] = f(mesh_.node(n).x, mesh_.node(n).y);
  for (std::size_t k = 0; k < gamma0_.size(); ++k) {
    const Point& p = mesh_.node(gamma0_[k]);
    gn[static_cast<Index>(k)] = g(p.x, p.y);
  }
  return global_solver_.solve(forms_.mass.matrix * fn + gamma0_mass_.matrix * gamma0_scatter(gn));
}

Field FluxOperators::forward_global(const Vector& h) const {
  return global_solver_.solve(gamma1_mass_.matrix * gamma1_scatter(h));
}

Field FluxOperators::adjoint_global_field(const Vector& omega) const {
  return global_solver_.solve(gamma0_mass_.matrix * gamma0_scatter(omega));
}

Vector FluxOperators::adjoint_global(const Vector& omega) const {
  return gamma1_gather(adjoint_global_field(omega));
}

Field FluxOperators::local_solve(int i, const Vector& load, const Vector& p) const {
  const Region& r = local_[i];
  if (p.size() == 0) return r.solver.solve(load);
  check_length(p, static_cast<Index>(decomp_.interfaces[i].size()), "local trace");
  return r.solver.solve(load, p);
}

Field FluxOperators::forward_local(int i, const Vector& h, const Vector& p) const {
  check_subdomain(i, decomp_);
  return local_solve(i, local_[i].gamma1_mass.matrix * gamma1_scatter(h), p);
}

Field FluxOperators::forward_local(int i, const Vector& h) const {
  return forward_local(i, h, Vector());
}

Field FluxOperators::adjoint_local(int i, const Vector& omega, const Vector& q) const {
  check_subdomain(i, decomp_);
  return local_solve(i, local_[i].gamma0_mass.matrix * gamma0_scatter(omega), q);
}

Field FluxOperators::adjoint_local(int i, const Vector& omega) const {
  return adjoint_local(i, omega, Vector());
}

}  // namespace ddinv

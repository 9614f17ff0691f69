#include "ddinv/fem.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/IterativeLinearSolvers>

namespace ddinv {

Coefficient constant(double value) {
  return [value](double, double) { return value; };
}

TraceField::TraceField(std::vector<NodeId> n, Vector v) : nodes(std::move(n)), values(std::move(v)) {
  if (static_cast<Index>(nodes.size()) != values.size()) {
    throw std::invalid_argument("TraceField: node and value counts differ");
  }
}

TraceField TraceField::zeros(std::vector<NodeId> n) {
  Vector v = Vector::Zero(static_cast<Index>(n.size()));
  return TraceField(std::move(n), std::move(v));
}

TraceField TraceField::restrict(const Field& field, std::vector<NodeId> n) {
  Vector v(static_cast<Index>(n.size()));
  for (std::size_t k = 0; k < n.size(); ++k) v[static_cast<Index>(k)] = field[n[k]];
  return TraceField(std::move(n), std::move(v));
}

Field TraceField::scatter(Index length) const {
  Field out = Field::Zero(length);
  for (std::size_t k = 0; k < nodes.size(); ++k) out[nodes[k]] = values[static_cast<Index>(k)];
  return out;
}

void SparseOperator::write_coordinates(std::ostream& out) const {
  out.precision(17);
  for (Index col = 0; col < matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

namespace {

using Triplet = Eigen::Triplet<double>;

bool element_in_subset(const std::array<NodeId, 3>& t, const std::vector<char>* subset) {
  return subset == nullptr || ((*subset)[t[0]] && (*subset)[t[1]] && (*subset)[t[2]]);
}

// Pushes a symmetric element matrix; (i, j) and (j, i) receive identical
// values in identical order so the assembled matrix is bitwise symmetric.
template <int N>
void push_symmetric(std::vector<Triplet>& out, const std::array<NodeId, N>& dofs,
                    const double (&local)[N][N]) {
  for (int r = 0; r < N; ++r) {
    out.emplace_back(dofs[r], dofs[r], local[r][r]);
    for (int c = r + 1; c < N; ++c) {
      out.emplace_back(dofs[r], dofs[c], local[r][c]);
      out.emplace_back(dofs[c], dofs[r], local[r][c]);
    }
  }
}

SparseMatrix from_triplets(Index n, const std::vector<Triplet>& triplets) {
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

AssembledForms assemble(const TriMesh& mesh, const Coefficient& a, const Coefficient& c,
                        const std::vector<char>* node_subset) {
  std::vector<Triplet> k_trip;
  std::vector<Triplet> m_trip;
  k_trip.reserve(9 * mesh.element_count());
  m_trip.reserve(9 * mesh.element_count());

  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& t = mesh.elements()[e];
    if (!element_in_subset(t, node_subset)) continue;
    const Point& p0 = mesh.node(t[0]);
    const Point& p1 = mesh.node(t[1]);
    const Point& p2 = mesh.node(t[2]);
    const double area = mesh.signed_area(e);
    const double cx = (p0.x + p1.x + p2.x) / 3.0;
    const double cy = (p0.y + p1.y + p2.y) / 3.0;
    const double a_val = a(cx, cy);
    if (!(a_val > 0.0)) {
      throw std::invalid_argument("assemble: diffusion coefficient must be positive, got " +
                                  std::to_string(a_val) + " at (" + std::to_string(cx) + ", " +
                                  std::to_string(cy) + ")");
    }
    const double c_val = c(cx, cy);

    // Barycentric gradients scaled by 2*area.
    const double bx[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
    const double by[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};

    double ke[3][3];
    double me[3][3];
    for (int r = 0; r < 3; ++r) {
      for (int s = 0; s < 3; ++s) {
        const double mass = area / 12.0 * (r == s ? 2.0 : 1.0);
        me[r][s] = mass;
        ke[r][s] = a_val * (bx[r] * bx[s] + by[r] * by[s]) / (4.0 * area) + c_val * mass;
      }
    }
    push_symmetric<3>(k_trip, t, ke);
    push_symmetric<3>(m_trip, t, me);
  }

  const Index n = mesh.node_count();
  return {SparseOperator{from_triplets(n, k_trip), true},
          SparseOperator{from_triplets(n, m_trip), true}};
}

SparseOperator assemble_boundary_mass(const TriMesh& mesh, std::uint8_t sides,
                                      const Coefficient& weight,
                                      const std::vector<char>* node_subset) {
  std::vector<Triplet> trip;
  int used = 0;
  for (const auto& edge : mesh.boundary_edges(sides)) {
    if (node_subset != nullptr && !((*node_subset)[edge[0]] && (*node_subset)[edge[1]])) continue;
    const Point& p = mesh.node(edge[0]);
    const Point& q = mesh.node(edge[1]);
    const double length = std::hypot(q.x - p.x, q.y - p.y);
    const double w = weight(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
    const double local[2][2] = {{w * length / 3.0, w * length / 6.0},
                                {w * length / 6.0, w * length / 3.0}};
    push_symmetric<2>(trip, edge, local);
    ++used;
  }
  if (used == 0) {
    throw std::invalid_argument("assemble_boundary_mass: segment contains no complete edge");
  }
  return SparseOperator{from_triplets(mesh.node_count(), trip), true};
}

SparseOperator assemble_boundary_mass(const TriMesh& mesh, std::uint8_t sides,
                                      const std::vector<char>* node_subset) {
  return assemble_boundary_mass(mesh, sides, constant(1.0), node_subset);
}

SparseMatrix extract_block(const SparseMatrix& m, const std::vector<NodeId>& rows,
                           const std::vector<NodeId>& cols) {
  std::vector<Index> row_map(m.rows(), -1);
  for (std::size_t k = 0; k < rows.size(); ++k) row_map[rows[k]] = static_cast<Index>(k);
  std::vector<Triplet> trip;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    for (SparseMatrix::InnerIterator it(m, cols[k]); it; ++it) {
      const Index r = row_map[it.row()];
      if (r >= 0) trip.emplace_back(r, static_cast<Index>(k), it.value());
    }
  }
  SparseMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

DirichletSolver::DirichletSolver(const SparseMatrix& system, std::vector<NodeId> free_nodes,
                                 std::vector<NodeId> fixed_nodes, SolverOptions options)
    : free_(std::move(free_nodes)),
      fixed_(std::move(fixed_nodes)),
      full_dimension_(system.rows()),
      options_(options) {
  if (system.rows() != system.cols()) {
    throw std::invalid_argument("DirichletSolver: system must be square");
  }
  free_free_ = extract_block(system, free_, free_);
  free_fixed_ = extract_block(system, free_, fixed_);
}

Vector DirichletSolver::gather_free(const Vector& full) const {
  Vector out(static_cast<Index>(free_.size()));
  for (std::size_t k = 0; k < free_.size(); ++k) out[static_cast<Index>(k)] = full[free_[k]];
  return out;
}

Vector DirichletSolver::gather_fixed(const Vector& full) const {
  Vector out(static_cast<Index>(fixed_.size()));
  for (std::size_t k = 0; k < fixed_.size(); ++k) out[static_cast<Index>(k)] = full[fixed_[k]];
  return out;
}

void DirichletSolver::scatter_free(const Vector& compressed, Vector& full) const {
  for (std::size_t k = 0; k < free_.size(); ++k) full[free_[k]] = compressed[static_cast<Index>(k)];
}

Vector DirichletSolver::solve_free(const Vector& rhs_free, const Vector* guess) const {
  const Index n = free_free_.rows();
  if (rhs_free.size() != n) {
    throw std::invalid_argument("DirichletSolver: right-hand side has wrong length");
  }
  if (n == 0) return Vector();
  const double rhs_norm = rhs_free.norm();
  if (rhs_norm == 0.0) return Vector::Zero(n);

  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(options_.tolerance);
  cg.setMaxIterations(options_.max_iterations > 0
                          ? options_.max_iterations
                          : std::max<int>(1000, 4 * static_cast<int>(n)));
  cg.compute(free_free_);
  Vector x;
  if (guess != nullptr && guess->size() == n) {
    x = cg.solveWithGuess(rhs_free, *guess);
  } else {
    x = cg.solve(rhs_free);
  }
  if (cg.info() != Eigen::Success) {
    const double residual = (rhs_free - free_free_ * x).norm() / rhs_norm;
    throw SolveError("conjugate gradients did not converge: relative residual " +
                         std::to_string(residual) + " after " + std::to_string(cg.iterations()) +
                         " iterations",
                     residual, static_cast<int>(cg.iterations()));
  }
  return x;
}

Field DirichletSolver::solve(const Vector& rhs, const Vector& fixed_values) const {
  if (rhs.size() != full_dimension_) {
    throw std::invalid_argument("DirichletSolver: right-hand side has wrong length");
  }
  const bool has_values = fixed_values.size() != 0;
  if (has_values && fixed_values.size() != static_cast<Index>(fixed_.size())) {
    throw std::invalid_argument("DirichletSolver: wrong number of fixed values");
  }
  Vector b = gather_free(rhs);
  if (has_values) b -= free_fixed_ * fixed_values;
  const Vector x = solve_free(b);

  Field out = Field::Zero(full_dimension_);
  scatter_free(x, out);
  if (has_values) {
    for (std::size_t k = 0; k < fixed_.size(); ++k) out[fixed_[k]] = fixed_values[static_cast<Index>(k)];
  }
  return out;
}

Field solve(const SparseOperator& system, const Vector& rhs, const std::vector<NodeId>& dirichlet,
            const Vector& dirichlet_values, SolverOptions options) {
  std::vector<char> fixed(system.dimension(), 0);
  for (NodeId n : dirichlet) fixed[n] = 1;
  std::vector<NodeId> free_nodes;
  for (NodeId n = 0; n < system.dimension(); ++n) {
    if (!fixed[n]) free_nodes.push_back(n);
  }
  DirichletSolver solver(system.matrix, std::move(free_nodes), dirichlet, options);
  return solver.solve(rhs, dirichlet_values);
}

double inner_product(const Vector& u, const Vector& v, const SparseOperator& mass) {
  if (u.size() != mass.dimension() || v.size() != mass.dimension()) {
    throw std::invalid_argument("inner_product: dimension mismatch");
  }
  if (!mass.symmetric) return u.dot(mass.matrix * v);
  // Pairwise accumulation over the lower triangle: exchanging u and v yields
  // the same floating point operations.
  double sum = 0.0;
  for (Index col = 0; col < mass.matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(mass.matrix, col); it; ++it) {
      const Index row = it.row();
      if (row == col) {
        sum += it.value() * (u[row] * v[row]);
      } else if (row > col) {
        sum += it.value() * (u[row] * v[col] + u[col] * v[row]);
      }
    }
  }
  return sum;
}

}  // namespace ddinv

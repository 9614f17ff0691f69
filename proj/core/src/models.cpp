#include "ddinv/models.hpp"

#include <stdexcept>
#include <string>

namespace ddinv {

namespace {

std::vector<Vector> partition_vectors(const SubdomainDecomposition& d) {
  std::vector<Vector> out;
  out.reserve(d.size());
  for (const auto& chi : d.chi) out.push_back(Eigen::Map<const Vector>(chi.data(), static_cast<Index>(chi.size())));
  return out;
}

Vector mask(const Vector& v, const std::vector<char>& support) {
  Vector out = v;
  for (Index k = 0; k < out.size(); ++k) {
    if (!support[static_cast<std::size_t>(k)]) out[k] = 0.0;
  }
  return out;
}

void check_size(const Vector& v, Index n, const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                                std::to_string(v.size()));
  }
}

Matrix as_column(const Vector& v) { return Matrix(v); }

Vector stationary_trace(const Matrix& trace) {
  if (trace.cols() != 1) throw std::invalid_argument("stationary trace must have one column");
  return trace.col(0);
}

}  // namespace

// ---------------------------------------------------------------------------

SourceModel::SourceModel(std::shared_ptr<const SourceOperators> ops, Field data)
    : ops_(std::move(ops)), data_(std::move(data)), partition_(partition_vectors(ops_->decomposition())) {
  check_size(data_, ops_->mesh().node_count(), "SourceModel data");
}

double SourceModel::parameter_inner(const Vector& u, const Vector& v) const {
  return inner_product(u, v, ops_->mass());
}

StateField SourceModel::global_state(const Vector& q) const {
  return as_column(ops_->forward_global(q));
}

StateField SourceModel::local_state(int i, const Vector& q, const Matrix& trace) const {
  return as_column(ops_->forward_local(i, q, stationary_trace(trace)));
}

Vector SourceModel::local_minimize(int i, const Vector& others, const Vector& a, const Matrix& trace,
                                   const DDConfig& config) const {
  const Vector p = stationary_trace(trace);
  const Field residual = data_ - ops_->forward_local(i, others + a, p);
  const Field back = ops_->forward_local(i, residual);
  const double A = config.A;
  const double beta = config.beta;
  Vector f = mask((A * a + back - beta * others) / (A + beta), support(i));
  // others may be nonzero on the subdomain boundary; the consistent mass
  // couples those values into the open nodes.
  if (beta != 0.0) f -= (beta / (A + beta)) * ops_->local_mass_lift(i, others);
  return f;
}

double SourceModel::objective(const Vector& q, double beta) const {
  const Vector r = ops_->forward_global(q) - data_;
  return parameter_inner(r, r) + beta * parameter_inner(q, q);
}

Vector SourceModel::apply_normal(const Vector& q) const {
  return ops_->forward_global(ops_->forward_global(q));
}

// ---------------------------------------------------------------------------

FluxModel::FluxModel(std::shared_ptr<const FluxOperators> ops, Vector data)
    : ops_(std::move(ops)), data_(std::move(data)) {
  check_size(data_, static_cast<Index>(ops_->gamma0_nodes().size()), "FluxModel data");
  const auto& d = ops_->decomposition();
  const std::size_t m = ops_->gamma1_nodes().size();
  std::vector<int> count(m, 0);
  support_.assign(d.size(), std::vector<char>(m, 0));
  for (int i = 0; i < d.size(); ++i) {
    for (Index k : ops_->support(i)) {
      support_[i][static_cast<std::size_t>(k)] = 1;
      ++count[static_cast<std::size_t>(k)];
    }
  }
  for (int i = 0; i < d.size(); ++i) {
    Vector chi = Vector::Zero(static_cast<Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
      if (support_[i][k]) chi[static_cast<Index>(k)] = 1.0 / count[k];
    }
    partition_.push_back(std::move(chi));
  }
}

double FluxModel::parameter_inner(const Vector& u, const Vector& v) const {
  return ops_->gamma1_inner(u, v);
}

StateField FluxModel::global_state(const Vector& q) const {
  return as_column(ops_->forward_global(q));
}

StateField FluxModel::local_state(int i, const Vector& q, const Matrix& trace) const {
  return as_column(ops_->forward_local(i, q, stationary_trace(trace)));
}

Vector FluxModel::local_minimize(int i, const Vector& others, const Vector& a, const Matrix& trace,
                                 const DDConfig& config) const {
  if (ops_->support(i).empty()) return Vector::Zero(parameter_size());
  const Vector p = stationary_trace(trace);
  const Vector residual = data_ - ops_->gamma0_gather(ops_->forward_local(i, others + a, p));
  const Vector back = ops_->gamma1_gather(ops_->adjoint_local(i, residual));
  const double A = config.A;
  const double beta = config.beta;
  return mask((A * a + back - beta * others) / (A + beta), support_[i]);
}

double FluxModel::objective(const Vector& q, double beta) const {
  const Vector r = ops_->gamma0_gather(ops_->forward_global(q)) - data_;
  return ops_->gamma0_inner(r, r) + beta * parameter_inner(q, q);
}

Vector FluxModel::apply_normal(const Vector& q) const {
  return ops_->adjoint_global(ops_->gamma0_gather(ops_->forward_global(q)));
}

// ---------------------------------------------------------------------------

double window_inner(const SpaceTimeField& u, const SpaceTimeField& v, const SparseOperator& mass,
                    const TimeGrid& grid) {
  if (u.cols() != grid.levels() || v.cols() != grid.levels()) {
    throw std::invalid_argument("window_inner: fields must have one column per time level");
  }
  const Vector w = grid.window_weights();
  double sum = 0.0;
  for (int k = grid.window_start(); k < grid.levels(); ++k) {
    sum += w[k] * inner_product(u.col(k), v.col(k), mass);
  }
  return sum;
}

HeatModel::HeatModel(std::shared_ptr<const HeatOperators> ops, SpaceTimeField data)
    : ops_(std::move(ops)), data_(std::move(data)), partition_(partition_vectors(ops_->decomposition())) {
  if (data_.rows() != ops_->mesh().node_count() || data_.cols() != ops_->grid().levels()) {
    throw std::invalid_argument("HeatModel data must be nodes x levels");
  }
}

double HeatModel::parameter_inner(const Vector& u, const Vector& v) const {
  return inner_product(u, v, ops_->mass());
}

StateField HeatModel::global_state(const Vector& q) const { return ops_->forward_global(q); }

StateField HeatModel::local_state(int i, const Vector& q, const Matrix& trace) const {
  return ops_->forward_local(i, q, trace);
}

Vector HeatModel::local_minimize(int i, const Vector& others, const Vector& a, const Matrix& trace,
                                 const DDConfig& config) const {
  const SpaceTimeField residual = data_ - ops_->forward_local(i, others + a, trace);
  const Field back = ops_->adjoint_accumulate(i, residual);
  const double As = config.A * ops_->grid().window;
  const double beta = config.beta;
  Vector phi = mask((As * a + back - beta * others) / (As + beta), support(i));
  if (beta != 0.0) phi -= (beta / (As + beta)) * ops_->local_mass_lift(i, others);
  return phi;
}

double HeatModel::objective(const Vector& q, double beta) const {
  const SpaceTimeField r = ops_->forward_global(q) - data_;
  return window_inner(r, r, ops_->mass(), ops_->grid()) + beta * parameter_inner(q, q);
}

Vector HeatModel::apply_normal(const Vector& q) const {
  return ops_->adjoint_accumulate_global(ops_->forward_global(q));
}

}  // namespace ddinv

#pragma once

#include <memory>
#include <vector>

#include "ddinv/elliptic.hpp"
#include "ddinv/parabolic.hpp"
#include "ddinv/schwarz.hpp"

namespace ddinv {

/// Source identification: the parameter is a nodal field f, the data z0 a
/// nodal field (the measured state minus u(0)).
class SourceModel final : public SchwarzModel {
 public:
  SourceModel(std::shared_ptr<const SourceOperators> ops, Field data);

  const SourceOperators& operators() const { return *ops_; }
  const Field& data() const { return data_; }

  const SubdomainDecomposition& decomposition() const override { return ops_->decomposition(); }
  Index parameter_size() const override { return ops_->mesh().node_count(); }
  const std::vector<char>& support(int i) const override { return ops_->decomposition().open[i]; }
  const Vector& partition(int i) const override { return partition_[i]; }
  double parameter_inner(const Vector& u, const Vector& v) const override;

  StateField global_state(const Vector& q) const override;
  StateField local_state(int i, const Vector& q, const Matrix& trace) const override;
  Vector local_minimize(int i, const Vector& others, const Vector& a, const Matrix& trace,
                        const DDConfig& config) const override;
  double objective(const Vector& q, double beta) const override;
  Vector apply_normal(const Vector& q) const override;

 private:
  std::shared_ptr<const SourceOperators> ops_;
  Field data_;
  std::vector<Vector> partition_;
};

/// Flux reconstruction: the parameter is a trace on Gamma_1 aligned with
/// FluxOperators::gamma1_nodes(), the data a trace on Gamma_0 aligned with
/// gamma0_nodes().
class FluxModel final : public SchwarzModel {
 public:
  FluxModel(std::shared_ptr<const FluxOperators> ops, Vector data);

  const FluxOperators& operators() const { return *ops_; }
  const Vector& data() const { return data_; }

  const SubdomainDecomposition& decomposition() const override { return ops_->decomposition(); }
  Index parameter_size() const override { return static_cast<Index>(ops_->gamma1_nodes().size()); }
  const std::vector<char>& support(int i) const override { return support_[i]; }
  const Vector& partition(int i) const override { return partition_[i]; }
  double parameter_inner(const Vector& u, const Vector& v) const override;

  StateField global_state(const Vector& q) const override;
  StateField local_state(int i, const Vector& q, const Matrix& trace) const override;
  /// Zero for subdomains away from Gamma_1.
  Vector local_minimize(int i, const Vector& others, const Vector& a, const Matrix& trace,
                        const DDConfig& config) const override;
  double objective(const Vector& q, double beta) const override;
  Vector apply_normal(const Vector& q) const override;

 private:
  std::shared_ptr<const FluxOperators> ops_;
  Vector data_;
  std::vector<std::vector<char>> support_;
  std::vector<Vector> partition_;
};

/// Initial temperature recovery: the parameter is a nodal field phi, the data
/// z0 one nodal field per time level (only the observation window is read).
class HeatModel final : public SchwarzModel {
 public:
  HeatModel(std::shared_ptr<const HeatOperators> ops, SpaceTimeField data);

  const HeatOperators& operators() const { return *ops_; }
  const SpaceTimeField& data() const { return data_; }

  const SubdomainDecomposition& decomposition() const override { return ops_->decomposition(); }
  Index parameter_size() const override { return ops_->mesh().node_count(); }
  const std::vector<char>& support(int i) const override { return ops_->decomposition().open[i]; }
  const Vector& partition(int i) const override { return partition_[i]; }
  double parameter_inner(const Vector& u, const Vector& v) const override;

  StateField global_state(const Vector& q) const override;
  StateField local_state(int i, const Vector& q, const Matrix& trace) const override;
  Vector local_minimize(int i, const Vector& others, const Vector& a, const Matrix& trace,
                        const DDConfig& config) const override;
  double objective(const Vector& q, double beta) const override;
  Vector apply_normal(const Vector& q) const override;
  double surrogate_scale() const override { return ops_->grid().window; }

 private:
  std::shared_ptr<const HeatOperators> ops_;
  SpaceTimeField data_;
  std::vector<Vector> partition_;
};

/// sum_k w_k <u_k, v_k>_M over the observation window.
double window_inner(const SpaceTimeField& u, const SpaceTimeField& v, const SparseOperator& mass,
                    const TimeGrid& grid);

}  // namespace ddinv

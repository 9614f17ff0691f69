#include "ddinv/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ddinv {

namespace {

using std::numbers::pi;

Coefficient zero() { return constant(0.0); }

ExperimentSpec flux_spec(std::string id, Coefficient exact, std::string formula, double h0,
                         std::vector<ReferenceRow> reference) {
  ExperimentSpec s;
  s.id = std::move(id);
  s.kind = ProblemKind::kFlux;
  s.exact = std::move(exact);
  s.exact_formula = std::move(formula);
  s.a = constant(1.0);
  s.c = constant(1.0);
  s.source = zero();
  s.boundary = zero();
  s.delta = 0.05;
  s.initial_guess = h0;
  s.beta = 1e-4;
  s.meshes = {14, 28, 56};
  s.reference = std::move(reference);
  return s;
}

ExperimentSpec source_spec(std::string id, Coefficient exact, std::string formula,
                           std::vector<ReferenceRow> reference) {
  ExperimentSpec s;
  s.id = std::move(id);
  s.kind = ProblemKind::kSource;
  s.exact = std::move(exact);
  s.exact_formula = std::move(formula);
  s.a = [](double x, double y) { return (x + y) / 100.0; };
  s.c = constant(1.0);
  s.source = zero();
  s.boundary = zero();
  s.delta = 0.01;
  s.initial_guess = 0.0;
  s.beta = 1e-3;
  s.meshes = {7, 14, 28, 56};
  s.reference = std::move(reference);
  return s;
}

ExperimentSpec heat_spec(std::string id, Coefficient exact, std::string formula, double delta,
                         std::vector<ReferenceRow> reference) {
  ExperimentSpec s;
  s.id = std::move(id);
  s.kind = ProblemKind::kInitialTemperature;
  s.exact = std::move(exact);
  s.exact_formula = std::move(formula);
  s.a = constant(1.0);
  s.c = zero();
  s.source = zero();
  s.boundary = zero();
  s.delta = delta;
  s.initial_guess = 0.0;
  s.beta = 5e-5;
  s.final_time = 4.0;
  s.meshes = {7, 14, 28};
  s.reference = std::move(reference);
  return s;
}

std::vector<ReferenceRow> rows(const std::vector<int>& meshes, const std::vector<double>& msa_err,
                               const std::vector<int>& msa_k, const std::vector<double>& asa_err,
                               const std::vector<int>& asa_k) {
  std::vector<ReferenceRow> out;
  for (std::size_t m = 0; m < meshes.size(); ++m) out.push_back({"msa", meshes[m], msa_err[m], msa_k[m]});
  for (std::size_t m = 0; m < meshes.size(); ++m) out.push_back({"asa", meshes[m], asa_err[m], asa_k[m]});
  return out;
}

std::vector<ExperimentSpec> make_catalog() {
  const auto sin2 = [](double t) { return std::sin(2.0 * pi * t); };
  const auto wave = [sin2](double x, double y) { return sin2(x) * sin2(y); };
  const auto cubic = [sin2](double x, double y) { return 2.0 * sin2(x) * y * (y - 1.0) * (y - 2.0); };
  const auto bumps = [sin2](double x, double y) { return 10.0 * y * sin2(y) * x * (x - 0.5) * (x - 1.0); };
  const std::vector<int> elliptic_meshes{7, 14, 28, 56};
  const std::vector<int> flux_meshes{14, 28, 56};
  const std::vector<int> heat_meshes{7, 14, 28};

  std::vector<ExperimentSpec> c;
  c.push_back(flux_spec(
      "5.1", [](double, double y) { return -(y - 1.0) * (y - 1.0) + 1.0; }, "-(y-1)^2+1", 1.0,
      rows(flux_meshes, {0.0597, 0.0783, 0.0907}, {8, 8, 8}, {0.0840, 0.0978, 0.0959}, {13, 13, 14})));
  c.push_back(flux_spec(
      "5.2", [](double, double y) { return std::sin(pi * y / 2.0) + std::sqrt(std::max(y, 0.0)); },
      "sin(pi*y/2)+sqrt(y)", 2.0,
      rows(flux_meshes, {0.0827, 0.0995, 0.0996}, {9, 10, 11}, {0.0981, 0.0970, 0.0921}, {14, 16, 15})));
  c.push_back(source_spec("5.3", wave, "sin(2*pi*x)*sin(2*pi*y)",
                          rows(elliptic_meshes, {0.0900, 0.0971, 0.0998, 0.0979}, {10, 14, 14, 15},
                               {0.0956, 0.0982, 0.0984, 0.0991}, {21, 30, 31, 32})));
  c.push_back(source_spec("5.4", cubic, "2*sin(2*pi*x)*y*(y-1)*(y-2)",
                          rows(elliptic_meshes, {0.0933, 0.0991, 0.0895, 0.0970}, {6, 7, 8, 8},
                               {0.0100, 0.0982, 0.0997, 0.0959}, {13, 16, 16, 18})));
  c.push_back(source_spec("5.5", bumps, "10*y*sin(2*pi*y)*x*(x-1/2)*(x-1)",
                          rows(elliptic_meshes, {0.0989, 0.0976, 0.0975, 0.0980}, {14, 23, 24, 26},
                               {0.0977, 0.0989, 0.0997, 0.0999}, {30, 47, 48, 52})));
  c.push_back(heat_spec("5.6", wave, "sin(2*pi*x)*sin(2*pi*y)", 0.02,
                        rows(heat_meshes, {0.0521, 0.0760, 0.0998}, {10, 11, 12}, {0.0856, 0.0950, 0.0973},
                             {16, 20, 25})));
  c.push_back(heat_spec("5.7", cubic, "2*sin(2*pi*x)*y*(y-1)*(y-2)", 0.01,
                        rows(heat_meshes, {0.0943, 0.0931, 0.0995}, {22, 26, 29}, {0.0974, 0.0997, 0.0971},
                             {45, 52, 58})));
  c.push_back(heat_spec("5.8", bumps, "10*y*sin(2*pi*y)*x*(x-1/2)*(x-1)", 0.02,
                        rows(heat_meshes, {0.0933, 0.0956, 0.0989}, {8, 10, 15}, {0.0988, 0.0970, 0.0993},
                             {17, 22, 30})));
  return c;
}

Vector interpolate(const TriMesh& mesh, const Coefficient& fn, const std::vector<NodeId>& nodes) {
  Vector out(static_cast<Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Point& p = mesh.node(nodes[k]);
    out[static_cast<Index>(k)] = fn(p.x, p.y);
  }
  return out;
}

std::vector<NodeId> all_nodes(const TriMesh& mesh) {
  std::vector<NodeId> out(mesh.node_count());
  for (NodeId n = 0; n < mesh.node_count(); ++n) out[n] = n;
  return out;
}

Vector supported_constant(const SchwarzModel& model, double value) {
  Vector out = Vector::Zero(model.parameter_size());
  for (int i = 0; i < model.decomposition().size(); ++i) {
    const auto& sup = model.support(i);
    for (Index k = 0; k < out.size(); ++k) {
      if (sup[static_cast<std::size_t>(k)]) out[k] = value;
    }
  }
  return out;
}

}  // namespace

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kFlux: return "flux";
    case ProblemKind::kSource: return "source";
    case ProblemKind::kInitialTemperature: return "initial_temperature";
  }
  return "unknown";
}

const std::vector<ExperimentSpec>& example_catalog() {
  static const std::vector<ExperimentSpec> catalog = make_catalog();
  return catalog;
}

const ExperimentSpec& find_experiment(const std::string& id) {
  for (const auto& s : example_catalog()) {
    if (s.id == id) return s;
  }
  throw std::invalid_argument("unknown experiment '" + id + "' (expected 5.1 to 5.8)");
}

Matrix add_noise(const Matrix& clean, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw std::invalid_argument("noise level must be nonnegative");
  Matrix out = clean;
  if (delta == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (Index j = 0; j < out.cols(); ++j) {
    for (Index i = 0; i < out.rows(); ++i) out(i, j) *= 1.0 + delta * dist(rng);
  }
  return out;
}

double relative_l2_error(const Vector& recon, const Vector& exact, const SparseOperator& mass) {
  const double denom = inner_product(exact, exact, mass);
  if (!(denom > 0.0)) throw std::invalid_argument("relative error: exact parameter has zero norm");
  const Vector d = recon - exact;
  return std::sqrt(std::max(0.0, inner_product(d, d, mass)) / denom);
}

ProblemInstance build_problem(const ExperimentSpec& spec, const ProblemOptions& options) {
  if (options.nx < 7 || options.nx % 7 != 0) {
    throw std::invalid_argument("nx must be a positive multiple of 7, got " + std::to_string(options.nx));
  }
  const int ny = options.ny == 0 ? 2 * options.nx : options.ny;
  if (ny < 7 || ny % 7 != 0) throw std::invalid_argument("ny must be a positive multiple of 7, got " + std::to_string(ny));
  const double delta = options.delta.value_or(spec.delta);
  if (!(delta >= 0.0)) throw std::invalid_argument("noise level must be nonnegative");

  ProblemInstance p;
  p.kind = spec.kind;
  p.mesh = build_mesh(options.nx, ny);
  p.decomposition = build_subdomains(p.mesh);

  switch (spec.kind) {
    case ProblemKind::kSource: {
      auto ops = std::make_shared<SourceOperators>(p.mesh, p.decomposition, spec.a, spec.c, options.solver);
      p.parameter_nodes = all_nodes(p.mesh);
      p.exact = interpolate(p.mesh, spec.exact, p.parameter_nodes);
      Field source(p.mesh.node_count());
      for (NodeId n = 0; n < p.mesh.node_count(); ++n) source[n] = spec.source(p.mesh.node(n).x, p.mesh.node(n).y);
      const Field u0 = ops->solve_full(source, spec.boundary);
      p.clean_data = ops->solve_full(source + p.exact, spec.boundary);
      p.noisy_data = add_noise(p.clean_data, delta, options.seed);
      p.model = std::make_shared<SourceModel>(ops, Field(p.noisy_data.col(0) - u0));
      p.source_ops = std::move(ops);
      break;
    }
    case ProblemKind::kFlux: {
      auto ops = std::make_shared<FluxOperators>(p.mesh, p.decomposition, spec.a, spec.c, options.solver);
      p.decomposition = ops->decomposition();
      p.parameter_nodes = ops->gamma1_nodes();
      p.exact = interpolate(p.mesh, spec.exact, p.parameter_nodes);
      const Field u0 = ops->solve_u0(spec.source, spec.boundary);
      p.clean_data = ops->gamma0_gather(u0 + ops->forward_global(p.exact));
      p.noisy_data = add_noise(p.clean_data, delta, options.seed);
      p.model = std::make_shared<FluxModel>(ops, Vector(p.noisy_data.col(0) - ops->gamma0_gather(u0)));
      p.flux_ops = std::move(ops);
      break;
    }
    case ProblemKind::kInitialTemperature: {
      const int steps = options.time_steps == 0 ? kDefaultTimeSteps : options.time_steps;
      if (steps < 1) throw std::invalid_argument("number of time steps must be positive");
      p.grid = TimeGrid(spec.final_time, steps, options.window.value_or(spec.final_time));
      auto ops = std::make_shared<HeatOperators>(p.mesh, p.decomposition, spec.a, *p.grid, options.solver);
      p.parameter_nodes = all_nodes(p.mesh);
      p.exact = interpolate(p.mesh, spec.exact, p.parameter_nodes);
      // Zero source and boundary data: u(0) vanishes.
      p.clean_data = ops->forward_global(p.exact);
      p.noisy_data = add_noise(p.clean_data, delta, options.seed);
      p.model = std::make_shared<HeatModel>(ops, p.noisy_data);
      p.heat_ops = std::move(ops);
      break;
    }
  }
  p.initial = supported_constant(*p.model, spec.initial_guess);
  return p;
}

}  // namespace ddinv

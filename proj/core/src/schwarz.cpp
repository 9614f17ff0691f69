#include "ddinv/schwarz.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace ddinv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool has_support(const SchwarzModel& model, int i) {
  for (char c : model.support(i)) {
    if (c) return true;
  }
  return false;
}

Vector sum_except(const std::vector<Vector>& components, int skip, Index size) {
  Vector s = Vector::Zero(size);
  for (int j = 0; j < static_cast<int>(components.size()); ++j) {
    if (j != skip) s += components[j];
  }
  return s;
}

double norm(const SchwarzModel& model, const Vector& v) {
  return std::sqrt(std::max(0.0, model.parameter_inner(v, v)));
}

// Shared bookkeeping of both outer loops.
class Monitor {
 public:
  Monitor(const SchwarzModel& model, const DDConfig& config, const Vector* exact, IterationReport& report)
      : model_(model), config_(config), exact_(exact), report_(report) {}

  // Records iteration n and returns true when the iteration should stop.
  bool record(int n, const Vector& previous, const Vector& next) {
    IterationRecord rec;
    rec.iter = n;
    rec.increment_norm = norm(model_, next - previous);
    rec.rel_error = exact_ != nullptr ? relative_error(model_, next, *exact_) : kNaN;
    rec.objective = kNaN;
    if (config_.track_objective) {
      rec.objective = model_.objective(next, config_.beta);
      ++report_.global_solves;
    }
    report_.history.push_back(rec);
    report_.iterations = n;

    if (n == 1) {
      threshold_ = config_.epsilon1 ? *config_.epsilon1 : config_.epsilon1_relative * rec.increment_norm;
    }
    if (exact_ != nullptr && config_.target_rel_error && rec.rel_error <= *config_.target_rel_error) {
      report_.reason = StopReason::kTargetReached;
      return true;
    }
    if (rec.increment_norm <= threshold_) {
      report_.reason = StopReason::kIncrementBelowTolerance;
      return true;
    }
    report_.reason = StopReason::kMaxIterations;
    return false;
  }

 private:
  const SchwarzModel& model_;
  const DDConfig& config_;
  const Vector* exact_;
  IterationReport& report_;
  double threshold_ = 0.0;
};

DDState start(const SchwarzModel& model, const Vector& initial, IterationReport& report) {
  if (initial.size() != model.parameter_size()) {
    throw std::invalid_argument("initial parameter has length " + std::to_string(initial.size()) +
                                ", expected " + std::to_string(model.parameter_size()));
  }
  DDState state;
  state.components = split_components(model, initial);
  state.iterate = sum_except(state.components, -1, model.parameter_size());
  state.traces = initial_traces(model, state.iterate);
  report.global_solves = 1;
  return state;
}

std::vector<StateField> local_states(const SchwarzModel& model, const DDConfig& config,
                                     const Vector& q, const std::vector<Matrix>& traces) {
  const int count = model.decomposition().size();
  std::vector<StateField> out(count);
  for_each_subdomain(count, config.parallel, [&](int i) { out[i] = model.local_state(i, q, traces[i]); });
  return out;
}

}  // namespace

void DDConfig::validate() const {
  if (!(A > 0.0)) throw std::invalid_argument("A must be positive");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
  if (epsilon1 && !(*epsilon1 > 0.0)) throw std::invalid_argument("epsilon1 must be positive");
  if (!(epsilon1_relative >= 0.0)) throw std::invalid_argument("epsilon1_relative must be nonnegative");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (target_rel_error && !(*target_rel_error > 0.0)) {
    throw std::invalid_argument("target_rel_error must be positive");
  }
}

double IterationReport::final_rel_error() const {
  return history.empty() ? kNaN : history.back().rel_error;
}

std::vector<Vector> split_components(const SchwarzModel& model, const Vector& q) {
  const int count = model.decomposition().size();
  std::vector<Vector> out(count);
  for (int i = 0; i < count; ++i) out[i] = model.partition(i).cwiseProduct(q);
  return out;
}

Matrix restrict_rows(const StateField& state, const std::vector<NodeId>& nodes) {
  Matrix out(static_cast<Index>(nodes.size()), state.cols());
  for (std::size_t k = 0; k < nodes.size(); ++k) out.row(static_cast<Index>(k)) = state.row(nodes[k]);
  return out;
}

std::vector<Matrix> initial_traces(const SchwarzModel& model, const Vector& q) {
  const StateField u = model.global_state(q);
  const auto& d = model.decomposition();
  std::vector<Matrix> traces;
  traces.reserve(d.size());
  for (int i = 0; i < d.size(); ++i) traces.push_back(restrict_rows(u, d.interfaces[i]));
  return traces;
}

std::vector<Matrix> update_traces(const std::vector<StateField>& local_solutions,
                                  const SubdomainDecomposition& decomp) {
  if (static_cast<int>(local_solutions.size()) != decomp.size()) {
    throw std::invalid_argument("update_traces: one local solution per subdomain expected");
  }
  const Index levels = local_solutions.empty() ? 0 : local_solutions.front().cols();
  std::vector<Matrix> traces(decomp.size());
  for (int i = 0; i < decomp.size(); ++i) {
    const auto& nodes = decomp.interfaces[i];
    traces[i] = Matrix::Zero(static_cast<Index>(nodes.size()), levels);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const std::vector<int> owners = decomp.containing(nodes[k]);
      if (owners.empty()) {
        throw std::logic_error("interface node " + std::to_string(nodes[k]) +
                               " lies in no open subdomain");
      }
      auto row = traces[i].row(static_cast<Index>(k));
      for (int j : owners) row += local_solutions[j].row(nodes[k]);
      row /= static_cast<double>(owners.size());
    }
  }
  return traces;
}

void push_traces(int i, const StateField& local_solution, const SubdomainDecomposition& decomp,
                 std::vector<Matrix>& traces) {
  for (int j = i + 1; j < decomp.size(); ++j) {
    const auto& nodes = decomp.interfaces[j];
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (decomp.open[i][nodes[k]]) traces[j].row(static_cast<Index>(k)) = local_solution.row(nodes[k]);
    }
  }
}

double relative_error(const SchwarzModel& model, const Vector& q, const Vector& exact) {
  const double denom = norm(model, exact);
  if (!(denom > 0.0)) throw std::invalid_argument("relative_error: exact parameter has zero norm");
  return norm(model, q - exact) / denom;
}

DDResult run_msa(const SchwarzModel& model, const DDConfig& config, const Vector& initial,
                 const Vector* exact) {
  config.validate();
  DDResult result;
  IterationReport& report = result.report;
  DDState& s = result.state;
  s = start(model, initial, report);
  Monitor monitor(model, config, exact, report);
  const int count = model.decomposition().size();
  const Index size = model.parameter_size();

  for (int n = 1; n <= config.max_iter; ++n) {
    for (int i = 0; i < count; ++i) {
      const Vector others = sum_except(s.components, i, size);
      if (has_support(model, i)) {
        s.components[i] = model.local_minimize(i, others, s.components[i], s.traces[i], config);
      }
      const StateField local = model.local_state(i, others + s.components[i], s.traces[i]);
      push_traces(i, local, model.decomposition(), s.traces);
    }
    const Vector next = sum_except(s.components, -1, size);
    const Vector previous = s.iterate;
    s.iterate = next;
    s.n = n;
    if (monitor.record(n, previous, next)) break;
    s.traces = update_traces(local_states(model, config, s.iterate, s.traces), model.decomposition());
  }
  return result;
}

Vector relax(double lambda, const std::vector<Vector>& local_minimizers, const Vector& previous) {
  Vector sum = Vector::Zero(previous.size());
  for (const Vector& v : local_minimizers) sum += v;
  return lambda * sum + (1.0 - lambda) * previous;
}

DDResult run_asa(const SchwarzModel& model, const DDConfig& config, const Vector& initial,
                 const Vector* exact) {
  config.validate();
  DDResult result;
  IterationReport& report = result.report;
  DDState& s = result.state;
  s = start(model, initial, report);
  Monitor monitor(model, config, exact, report);
  const int count = model.decomposition().size();
  const Index size = model.parameter_size();

  for (int n = 1; n <= config.max_iter; ++n) {
    std::vector<Vector> minimizers(count);
    for_each_subdomain(count, config.parallel, [&](int i) {
      if (!has_support(model, i)) {
        minimizers[i] = Vector::Zero(size);
        return;
      }
      const Vector others = sum_except(s.components, i, size);
      minimizers[i] = model.local_minimize(i, others, s.components[i], s.traces[i], config);
    });
    const Vector next = relax(config.lambda, minimizers, s.iterate);
    const Vector previous = s.iterate;
    s.iterate = next;
    s.n = n;
    if (monitor.record(n, previous, next)) {
      s.components = std::move(minimizers);
      break;
    }
    s.traces = update_traces(local_states(model, config, s.iterate, s.traces), model.decomposition());
    s.components = split_components(model, s.iterate);
  }
  return result;
}

SurrogateCheck check_surrogate_constant(const SchwarzModel& model, const DDConfig& config,
                                        unsigned seed, std::ostream* log) {
  constexpr int kMaxIterations = 200;
  constexpr double kRelativeChange = 1e-6;
  SurrogateCheck check;
  check.threshold = config.A * model.surrogate_scale();

  const Index size = model.parameter_size();
  Vector mask = Vector::Zero(size);
  for (int i = 0; i < model.decomposition().size(); ++i) {
    const auto& sup = model.support(i);
    for (Index k = 0; k < size; ++k) {
      if (sup[static_cast<std::size_t>(k)]) mask[k] = 1.0;
    }
  }
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(size);
  for (Index k = 0; k < size; ++k) v[k] = dist(rng);
  v = v.cwiseProduct(mask);
  double nv = norm(model, v);
  if (nv > 0.0) v /= nv;

  double previous = 0.0;
  for (int it = 1; it <= kMaxIterations; ++it) {
    check.iterations = it;
    Vector w = model.apply_normal(v).cwiseProduct(mask);
    const double estimate = norm(model, w);
    check.norm_squared = estimate;
    if (estimate == 0.0) {
      check.estimate_converged = true;
      break;
    }
    if (it > 1 && std::abs(estimate - previous) <= kRelativeChange * estimate) {
      check.estimate_converged = true;
      break;
    }
    previous = estimate;
    v = w / estimate;
  }
  check.satisfied = check.threshold >= check.norm_squared;
  if (!check.satisfied && log != nullptr) {
    *log << "warning: surrogate constant " << format_number(check.threshold)
         << " is below the estimated squared operator norm " << format_number(check.norm_squared) << '\n';
  }
  return check;
}

void write_history_csv(std::ostream& out, const IterationReport& report) {
  out << "iter,increment_norm,rel_error,objective\n";
  for (const auto& r : report.history) {
    out << r.iter << ',' << format_number(r.increment_norm) << ',' << format_number(r.rel_error) << ','
        << format_number(r.objective) << '\n';
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kTargetReached: return "target_reached";
    case StopReason::kIncrementBelowTolerance: return "increment_below_tolerance";
    case StopReason::kMaxIterations: return "max_iterations";
  }
  return "unknown";
}

void for_each_subdomain(int count, bool parallel, const std::function<void(int)>& fn) {
  if (!parallel || count < 2) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> workers;
  workers.reserve(count);
  for (int i = 0; i < count; ++i) {
    workers.emplace_back([&, i] {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ddinv

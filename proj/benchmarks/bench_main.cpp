#include <benchmark/benchmark.h>

#include <memory>

#include "ddinv/elliptic.hpp"
#include "ddinv/models.hpp"
#include "ddinv/parabolic.hpp"
#include "ddinv/problems.hpp"
#include "ddinv/schwarz.hpp"

namespace {

using namespace ddinv;

void BM_Assemble(benchmark::State& state) {
  const int nx = static_cast<int>(state.range(0));
  const TriMesh mesh = build_mesh(nx, 2 * nx);
  const Coefficient a = [](double x, double y) { return (x + y) / 100.0; };
  for (auto _ : state) benchmark::DoNotOptimize(assemble(mesh, a, constant(1.0)));
  state.SetComplexityN(mesh.node_count());
}
BENCHMARK(BM_Assemble)->Arg(14)->Arg(28)->Arg(56);

void BM_SourceGlobalSolve(benchmark::State& state) {
  const int nx = static_cast<int>(state.range(0));
  const TriMesh mesh = build_mesh(nx, 2 * nx);
  const SourceOperators ops(mesh, build_subdomains(mesh), [](double x, double y) { return (x + y) / 100.0; },
                            constant(1.0));
  const Field f = Field::Ones(mesh.node_count());
  for (auto _ : state) benchmark::DoNotOptimize(ops.forward_global(f));
}
BENCHMARK(BM_SourceGlobalSolve)->Arg(14)->Arg(28)->Arg(56);

void BM_SourceLocalSolve(benchmark::State& state) {
  const int nx = static_cast<int>(state.range(0));
  const TriMesh mesh = build_mesh(nx, 2 * nx);
  const SourceOperators ops(mesh, build_subdomains(mesh), [](double x, double y) { return (x + y) / 100.0; },
                            constant(1.0));
  const Field f = Field::Ones(mesh.node_count());
  for (auto _ : state) benchmark::DoNotOptimize(ops.forward_local(0, f));
}
BENCHMARK(BM_SourceLocalSolve)->Arg(14)->Arg(28)->Arg(56);

void BM_HeatAdjointAccumulate(benchmark::State& state) {
  const int nx = static_cast<int>(state.range(0));
  const TriMesh mesh = build_mesh(nx, 2 * nx);
  const HeatOperators ops(mesh, build_subdomains(mesh), constant(1.0), TimeGrid(4.0, 4 * nx, 4.0));
  const SpaceTimeField r = SpaceTimeField::Ones(mesh.node_count(), ops.grid().levels());
  for (auto _ : state) benchmark::DoNotOptimize(ops.adjoint_accumulate(0, r));
}
BENCHMARK(BM_HeatAdjointAccumulate)->Arg(7)->Arg(14);

void BM_Sweep(benchmark::State& state, const char* id, bool additive) {
  ProblemOptions opts;
  opts.nx = static_cast<int>(state.range(0));
  const ProblemInstance p = build_problem(find_experiment(id), opts);
  DDConfig config;
  config.beta = find_experiment(id).beta;
  config.max_iter = 1;
  config.target_rel_error.reset();
  config.track_objective = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(additive ? run_asa(*p.model, config, p.initial) : run_msa(*p.model, config, p.initial));
  }
}
BENCHMARK_CAPTURE(BM_Sweep, source_msa, "5.3", false)->Arg(7)->Arg(14)->Arg(28)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Sweep, source_asa, "5.3", true)->Arg(7)->Arg(14)->Arg(28)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Sweep, flux_msa, "5.1", false)->Arg(14)->Arg(28)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Sweep, heat_msa, "5.6", false)->Arg(7)->Arg(14)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

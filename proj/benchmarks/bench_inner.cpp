#include "ipi/dp.hpp"
#include "ipi/policy_eval.hpp"
#include "ipi/random_mdp.hpp"

#include <benchmark/benchmark.h>

namespace {

ipi::PolicyLinearSystem make_system(int n) {
  ipi::RandomMdpSpec spec;
  spec.num_states = n;
  spec.num_actions = 1;
  spec.gamma = 0.95;
  spec.density = 0.02;
  spec.seed = 5;
  spec.ensure_regular = true;
  const auto model = ipi::generate_random(spec);
  return ipi::extract_policy_system(model, ipi::Policy::constant(n, 0));
}

void run_inner(benchmark::State& state, const ipi::InnerMethod& method) {
  const auto system = make_system(static_cast<int>(state.range(0)));
  const ipi::Vector theta0 = ipi::Vector::Zero(system.size());
  const ipi::StoppingRule rule(1e-6, ipi::residual(system, theta0).lpNorm<Eigen::Infinity>(), 5000);
  int iterations = 0;
  for (auto _ : state) {
    auto result = ipi::solve_to_tolerance(system, theta0, method, rule);
    iterations = result.trace.iterations_used;
    benchmark::DoNotOptimize(result.solution.data());
  }
  state.counters["inner_iters"] = iterations;
}

void BM_Richardson(benchmark::State& state) { run_inner(state, ipi::inner::Richardson{1.0}); }
void BM_Jacobi(benchmark::State& state) { run_inner(state, ipi::inner::Jacobi{}); }
void BM_GaussSeidel(benchmark::State& state) { run_inner(state, ipi::inner::GaussSeidel{}); }
void BM_SteepestDescent(benchmark::State& state) { run_inner(state, ipi::inner::SteepestDescent{}); }
void BM_MinRes(benchmark::State& state) { run_inner(state, ipi::inner::MinRes{}); }
void BM_Gmres(benchmark::State& state) { run_inner(state, ipi::inner::Gmres{}); }

BENCHMARK(BM_Richardson)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Jacobi)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GaussSeidel)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SteepestDescent)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MinRes)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gmres)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_ExactSolve(benchmark::State& state) {
  const auto system = make_system(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ipi::solve_exact(system));
}
BENCHMARK(BM_ExactSolve)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

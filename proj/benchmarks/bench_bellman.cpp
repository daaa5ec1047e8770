#include "ipi/dp.hpp"
#include "ipi/random_mdp.hpp"
#include "ipi/sis.hpp"

#include <benchmark/benchmark.h>

namespace {

ipi::MdpModel random_model(int n, int m, double density) {
  ipi::RandomMdpSpec spec;
  spec.num_states = n;
  spec.num_actions = m;
  spec.gamma = 0.9;
  spec.density = density;
  spec.seed = 11;
  return ipi::generate_random(spec);
}

void BM_ApplyT(benchmark::State& state) {
  const auto model = random_model(static_cast<int>(state.range(0)), 10, 0.05);
  const ipi::Vector v = ipi::Vector::Ones(model.num_states());
  for (auto _ : state) benchmark::DoNotOptimize(ipi::apply_T(model, v, static_cast<unsigned>(state.range(1))));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(model.nonzeros()));
}
BENCHMARK(BM_ApplyT)->Args({1000, 1})->Args({4000, 1})->Args({4000, 4})->UseRealTime()->Unit(benchmark::kMicrosecond);

void BM_ApplyTPi(benchmark::State& state) {
  const auto model = random_model(static_cast<int>(state.range(0)), 10, 0.05);
  const auto policy = ipi::Policy::constant(model.num_states(), 3);
  const ipi::Vector v = ipi::Vector::Ones(model.num_states());
  for (auto _ : state) benchmark::DoNotOptimize(ipi::apply_T_pi(model, policy, v));
}
BENCHMARK(BM_ApplyTPi)->Arg(1000)->Arg(4000)->Unit(benchmark::kMicrosecond);

void BM_BuildSis(benchmark::State& state) {
  const auto params = ipi::sis::SisParams::defaults(static_cast<int>(state.range(0)), 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(ipi::sis::build_sis_mdp(params, static_cast<int>(state.range(1))));
}
BENCHMARK(BM_BuildSis)->Args({500, 1})->Args({2000, 1})->Args({2000, 4})->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

#include "ipi/dp.hpp"
#include "ipi/sis.hpp"

#include <benchmark/benchmark.h>

#include <map>

namespace {

const ipi::MdpModel& sis_model(int population) {
  static std::map<int, ipi::MdpModel> cache;
  auto it = cache.find(population);
  if (it == cache.end()) {
    it = cache.emplace(population, ipi::sis::build_sis_mdp(ipi::sis::SisParams::defaults(population, 0.9))).first;
  }
  return it->second;
}

ipi::OuterConfig config_for(const ipi::InnerMethod& method) {
  ipi::OuterConfig config;
  config.tol = 1e-6;
  config.alpha = 0.1;
  config.inner_method = method;
  return config;
}

void BM_PolicyIterationSis(benchmark::State& state) {
  const auto& model = sis_model(static_cast<int>(state.range(0)));
  const ipi::Vector v0 = ipi::Vector::Zero(model.num_states());
  for (auto _ : state) benchmark::DoNotOptimize(ipi::policy_iteration(model, v0, config_for(ipi::inner::Gmres{})));
}
BENCHMARK(BM_PolicyIterationSis)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_InexactGmresSis(benchmark::State& state) {
  const auto& model = sis_model(static_cast<int>(state.range(0)));
  const ipi::Vector v0 = ipi::Vector::Zero(model.num_states());
  for (auto _ : state) benchmark::DoNotOptimize(ipi::inexact_pi(model, v0, config_for(ipi::inner::Gmres{})));
}
BENCHMARK(BM_InexactGmresSis)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_ValueIterationSis(benchmark::State& state) {
  const auto& model = sis_model(static_cast<int>(state.range(0)));
  const ipi::Vector v0 = ipi::Vector::Zero(model.num_states());
  for (auto _ : state) benchmark::DoNotOptimize(ipi::value_iteration(model, v0, config_for(ipi::inner::Gmres{})));
}
BENCHMARK(BM_ValueIterationSis)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

#include "ipi/random_mdp.hpp"

#include "ipi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace ipi {
namespace {

// Distribution helpers built on raw engine output so that generated models
// are identical across standard libraries.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double exponential() { return -std::log1p(-uniform()); }
  std::size_t below(std::size_t bound) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(bound)) % bound;
  }

  // k distinct values from [0, n), partial Fisher-Yates.
  std::vector<int> distinct(int n, int k) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
      const auto j = static_cast<std::size_t>(i) + below(static_cast<std::size_t>(n - i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

int successors_per_row(int n, double density) {
  return std::clamp(static_cast<int>(std::lround(density * n)), 1, n);
}

}  // namespace

void RandomMdpSpec::validate() const {
  if (num_states < 1 || num_actions < 1) throw Error(ErrorKind::InvalidSpec, "need n >= 1 and m >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::InvalidSpec, "gamma must lie in (0,1)");
  if (!(density > 0.0 && density <= 1.0)) throw Error(ErrorKind::InvalidSpec, "density must lie in (0,1]");
  if (density * num_states < 1.0 - 1e-12) {
    throw Error(ErrorKind::InvalidSpec, "density * n must give at least one successor per row");
  }
}

MdpModel generate_random(const RandomMdpSpec& spec) {
  spec.validate();
  const int n = spec.num_states;
  const int m = spec.num_actions;
  const int k = successors_per_row(n, spec.density);
  Sampler rng(spec.seed);

  std::vector<int> cycle_next(static_cast<std::size_t>(n));
  if (spec.ensure_regular) {
    const auto order = rng.distinct(n, n);
    for (int i = 0; i < n; ++i) {
      cycle_next[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
          order[static_cast<std::size_t>((i + 1) % n)];
    }
  }

  std::vector<SparseMatrix> matrices;
  matrices.reserve(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    std::vector<Eigen::Triplet<double, int>> triplets;
    triplets.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k + 2));
    for (int s = 0; s < n; ++s) {
      auto successors = rng.distinct(n, k);
      if (spec.ensure_regular) {
        const int next = cycle_next[static_cast<std::size_t>(s)];
        if (std::find(successors.begin(), successors.end(), next) == successors.end()) successors.push_back(next);
      }
      std::vector<double> weights(successors.size());
      for (auto& w : weights) w = rng.exponential();
      if (spec.ensure_regular) {
        if (std::find(successors.begin(), successors.end(), s) == successors.end()) {
          successors.push_back(s);
          weights.push_back(0.0);
        }
      }
      double total = std::accumulate(weights.begin(), weights.end(), 0.0);
      if (total <= 0.0) {  // every exponential draw was zero
        std::fill(weights.begin(), weights.end(), 1.0);
        total = static_cast<double>(weights.size());
      }
      for (auto& w : weights) w /= total;
      if (spec.ensure_regular) {
        const auto self = std::find(successors.begin(), successors.end(), s) - successors.begin();
        weights[static_cast<std::size_t>(self)] += kRegularizingSelfLoop;
        for (auto& w : weights) w /= 1.0 + kRegularizingSelfLoop;
      }
      for (std::size_t j = 0; j < successors.size(); ++j) triplets.emplace_back(s, successors[j], weights[j]);
    }
    SparseMatrix p(n, n);
    p.setFromTriplets(triplets.begin(), triplets.end());
    matrices.push_back(std::move(p));
  }

  DenseMatrix costs(n, m);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < m; ++a) costs(s, a) = rng.uniform();
  }
  return MdpModel::from_matrices(spec.gamma, std::move(matrices), std::move(costs));
}

DenseMatrix random_stochastic_matrix(int n, std::uint64_t seed, double density) {
  RandomMdpSpec spec;
  spec.num_states = n;
  spec.num_actions = 1;
  spec.gamma = 0.5;
  spec.density = density;
  spec.seed = seed;
  return DenseMatrix(generate_random(spec).transition(0));
}

}  // namespace ipi

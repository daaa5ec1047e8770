#pragma once

#include "ipi/mdp.hpp"
#include "ipi/random_mdp.hpp"

#include <random>
#include <vector>

namespace ipi::test {

// P = I, g = [1, 2], gamma = 0.5. V^pi = [2, 4].
inline MdpModel identity_chain() {
  const std::vector<Transition> t = {{0, 0, 0, 1.0}, {1, 0, 1, 1.0}};
  DenseMatrix g(2, 1);
  g << 1.0, 2.0;
  return MdpModel::build(2, 1, 0.5, t, g);
}

// Action 0 stays put (costs 0, 2); action 1 swaps states (cost 1 each).
// gamma = 0.5, V* = [0, 1], pi* = (0, 1).
inline MdpModel e1() {
  const std::vector<Transition> t = {
      {0, 0, 0, 1.0}, {1, 0, 1, 1.0}, {0, 1, 1, 1.0}, {1, 1, 0, 1.0}};
  DenseMatrix g(2, 2);
  g << 0.0, 1.0, 2.0, 1.0;
  return MdpModel::build(2, 2, 0.5, t, g);
}

inline MdpModel random_model(int n, int m, double gamma, std::uint64_t seed, double density = 1.0,
                             bool regular = false) {
  RandomMdpSpec spec;
  spec.num_states = n;
  spec.num_actions = m;
  spec.gamma = gamma;
  spec.density = density;
  spec.seed = seed;
  spec.ensure_regular = regular;
  return generate_random(spec);
}

inline Vector random_vector(int n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline DenseMatrix dense(const SparseMatrix& p) { return DenseMatrix(p); }

inline double inf_norm(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

// Independent dense evaluation of a policy: solve (I - gamma P) v = g with
// full-pivot LU on the explicitly gathered matrix.
inline Vector dense_policy_value(const MdpModel& model, const Policy& policy) {
  const int n = model.num_states();
  DenseMatrix a = DenseMatrix::Identity(n, n);
  Vector g(n);
  for (int s = 0; s < n; ++s) {
    const DenseMatrix p = dense(model.transition(policy[s]));
    a.row(s) -= model.gamma() * p.row(s);
    g[s] = model.cost(s, policy[s]);
  }
  return a.fullPivLu().solve(g);
}

// Dense Bellman operator oracle with explicit loops.
inline Vector dense_T(const MdpModel& model, const Vector& v, std::vector<int>* argmin = nullptr) {
  const int n = model.num_states();
  Vector out(n);
  if (argmin) argmin->assign(static_cast<std::size_t>(n), 0);
  for (int s = 0; s < n; ++s) {
    double best = 0.0;
    for (int a = 0; a < model.num_actions(); ++a) {
      const DenseMatrix p = dense(model.transition(a));
      double q = model.cost(s, a);
      for (int j = 0; j < n; ++j) q += model.gamma() * p(s, j) * v[j];
      if (a == 0 || q < best) {
        best = q;
        if (argmin) (*argmin)[static_cast<std::size_t>(s)] = a;
      }
    }
    out[s] = best;
  }
  return out;
}

}  // namespace ipi::test

#pragma once

#include "ipi/mdp.hpp"

#include <cstdint>

namespace ipi {

struct RandomMdpSpec {
  int num_states = 10;
  int num_actions = 2;
  double gamma = 0.9;
  /// Fraction of states reachable in one step from each (state, action).
  double density = 1.0;
  std::uint64_t seed = 0;
  /// Every policy's chain is made irreducible (shared Hamiltonian cycle) and
  /// aperiodic (small self-loop mass).
  bool ensure_regular = false;

  /// Throws InvalidSpec.
  void validate() const;
};

/// Self-loop mass added on the diagonal when ensure_regular is set.
inline constexpr double kRegularizingSelfLoop = 1e-3;

/// Successors are drawn uniformly without replacement, weights from a flat
/// Dirichlet, costs uniform in [0, 1). Fully determined by spec.seed.
[[nodiscard]] MdpModel generate_random(const RandomMdpSpec& spec);

/// Random dense row-stochastic matrix with flat-Dirichlet rows.
[[nodiscard]] DenseMatrix random_stochastic_matrix(int n, std::uint64_t seed, double density = 1.0);

}  // namespace ipi

#pragma once

#include "ipi/mdp.hpp"

#include <array>
#include <utility>
#include <vector>

namespace ipi::sis {

inline constexpr int kHygieneLevels = 5;
inline constexpr int kDistancingLevels = 4;
inline constexpr int kNumActions = kHygieneLevels * kDistancingLevels;
/// Binomial masses below this are dropped before the row is renormalized.
inline constexpr double kPruneThreshold = 1e-15;

using ActionTable = std::array<double, kNumActions>;

/// Action index of (hygiene level, distancing level): hygiene * 4 + distancing.
[[nodiscard]] constexpr int action_index(int hygiene, int distancing) noexcept {
  return hygiene * kDistancingLevels + distancing;
}
[[nodiscard]] constexpr int hygiene_of(int action) noexcept { return action / kDistancingLevels; }
[[nodiscard]] constexpr int distancing_of(int action) noexcept { return action % kDistancingLevels; }

/// Dynamic SIS model parameters. The state is the susceptible count s in
/// {0, ..., N}; all infectives recover after one step, so s' = N - (new infections).
struct SisParams {
  int population = 100;
  double gamma = 0.9;
  double w_financial = 1.0;
  double w_quality = 1.0;
  double w_health = 1.0;
  double cost_per_case = 0.01;
  ActionTable financial_cost{};  ///< c_f(a)
  ActionTable quality_of_life{};  ///< c_q(a), in [0, 1]
  ActionTable contact_rate{};     ///< lambda(a) > 0
  ActionTable infection_prob{};   ///< psi(a), in [0, 1]

  /// Default tables: c_f = 0.1 a1 + 0.2 a2, c_q = 1 - (a1/4 + a2/3)/2,
  /// lambda = 5 (1 - 0.2 a2), psi = 0.2 (1 - 0.2 a1).
  [[nodiscard]] static SisParams defaults(int population = 100, double gamma = 0.9);

  /// Throws InvalidParameter when an invariant does not hold.
  void validate() const;
};

/// q(s,a) = 1 - exp(-lambda(a) beta(s) psi(a)) with beta(s) = (N - s) / N.
[[nodiscard]] double infection_probability(int susceptible, int action, const SisParams& params);

/// Sparse row of P(. | s, a) as (next_state, probability) pairs in ascending
/// next_state order. Sums to one; state N is absorbing.
[[nodiscard]] std::vector<std::pair<int, double>> transition_row(int susceptible, int action,
                                                                 const SisParams& params);

/// g(s,a) = w_f c_f(a) - w_q c_q(a) + w_h c_h (N - s).
[[nodiscard]] double stage_cost(int susceptible, int action, const SisParams& params);

/// N + 1 states, 20 actions. Rows are built in parallel across `workers`
/// threads; the matrices do not depend on the worker count.
[[nodiscard]] MdpModel build_sis_mdp(const SisParams& params, unsigned workers = 1);

}  // namespace ipi::sis

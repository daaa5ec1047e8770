#pragma once

#include "ipi/mdp.hpp"
#include "ipi/policy_eval.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ipi {

/// Wall-clock budget used when none is configured explicitly, in seconds.
inline constexpr double kDefaultTimeBudget = 500.0;

enum class Termination { Tolerance, MaxIters, TimeBudget };

[[nodiscard]] std::string to_string(Termination termination);

struct OuterConfig {
  double tol = 1e-8;
  int max_outer_iters = 100000;
  std::optional<double> time_budget_s = kDefaultTimeBudget;
  /// Constant forcing parameter of inexact PI.
  double alpha = 0.1;
  /// Optional forcing schedule alpha_k; overrides `alpha` when set.
  std::function<double(int)> alpha_schedule;
  InnerMethod inner_method = inner::Gmres{};
  int max_inner_iters = kDefaultMaxInnerIters;
  /// Number of T_pi applications per outer step of optimistic PI.
  int opi_w = 1;
  /// When set, error_history holds ||V_k - reference||_inf.
  std::optional<Vector> reference;
  /// Keep every outer iterate in SolveReport::iterates.
  bool record_iterates = false;

  /// Throws InvalidParameter on tol <= 0, alpha outside (0,1), opi_w < 1 and similar.
  void validate() const;
};

/// Outer-iteration trace. Entry k of each history describes iterate V_k;
/// entry 0 is the starting vector, so every history has outer_iters + 1 entries.
struct SolveReport {
  std::string solver;
  Vector final_value;
  Policy final_policy;
  int outer_iters = 0;
  std::vector<double> residual_history;   ///< ||r(V_k)||_inf
  std::vector<double> error_history;      ///< empty without a reference
  std::vector<int> inner_iters_history;   ///< inner iterations spent producing V_k
  std::vector<double> time_history;       ///< cumulative seconds when V_k was available
  /// For inexact PI: the inner residual and acceptance threshold of each solve.
  std::vector<double> inner_residual_history;
  std::vector<double> inner_threshold_history;
  std::vector<bool> inner_converged_history;
  std::vector<Vector> iterates;           ///< only with OuterConfig::record_iterates
  double wall_time_s = 0.0;
  Termination terminated_by = Termination::MaxIters;

  [[nodiscard]] long long total_inner_iters() const;
  [[nodiscard]] double final_residual_inf() const {
    return residual_history.empty() ? 0.0 : residual_history.back();
  }
};

/// V_{k+1} = T V_k until ||V_{k+1} - V_k||_inf <= tol.
[[nodiscard]] SolveReport value_iteration(const MdpModel& model, const Vector& v0, const OuterConfig& config);

/// Greedy improvement followed by exact evaluation, until successive
/// evaluations differ by at most tol.
[[nodiscard]] SolveReport policy_iteration(const MdpModel& model, const Vector& v_tilde, const OuterConfig& config);

/// V_{k+1} = T_{pi_{k+1}}^w V_k with pi_{k+1} greedy for V_k. w = 1 is value iteration.
[[nodiscard]] SolveReport optimistic_pi(const MdpModel& model, const Vector& v0, const OuterConfig& config);

/// Inexact policy iteration: the evaluation of each greedy policy is solved
/// by config.inner_method, seeded at V_k, until its residual drops below
/// alpha * ||r(V_k)||_inf (or the inner cap is hit). Stops when ||r(V_k)||_inf <= tol.
[[nodiscard]] SolveReport inexact_pi(const MdpModel& model, const Vector& v0, const OuterConfig& config);

struct OptimalSolution {
  Vector value;
  Policy policy;
};

/// Largest policy count brute_force_optimal accepts.
inline constexpr double kBruteForcePolicyLimit = 1e6;

/// Test oracle: evaluates every deterministic policy exactly and returns the
/// elementwise minimum. Throws TooLarge when m^n exceeds kBruteForcePolicyLimit.
[[nodiscard]] OptimalSolution brute_force_optimal(const MdpModel& model);

}  // namespace ipi

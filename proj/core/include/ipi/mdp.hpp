#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <span>
#include <vector>

namespace ipi {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
/// Compressed sparse row storage; every transition matrix in the library uses it.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// Tolerance used when validating input rows of transition matrices.
inline constexpr double kRowSumTolerance = 1e-9;

/// One entry P(state, action, next_state) = prob of a transition kernel.
struct Transition {
  int state = 0;
  int action = 0;
  int next_state = 0;
  double prob = 0.0;
};

/// Deterministic stationary policy: one action index per state.
class Policy {
 public:
  Policy() = default;
  explicit Policy(std::vector<int> actions) : actions_(std::move(actions)) {}

  static Policy constant(std::size_t num_states, int action) {
    return Policy(std::vector<int>(num_states, action));
  }

  [[nodiscard]] std::size_t size() const noexcept { return actions_.size(); }
  [[nodiscard]] int operator[](std::size_t state) const { return actions_[state]; }
  [[nodiscard]] std::span<const int> actions() const noexcept { return actions_; }

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::vector<int> actions_;
};

/// Finite discounted MDP with per-action sparse transition matrices and a
/// dense n x m stage-cost table. Immutable once built; safe to share
/// between threads.
class MdpModel {
 public:
  /// Assembles the model from (state, action, next_state, prob) triplets.
  /// Triplets may come in any order; duplicate (state, next_state) pairs
  /// within one action are rejected. Rows are validated, never renormalized.
  static MdpModel build(int num_states, int num_actions, double gamma,
                        std::span<const Transition> transitions, const DenseMatrix& costs);

  /// Same validation as build(), for callers that already hold CSR matrices.
  static MdpModel from_matrices(double gamma, std::vector<SparseMatrix> transitions,
                                DenseMatrix costs);

  [[nodiscard]] int num_states() const noexcept { return num_states_; }
  [[nodiscard]] int num_actions() const noexcept { return num_actions_; }
  [[nodiscard]] double gamma() const noexcept { return gamma_; }
  /// R = max |g(i,a)|.
  [[nodiscard]] double cost_bound() const noexcept { return cost_bound_; }

  [[nodiscard]] const SparseMatrix& transition(int action) const {
    return transitions_.at(static_cast<std::size_t>(action));
  }
  [[nodiscard]] std::span<const SparseMatrix> transitions() const noexcept { return transitions_; }
  [[nodiscard]] const DenseMatrix& costs() const noexcept { return costs_; }
  [[nodiscard]] double cost(int state, int action) const { return costs_(state, action); }

  /// Copy of this model with a different discount factor.
  [[nodiscard]] MdpModel with_gamma(double gamma) const;

  [[nodiscard]] std::size_t nonzeros() const noexcept;

 private:
  MdpModel() = default;

  int num_states_ = 0;
  int num_actions_ = 0;
  double gamma_ = 0.0;
  double cost_bound_ = 0.0;
  std::vector<SparseMatrix> transitions_;
  DenseMatrix costs_;
};

/// The policy-evaluation system (I - gamma P_pi) theta = g_pi, kept implicit
/// through P_pi and g_pi.
class PolicyLinearSystem {
 public:
  PolicyLinearSystem(SparseMatrix p_pi, Vector g_pi, double gamma);

  [[nodiscard]] Eigen::Index size() const noexcept { return g_pi_.size(); }
  [[nodiscard]] double gamma() const noexcept { return gamma_; }
  [[nodiscard]] const SparseMatrix& transition() const noexcept { return p_pi_; }
  [[nodiscard]] const Vector& costs() const noexcept { return g_pi_; }
  /// diag(I - gamma P_pi); every entry is at least 1 - gamma.
  [[nodiscard]] const Vector& diagonal() const noexcept { return diagonal_; }

  /// (I - gamma P_pi) x
  [[nodiscard]] Vector apply(const Vector& x) const;
  /// (I - gamma P_pi)^T x
  [[nodiscard]] Vector apply_transpose(const Vector& x) const;
  /// Dense copy of I - gamma P_pi, for small systems and oracles.
  [[nodiscard]] DenseMatrix coefficient_matrix() const;

 private:
  SparseMatrix p_pi_;
  Vector g_pi_;
  double gamma_;
  Vector diagonal_;
};

struct GreedyStep {
  Vector value;
  Policy policy;
};

/// g_pi + gamma P_pi V.
[[nodiscard]] Vector apply_T_pi(const MdpModel& model, const Policy& policy, const Vector& value);

/// Bellman optimality operator together with the greedy policy attaining it.
/// Ties go to the lowest action index. States may be split across `workers`
/// threads; the result does not depend on the split.
[[nodiscard]] GreedyStep apply_T(const MdpModel& model, const Vector& value, unsigned workers = 1);

[[nodiscard]] Policy greedy_policy(const MdpModel& model, const Vector& value);

/// r(V) = V - TV.
[[nodiscard]] Vector bellman_residual(const MdpModel& model, const Vector& value);

/// Gathers row i of P_{pi(i)} and g(i, pi(i)) into a new system.
[[nodiscard]] PolicyLinearSystem extract_policy_system(const MdpModel& model, const Policy& policy);

/// Direct solve of the policy system. Dense LU below 64 states, sparse LU above.
[[nodiscard]] Vector solve_exact(const PolicyLinearSystem& system);

[[nodiscard]] Vector exact_policy_evaluation(const MdpModel& model, const Policy& policy);

/// Throws DimensionMismatch / IndexOutOfRange when the policy does not fit the model.
void check_policy(const MdpModel& model, const Policy& policy);
/// Throws DimensionMismatch / NonFiniteValue.
void check_value(const MdpModel& model, const Vector& value);

}  // namespace ipi

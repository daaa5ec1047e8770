#include "ipi/mdp.hpp"

#include "ipi/error.hpp"

#include <Eigen/LU>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace ipi {
namespace {

constexpr Eigen::Index kDenseSolveBelow = 64;

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    std::ostringstream msg;
    msg << "discount factor must lie in (0,1), got " << gamma;
    throw Error(ErrorKind::GammaOutOfRange, msg.str());
  }
}

void validate_rows(const SparseMatrix& p, int action) {
  for (Eigen::Index row = 0; row < p.outerSize(); ++row) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(p, row); it; ++it) {
      if (!std::isfinite(it.value())) {
        throw Error(ErrorKind::NonFiniteValue,
                    "non-finite probability in action " + std::to_string(action));
      }
      if (it.value() < 0.0) {
        std::ostringstream msg;
        msg << "P(" << row << ',' << action << ',' << it.col() << ") = " << it.value();
        throw Error(ErrorKind::NegativeProbability, msg.str());
      }
      sum += it.value();
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream msg;
      msg << "row " << row << " of action " << action << " sums to " << sum;
      throw Error(ErrorKind::RowSum, msg.str());
    }
  }
}

// Dot product of one CSR row with a dense vector, in storage order.
double row_dot(const SparseMatrix& p, Eigen::Index row, const Vector& x) {
  double acc = 0.0;
  for (SparseMatrix::InnerIterator it(p, row); it; ++it) acc += it.value() * x[it.col()];
  return acc;
}

void greedy_rows(const MdpModel& model, const Vector& value, Eigen::Index begin, Eigen::Index end,
                 GreedyStep& out, std::vector<int>& actions) {
  const double gamma = model.gamma();
  for (Eigen::Index s = begin; s < end; ++s) {
    double best = std::numeric_limits<double>::infinity();
    int best_action = 0;
    for (int a = 0; a < model.num_actions(); ++a) {
      const double q = model.cost(static_cast<int>(s), a) + gamma * row_dot(model.transition(a), s, value);
      if (q < best) {
        best = q;
        best_action = a;
      }
    }
    out.value[s] = best;
    actions[static_cast<std::size_t>(s)] = best_action;
  }
}

}  // namespace

MdpModel MdpModel::build(int num_states, int num_actions, double gamma,
                         std::span<const Transition> transitions, const DenseMatrix& costs) {
  if (num_states < 1 || num_actions < 1) {
    throw Error(ErrorKind::InvalidParameter, "model needs at least one state and one action");
  }
  check_gamma(gamma);

  std::vector<std::vector<Eigen::Triplet<double, int>>> per_action(static_cast<std::size_t>(num_actions));
  for (const auto& t : transitions) {
    if (t.state < 0 || t.state >= num_states || t.next_state < 0 || t.next_state >= num_states ||
        t.action < 0 || t.action >= num_actions) {
      std::ostringstream msg;
      msg << "triplet (" << t.state << ',' << t.action << ',' << t.next_state << ") outside "
          << num_states << " states x " << num_actions << " actions";
      throw Error(ErrorKind::IndexOutOfRange, msg.str());
    }
    if (t.prob < 0.0) {
      std::ostringstream msg;
      msg << "P(" << t.state << ',' << t.action << ',' << t.next_state << ") = " << t.prob;
      throw Error(ErrorKind::NegativeProbability, msg.str());
    }
    per_action[static_cast<std::size_t>(t.action)].emplace_back(t.state, t.next_state, t.prob);
  }

  std::vector<SparseMatrix> matrices;
  matrices.reserve(per_action.size());
  for (std::size_t a = 0; a < per_action.size(); ++a) {
    auto& triplets = per_action[a];
    std::sort(triplets.begin(), triplets.end(), [](const auto& x, const auto& y) {
      return x.row() != y.row() ? x.row() < y.row() : x.col() < y.col();
    });
    for (std::size_t k = 1; k < triplets.size(); ++k) {
      if (triplets[k].row() == triplets[k - 1].row() && triplets[k].col() == triplets[k - 1].col()) {
        std::ostringstream msg;
        msg << "action " << a << " lists (" << triplets[k].row() << ',' << triplets[k].col() << ") twice";
        throw Error(ErrorKind::DuplicateTransition, msg.str());
      }
    }
    SparseMatrix p(num_states, num_states);
    p.setFromTriplets(triplets.begin(), triplets.end());
    p.prune(0.0);
    matrices.push_back(std::move(p));
  }
  return from_matrices(gamma, std::move(matrices), costs);
}

MdpModel MdpModel::from_matrices(double gamma, std::vector<SparseMatrix> transitions, DenseMatrix costs) {
  check_gamma(gamma);
  if (transitions.empty()) {
    throw Error(ErrorKind::InvalidParameter, "model needs at least one action");
  }
  const auto n = transitions.front().rows();
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "model needs at least one state");
  for (std::size_t a = 0; a < transitions.size(); ++a) {
    auto& p = transitions[a];
    if (p.rows() != n || p.cols() != n) {
      throw Error(ErrorKind::DimensionMismatch,
                  "transition matrix of action " + std::to_string(a) + " is not " +
                      std::to_string(n) + "x" + std::to_string(n));
    }
    p.makeCompressed();
    validate_rows(p, static_cast<int>(a));
  }
  if (costs.rows() != n || costs.cols() != static_cast<Eigen::Index>(transitions.size())) {
    throw Error(ErrorKind::DimensionMismatch, "cost table must be num_states x num_actions");
  }
  if (!costs.allFinite()) throw Error(ErrorKind::NonFiniteValue, "cost table has non-finite entries");

  MdpModel model;
  model.num_states_ = static_cast<int>(n);
  model.num_actions_ = static_cast<int>(transitions.size());
  model.gamma_ = gamma;
  model.cost_bound_ = costs.size() > 0 ? costs.cwiseAbs().maxCoeff() : 0.0;
  model.transitions_ = std::move(transitions);
  model.costs_ = std::move(costs);
  return model;
}

MdpModel MdpModel::with_gamma(double gamma) const {
  check_gamma(gamma);
  MdpModel copy = *this;
  copy.gamma_ = gamma;
  return copy;
}

std::size_t MdpModel::nonzeros() const noexcept {
  std::size_t total = 0;
  for (const auto& p : transitions_) total += static_cast<std::size_t>(p.nonZeros());
  return total;
}

PolicyLinearSystem::PolicyLinearSystem(SparseMatrix p_pi, Vector g_pi, double gamma)
    : p_pi_(std::move(p_pi)), g_pi_(std::move(g_pi)), gamma_(gamma) {
  check_gamma(gamma_);
  if (p_pi_.rows() != p_pi_.cols() || p_pi_.rows() != g_pi_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "policy system: P_pi must be square and match g_pi");
  }
  p_pi_.makeCompressed();
  validate_rows(p_pi_, -1);
  diagonal_ = Vector::Ones(g_pi_.size()) - gamma_ * Vector(p_pi_.diagonal());
}

Vector PolicyLinearSystem::apply(const Vector& x) const {
  Vector out = x;
  out.noalias() -= gamma_ * (p_pi_ * x);
  return out;
}

Vector PolicyLinearSystem::apply_transpose(const Vector& x) const {
  Vector out = x;
  out.noalias() -= gamma_ * (p_pi_.transpose() * x);
  return out;
}

DenseMatrix PolicyLinearSystem::coefficient_matrix() const {
  DenseMatrix a = -gamma_ * DenseMatrix(p_pi_);
  a.diagonal().array() += 1.0;
  return a;
}

void check_policy(const MdpModel& model, const Policy& policy) {
  if (policy.size() != static_cast<std::size_t>(model.num_states())) {
    throw Error(ErrorKind::DimensionMismatch, "policy length " + std::to_string(policy.size()) +
                                                  " != " + std::to_string(model.num_states()));
  }
  for (std::size_t s = 0; s < policy.size(); ++s) {
    if (policy[s] < 0 || policy[s] >= model.num_actions()) {
      throw Error(ErrorKind::IndexOutOfRange,
                  "policy selects action " + std::to_string(policy[s]) + " in state " + std::to_string(s));
    }
  }
}

void check_value(const MdpModel& model, const Vector& value) {
  if (value.size() != model.num_states()) {
    throw Error(ErrorKind::DimensionMismatch, "value vector length " + std::to_string(value.size()) +
                                                  " != " + std::to_string(model.num_states()));
  }
  if (!value.allFinite()) throw Error(ErrorKind::NonFiniteValue, "value vector has non-finite entries");
}

Vector apply_T_pi(const MdpModel& model, const Policy& policy, const Vector& value) {
  check_policy(model, policy);
  check_value(model, value);
  Vector out(model.num_states());
  for (Eigen::Index s = 0; s < out.size(); ++s) {
    const int a = policy[static_cast<std::size_t>(s)];
    out[s] = model.cost(static_cast<int>(s), a) + model.gamma() * row_dot(model.transition(a), s, value);
  }
  return out;
}

GreedyStep apply_T(const MdpModel& model, const Vector& value, unsigned workers) {
  check_value(model, value);
  const Eigen::Index n = model.num_states();
  GreedyStep out{Vector(n), Policy()};
  std::vector<int> actions(static_cast<std::size_t>(n));

  workers = std::clamp<unsigned>(workers, 1U, static_cast<unsigned>(n));
  if (workers == 1) {
    greedy_rows(model, value, 0, n, out, actions);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const Eigen::Index chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const Eigen::Index begin = std::min<Eigen::Index>(n, w * chunk);
      const Eigen::Index end = std::min<Eigen::Index>(n, begin + chunk);
      pool.emplace_back([&, begin, end] { greedy_rows(model, value, begin, end, out, actions); });
    }
  }
  out.policy = Policy(std::move(actions));
  return out;
}

Policy greedy_policy(const MdpModel& model, const Vector& value) { return apply_T(model, value).policy; }

Vector bellman_residual(const MdpModel& model, const Vector& value) {
  return value - apply_T(model, value).value;
}

PolicyLinearSystem extract_policy_system(const MdpModel& model, const Policy& policy) {
  check_policy(model, policy);
  const int n = model.num_states();
  Eigen::Index nnz = 0;
  for (int s = 0; s < n; ++s) {
    const auto& p = model.transition(policy[static_cast<std::size_t>(s)]);
    nnz += p.outerIndexPtr()[s + 1] - p.outerIndexPtr()[s];
  }

  SparseMatrix p_pi(n, n);
  p_pi.reserve(nnz);
  Vector g_pi(n);
  for (int s = 0; s < n; ++s) {
    const int a = policy[static_cast<std::size_t>(s)];
    p_pi.startVec(s);
    for (SparseMatrix::InnerIterator it(model.transition(a), s); it; ++it) {
      p_pi.insertBack(s, static_cast<int>(it.col())) = it.value();
    }
    g_pi[s] = model.cost(s, a);
  }
  p_pi.finalize();
  return PolicyLinearSystem(std::move(p_pi), std::move(g_pi), model.gamma());
}

Vector solve_exact(const PolicyLinearSystem& system) {
  const Eigen::Index n = system.size();
  Vector solution;
  if (n < kDenseSolveBelow) {
    Eigen::PartialPivLU<DenseMatrix> lu(system.coefficient_matrix());
    solution = lu.solve(system.costs());
  } else {
    Eigen::SparseMatrix<double, Eigen::ColMajor, int> a(n, n);
    a.setIdentity();
    a -= system.gamma() * Eigen::SparseMatrix<double, Eigen::ColMajor, int>(system.transition());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
      throw Error(ErrorKind::FactorizationFailure, "sparse LU failed: " + lu.lastErrorMessage());
    }
    solution = lu.solve(system.costs());
    if (lu.info() != Eigen::Success) {
      throw Error(ErrorKind::FactorizationFailure, "sparse LU solve failed");
    }
  }
  if (!solution.allFinite()) {
    throw Error(ErrorKind::FactorizationFailure, "policy evaluation produced non-finite values");
  }
  return solution;
}

Vector exact_policy_evaluation(const MdpModel& model, const Policy& policy) {
  return solve_exact(extract_policy_system(model, policy));
}

}  // namespace ipi

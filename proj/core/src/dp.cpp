#include "ipi/dp.hpp"

#include "ipi/error.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ipi {
namespace {

using Clock = std::chrono::steady_clock;

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

// Shared bookkeeping for the four outer solvers.
class Recorder {
 public:
  Recorder(std::string solver, const OuterConfig& config) : config_(config), start_(Clock::now()) {
    report_.solver = std::move(solver);
  }

  void push(const Vector& value, double residual_inf, int inner_iters) {
    report_.residual_history.push_back(residual_inf);
    if (config_.reference) report_.error_history.push_back(inf_norm(value - *config_.reference));
    report_.inner_iters_history.push_back(inner_iters);
    report_.time_history.push_back(elapsed());
    if (config_.record_iterates) report_.iterates.push_back(value);
  }

  [[nodiscard]] double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

  // Checks the iteration cap and time budget; true when the solver must stop.
  [[nodiscard]] bool out_of_budget() {
    if (report_.outer_iters >= config_.max_outer_iters) {
      report_.terminated_by = Termination::MaxIters;
      return true;
    }
    if (config_.time_budget_s && elapsed() > *config_.time_budget_s) {
      report_.terminated_by = Termination::TimeBudget;
      return true;
    }
    return false;
  }

  SolveReport finish(Vector value, Policy policy) {
    report_.final_value = std::move(value);
    report_.final_policy = std::move(policy);
    report_.wall_time_s = elapsed();
    return std::move(report_);
  }

  SolveReport& report() { return report_; }

 private:
  const OuterConfig& config_;
  Clock::time_point start_;
  SolveReport report_;
};

void check_start(const MdpModel& model, const Vector& v0, const OuterConfig& config) {
  config.validate();
  check_value(model, v0);
  if (config.reference && config.reference->size() != model.num_states()) {
    throw Error(ErrorKind::DimensionMismatch, "reference vector does not match the model");
  }
}

// Shared loop of VI and OPI: V_{k+1} = T_{pi_{k+1}}^w V_k, stop on ||V_{k+1} - V_k|| <= tol.
SolveReport sweep_iteration(std::string solver, const MdpModel& model, const Vector& v0,
                            const OuterConfig& config, int sweeps) {
  check_start(model, v0, config);
  Recorder rec(std::move(solver), config);
  Vector value = v0;
  GreedyStep step = apply_T(model, value);
  rec.push(value, inf_norm(value - step.value), 0);
  double last_diff = std::numeric_limits<double>::infinity();

  for (;;) {
    if (rec.report().outer_iters > 0 && last_diff <= config.tol) {
      rec.report().terminated_by = Termination::Tolerance;
      break;
    }
    if (rec.out_of_budget()) break;

    Vector next = std::move(step.value);
    for (int i = 1; i < sweeps; ++i) next = apply_T_pi(model, step.policy, next);
    last_diff = inf_norm(next - value);
    value = std::move(next);
    ++rec.report().outer_iters;

    step = apply_T(model, value);
    rec.push(value, inf_norm(value - step.value), sweeps == 1 ? 0 : sweeps);
  }
  return rec.finish(std::move(value), std::move(step.policy));
}

}  // namespace

std::string to_string(Termination termination) {
  switch (termination) {
    case Termination::Tolerance: return "Tolerance";
    case Termination::MaxIters: return "MaxIters";
    case Termination::TimeBudget: return "TimeBudget";
  }
  return "Unknown";
}

void OuterConfig::validate() const {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "tol must be positive");
  if (max_outer_iters < 1) throw Error(ErrorKind::InvalidParameter, "max_outer_iters must be >= 1");
  if (time_budget_s && !(*time_budget_s > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "time budget must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidParameter, "alpha must lie in (0,1)");
  if (max_inner_iters < 1) throw Error(ErrorKind::InvalidParameter, "max_inner_iters must be >= 1");
  if (opi_w < 1) throw Error(ErrorKind::InvalidParameter, "opi_w must be >= 1");
  ipi::validate(inner_method);
}

long long SolveReport::total_inner_iters() const {
  return std::accumulate(inner_iters_history.begin(), inner_iters_history.end(), 0LL);
}

SolveReport value_iteration(const MdpModel& model, const Vector& v0, const OuterConfig& config) {
  return sweep_iteration("vi", model, v0, config, 1);
}

SolveReport optimistic_pi(const MdpModel& model, const Vector& v0, const OuterConfig& config) {
  return sweep_iteration("opi", model, v0, config, config.opi_w);
}

SolveReport policy_iteration(const MdpModel& model, const Vector& v_tilde, const OuterConfig& config) {
  check_start(model, v_tilde, config);
  Recorder rec("pi", config);
  Vector value = v_tilde;
  GreedyStep step = apply_T(model, value);
  rec.push(value, inf_norm(value - step.value), 0);
  double last_diff = std::numeric_limits<double>::infinity();

  for (;;) {
    // Successive evaluations are compared, so at least two are needed.
    if (rec.report().outer_iters >= 2 && last_diff <= config.tol) {
      rec.report().terminated_by = Termination::Tolerance;
      break;
    }
    if (rec.out_of_budget()) break;

    Vector next = exact_policy_evaluation(model, step.policy);
    last_diff = inf_norm(next - value);
    value = std::move(next);
    ++rec.report().outer_iters;

    step = apply_T(model, value);
    rec.push(value, inf_norm(value - step.value), 0);
  }
  return rec.finish(std::move(value), std::move(step.policy));
}

SolveReport inexact_pi(const MdpModel& model, const Vector& v0, const OuterConfig& config) {
  check_start(model, v0, config);
  Recorder rec("ipi-" + name(config.inner_method), config);
  Vector value = v0;
  GreedyStep step = apply_T(model, value);
  double residual_inf = inf_norm(value - step.value);
  rec.push(value, residual_inf, 0);

  for (;;) {
    if (residual_inf <= config.tol) {
      rec.report().terminated_by = Termination::Tolerance;
      break;
    }
    if (rec.out_of_budget()) break;

    const int k = rec.report().outer_iters;
    const double alpha = config.alpha_schedule ? config.alpha_schedule(k) : config.alpha;
    const PolicyLinearSystem system = extract_policy_system(model, step.policy);
    const StoppingRule rule(alpha, residual(system, value).lpNorm<Eigen::Infinity>(), config.max_inner_iters);
    InnerResult inner = solve_to_tolerance(system, value, config.inner_method, rule);

    auto& report = rec.report();
    report.inner_residual_history.push_back(inner.trace.residual_inf_history.back());
    report.inner_threshold_history.push_back(rule.threshold());
    report.inner_converged_history.push_back(inner.trace.converged);

    value = std::move(inner.solution);
    ++report.outer_iters;
    step = apply_T(model, value);
    residual_inf = inf_norm(value - step.value);
    rec.push(value, residual_inf, inner.trace.iterations_used);
  }
  return rec.finish(std::move(value), std::move(step.policy));
}

OptimalSolution brute_force_optimal(const MdpModel& model) {
  const int n = model.num_states();
  const int m = model.num_actions();
  const double count = std::pow(static_cast<double>(m), static_cast<double>(n));
  if (count > kBruteForcePolicyLimit) {
    std::ostringstream msg;
    msg << m << "^" << n << " policies exceed the enumeration limit";
    throw Error(ErrorKind::TooLarge, msg.str());
  }

  std::vector<int> actions(static_cast<std::size_t>(n), 0);
  Vector best = Vector::Constant(n, std::numeric_limits<double>::infinity());
  Vector candidate_value;
  Policy candidate;
  double candidate_sum = std::numeric_limits<double>::infinity();

  for (;;) {
    Policy policy(actions);
    Vector v = exact_policy_evaluation(model, policy);
    best = best.cwiseMin(v);
    // The optimal vector is elementwise minimal, so it also has the smallest sum.
    if (const double sum = v.sum(); sum < candidate_sum) {
      candidate_sum = sum;
      candidate_value = std::move(v);
      candidate = std::move(policy);
    }

    int pos = 0;
    while (pos < n && ++actions[static_cast<std::size_t>(pos)] == m) actions[static_cast<std::size_t>(pos++)] = 0;
    if (pos == n) break;
  }

  const double scale = std::max(1.0, inf_norm(best));
  if (inf_norm(candidate_value - best) > 1e-9 * scale) {
    throw Error(ErrorKind::OptimalityViolation, "no single policy attains the elementwise minimum");
  }
  return {std::move(candidate_value), std::move(candidate)};
}

}  // namespace ipi

#pragma once

#include "ipi/mdp.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ipi {

/// Default cap on inner iterations per policy-evaluation solve.
inline constexpr int kDefaultMaxInnerIters = 500;
/// Arnoldi subdiagonal entries below this are treated as a happy breakdown.
inline constexpr double kHappyBreakdown = 1e-14;
/// Line-search denominators below this mean the residual is numerically zero.
inline constexpr double kLineSearchFloor = 1e-300;

/// Relative-residual acceptance test for an inexact policy evaluation:
/// accept theta once ||g - (I - gamma P) theta||_inf <= alpha * reference.
class StoppingRule {
 public:
  StoppingRule(double alpha, double reference_residual_inf, int max_inner_iters = kDefaultMaxInnerIters);

  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] double reference_residual_inf() const noexcept { return reference_; }
  [[nodiscard]] int max_inner_iters() const noexcept { return max_inner_iters_; }
  [[nodiscard]] double threshold() const noexcept { return alpha_ * reference_; }
  [[nodiscard]] bool accepts(double residual_inf) const noexcept { return residual_inf <= threshold(); }

 private:
  double alpha_;
  double reference_;
  int max_inner_iters_;
};

namespace inner {
struct Richardson {
  double nu = 1.0;
};
struct Jacobi {};
struct GaussSeidel {};
struct Sor {
  double omega = 1.0;
};
struct SteepestDescent {};
struct MinRes {};
struct Gmres {
  std::optional<int> restart;  ///< unset: no restart
};
}  // namespace inner

using InnerMethod = std::variant<inner::Richardson, inner::Jacobi, inner::GaussSeidel, inner::Sor,
                                 inner::SteepestDescent, inner::MinRes, inner::Gmres>;

/// Throws InvalidParameter for nu <= 0, omega outside (0,2) or restart < 1.
void validate(const InnerMethod& method);
[[nodiscard]] std::string name(const InnerMethod& method);

struct InnerTrace {
  std::vector<double> residual_inf_history;  ///< entry 0 is the starting residual
  std::vector<double> residual_2_history;
  int iterations_used = 0;
  bool converged = false;
};

struct InnerResult {
  Vector solution;
  InnerTrace trace;
};

/// Phi(theta) = g_pi - (I - gamma P_pi) theta.
[[nodiscard]] Vector residual(const PolicyLinearSystem& system, const Vector& theta);

/// theta + Phi(theta) / nu. With nu = 1 this is one VI sweep for policy evaluation.
[[nodiscard]] Vector richardson_step(const PolicyLinearSystem& system, const Vector& theta, double nu);
/// theta + D^{-1} Phi(theta), D = diag(I - gamma P_pi).
[[nodiscard]] Vector jacobi_step(const PolicyLinearSystem& system, const Vector& theta);
/// In-place sweep in ascending state order using already-updated entries.
[[nodiscard]] Vector sor_sweep(const PolicyLinearSystem& system, const Vector& theta, double omega);
[[nodiscard]] Vector gauss_seidel_sweep(const PolicyLinearSystem& system, const Vector& theta);

/// Exact line search on 0.5 ||Phi||^2 along the negative gradient A^T Phi.
[[nodiscard]] Vector steepest_descent_step(const PolicyLinearSystem& system, const Vector& theta);
/// Exact line search on ||Phi||_2 along the residual direction.
[[nodiscard]] Vector minres_step(const PolicyLinearSystem& system, const Vector& theta);

/// GMRES with Arnoldi (modified Gram-Schmidt, one selective re-orthogonalization)
/// and progressive Givens rotations. The iterate is rebuilt and its true
/// residual checked against `rule` after every Arnoldi step.
[[nodiscard]] InnerResult gmres(const PolicyLinearSystem& system, const Vector& theta0,
                                const StoppingRule& rule, std::optional<int> restart = std::nullopt);

/// Runs `method` from theta0 until rule accepts the iterate or the cap is hit.
/// Non-convergence is reported through trace.converged, never thrown.
[[nodiscard]] InnerResult solve_to_tolerance(const PolicyLinearSystem& system, const Vector& theta0,
                                             const InnerMethod& method, const StoppingRule& rule);

}  // namespace ipi

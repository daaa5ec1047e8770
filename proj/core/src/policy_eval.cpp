#include "ipi/policy_eval.hpp"

#include "ipi/error.hpp"

#include <cmath>
#include <sstream>

namespace ipi {
namespace {

void check_theta(const PolicyLinearSystem& system, const Vector& theta) {
  if (theta.size() != system.size()) {
    throw Error(ErrorKind::DimensionMismatch, "iterate length " + std::to_string(theta.size()) +
                                                  " != system size " + std::to_string(system.size()));
  }
}

void record(InnerTrace& trace, const Vector& phi) {
  trace.residual_inf_history.push_back(phi.lpNorm<Eigen::Infinity>());
  trace.residual_2_history.push_back(phi.norm());
}

// The update rules below take the current residual so the driver does not
// recompute it.

Vector richardson_update(const Vector& theta, const Vector& phi, double nu) { return theta + phi / nu; }

Vector jacobi_update(const PolicyLinearSystem& system, const Vector& theta, const Vector& phi) {
  return theta + phi.cwiseQuotient(system.diagonal());
}

Vector steepest_descent_update(const PolicyLinearSystem& system, const Vector& theta, const Vector& phi) {
  if (phi.squaredNorm() == 0.0) return theta;
  const Vector descent = system.apply_transpose(phi);  // -gradient of 0.5 ||Phi||^2
  const Vector image = system.apply(descent);
  const double denom = image.squaredNorm();
  if (denom < kLineSearchFloor) return theta;
  const double eta = phi.dot(image) / denom;
  return theta + eta * descent;
}

Vector minres_update(const PolicyLinearSystem& system, const Vector& theta, const Vector& phi) {
  if (phi.squaredNorm() == 0.0) return theta;
  const Vector image = system.apply(phi);
  const double denom = image.squaredNorm();
  if (denom < kLineSearchFloor) return theta;
  const double eta = image.dot(phi) / denom;
  return theta + eta * phi;
}

struct Givens {
  double c = 1.0;
  double s = 0.0;
};

}  // namespace

StoppingRule::StoppingRule(double alpha, double reference_residual_inf, int max_inner_iters)
    : alpha_(alpha), reference_(reference_residual_inf), max_inner_iters_(max_inner_iters) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream msg;
    msg << "forcing parameter alpha must lie in (0,1), got " << alpha;
    throw Error(ErrorKind::InvalidParameter, msg.str());
  }
  if (!(reference_residual_inf >= 0.0) || !std::isfinite(reference_residual_inf)) {
    throw Error(ErrorKind::InvalidParameter, "reference residual must be finite and non-negative");
  }
  if (max_inner_iters < 1) throw Error(ErrorKind::InvalidParameter, "max_inner_iters must be >= 1");
}

void validate(const InnerMethod& method) {
  if (const auto* r = std::get_if<inner::Richardson>(&method); r && !(r->nu > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "Richardson nu must be positive");
  }
  if (const auto* s = std::get_if<inner::Sor>(&method); s && !(s->omega > 0.0 && s->omega < 2.0)) {
    throw Error(ErrorKind::InvalidParameter, "SOR omega must lie in (0,2)");
  }
  if (const auto* g = std::get_if<inner::Gmres>(&method); g && g->restart && *g->restart < 1) {
    throw Error(ErrorKind::InvalidParameter, "GMRES restart must be a positive integer");
  }
}

std::string name(const InnerMethod& method) {
  struct Visitor {
    std::string operator()(const inner::Richardson& r) const {
      std::ostringstream out;
      out << "richardson(nu=" << r.nu << ')';
      return out.str();
    }
    std::string operator()(const inner::Jacobi&) const { return "jacobi"; }
    std::string operator()(const inner::GaussSeidel&) const { return "gs"; }
    std::string operator()(const inner::Sor& s) const {
      std::ostringstream out;
      out << "sor(omega=" << s.omega << ')';
      return out.str();
    }
    std::string operator()(const inner::SteepestDescent&) const { return "sd"; }
    std::string operator()(const inner::MinRes&) const { return "minres"; }
    std::string operator()(const inner::Gmres& g) const {
      return g.restart ? "gmres(restart=" + std::to_string(*g.restart) + ")" : "gmres";
    }
  };
  return std::visit(Visitor{}, method);
}

Vector residual(const PolicyLinearSystem& system, const Vector& theta) {
  check_theta(system, theta);
  return system.costs() - system.apply(theta);
}

Vector richardson_step(const PolicyLinearSystem& system, const Vector& theta, double nu) {
  if (!(nu > 0.0)) throw Error(ErrorKind::InvalidParameter, "Richardson nu must be positive");
  return richardson_update(theta, residual(system, theta), nu);
}

Vector jacobi_step(const PolicyLinearSystem& system, const Vector& theta) {
  return jacobi_update(system, theta, residual(system, theta));
}

Vector sor_sweep(const PolicyLinearSystem& system, const Vector& theta, double omega) {
  if (!(omega > 0.0 && omega < 2.0)) throw Error(ErrorKind::InvalidParameter, "SOR omega must lie in (0,2)");
  check_theta(system, theta);
  const SparseMatrix& p = system.transition();
  const Vector& g = system.costs();
  const Vector& diag = system.diagonal();
  const double gamma = system.gamma();
  Vector x = theta;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double acc = 0.0;
    for (SparseMatrix::InnerIterator it(p, i); it; ++it) acc += it.value() * x[it.col()];
    const double phi_i = g[i] - x[i] + gamma * acc;
    x[i] += omega * phi_i / diag[i];
  }
  return x;
}

Vector gauss_seidel_sweep(const PolicyLinearSystem& system, const Vector& theta) {
  return sor_sweep(system, theta, 1.0);
}

Vector steepest_descent_step(const PolicyLinearSystem& system, const Vector& theta) {
  return steepest_descent_update(system, theta, residual(system, theta));
}

Vector minres_step(const PolicyLinearSystem& system, const Vector& theta) {
  return minres_update(system, theta, residual(system, theta));
}

InnerResult gmres(const PolicyLinearSystem& system, const Vector& theta0, const StoppingRule& rule,
                  std::optional<int> restart) {
  if (restart && *restart < 1) throw Error(ErrorKind::InvalidParameter, "GMRES restart must be a positive integer");
  const Eigen::Index n = system.size();
  InnerResult result{theta0, {}};
  InnerTrace& trace = result.trace;
  Vector& theta = result.solution;

  Vector phi = residual(system, theta);
  record(trace, phi);
  if (rule.accepts(trace.residual_inf_history.back())) {
    trace.converged = true;
    return result;
  }

  const int cap = rule.max_inner_iters();
  while (trace.iterations_used < cap) {
    const double beta = phi.norm();
    if (beta == 0.0) break;
    const int remaining = cap - trace.iterations_used;
    const int cycle = static_cast<int>(std::min<Eigen::Index>(restart ? std::min(*restart, remaining) : remaining, n));

    std::vector<Vector> basis;
    basis.reserve(static_cast<std::size_t>(cycle) + 1);
    basis.push_back(phi / beta);
    DenseMatrix r = DenseMatrix::Zero(cycle + 1, cycle);  // Hessenberg, triangularized in place
    Vector g = Vector::Zero(cycle + 1);
    g[0] = beta;
    std::vector<Givens> rotations(static_cast<std::size_t>(cycle));

    bool end_cycle = false;
    for (int j = 0; j < cycle && !end_cycle; ++j) {
      Vector w = system.apply(basis[static_cast<std::size_t>(j)]);
      const double norm_before = w.norm();
      for (int i = 0; i <= j; ++i) {
        const double h = basis[static_cast<std::size_t>(i)].dot(w);
        r(i, j) = h;
        w.noalias() -= h * basis[static_cast<std::size_t>(i)];
      }
      if (w.norm() < 0.7 * norm_before) {
        for (int i = 0; i <= j; ++i) {
          const double h = basis[static_cast<std::size_t>(i)].dot(w);
          r(i, j) += h;
          w.noalias() -= h * basis[static_cast<std::size_t>(i)];
        }
      }
      const double subdiag = w.norm();
      r(j + 1, j) = subdiag;
      const bool breakdown = subdiag < kHappyBreakdown;
      if (!breakdown) basis.push_back(w / subdiag);

      for (int i = 0; i < j; ++i) {
        const auto& rot = rotations[static_cast<std::size_t>(i)];
        const double x = r(i, j);
        const double y = r(i + 1, j);
        r(i, j) = rot.c * x + rot.s * y;
        r(i + 1, j) = -rot.s * x + rot.c * y;
      }
      const double den = std::hypot(r(j, j), r(j + 1, j));
      auto& rot = rotations[static_cast<std::size_t>(j)];
      rot = den == 0.0 ? Givens{} : Givens{r(j, j) / den, r(j + 1, j) / den};
      r(j, j) = den;
      r(j + 1, j) = 0.0;
      g[j + 1] = -rot.s * g[j];
      g[j] = rot.c * g[j];
      ++trace.iterations_used;

      const Vector y = r.topLeftCorner(j + 1, j + 1).triangularView<Eigen::Upper>().solve(g.head(j + 1));
      Vector candidate = theta;
      for (int i = 0; i <= j; ++i) candidate.noalias() += y[i] * basis[static_cast<std::size_t>(i)];
      Vector candidate_phi = residual(system, candidate);
      record(trace, candidate_phi);

      const bool accepted = rule.accepts(trace.residual_inf_history.back());
      if (accepted || breakdown || j + 1 == cycle || trace.iterations_used == cap) {
        theta = std::move(candidate);
        phi = std::move(candidate_phi);
        if (accepted) {
          trace.converged = true;
          return result;
        }
        end_cycle = true;
      }
    }
  }
  trace.converged = rule.accepts(trace.residual_inf_history.back());
  return result;
}

InnerResult solve_to_tolerance(const PolicyLinearSystem& system, const Vector& theta0,
                               const InnerMethod& method, const StoppingRule& rule) {
  validate(method);
  if (const auto* g = std::get_if<inner::Gmres>(&method)) return gmres(system, theta0, rule, g->restart);

  InnerResult result{theta0, {}};
  Vector& theta = result.solution;
  InnerTrace& trace = result.trace;
  Vector phi = residual(system, theta);
  record(trace, phi);

  while (!rule.accepts(trace.residual_inf_history.back()) && trace.iterations_used < rule.max_inner_iters()) {
    theta = std::visit(
        [&](const auto& m) -> Vector {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, inner::Richardson>) {
            return richardson_update(theta, phi, m.nu);
          } else if constexpr (std::is_same_v<M, inner::Jacobi>) {
            return jacobi_update(system, theta, phi);
          } else if constexpr (std::is_same_v<M, inner::GaussSeidel>) {
            return sor_sweep(system, theta, 1.0);
          } else if constexpr (std::is_same_v<M, inner::Sor>) {
            return sor_sweep(system, theta, m.omega);
          } else if constexpr (std::is_same_v<M, inner::SteepestDescent>) {
            return steepest_descent_update(system, theta, phi);
          } else if constexpr (std::is_same_v<M, inner::MinRes>) {
            return minres_update(system, theta, phi);
          } else {
            return theta;  // Gmres handled above
          }
        },
        method);
    phi = residual(system, theta);
    record(trace, phi);
    ++trace.iterations_used;
  }
  trace.converged = rule.accepts(trace.residual_inf_history.back());
  return result;
}

}  // namespace ipi

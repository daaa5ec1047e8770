#include "ipi/structure.hpp"

#include "ipi/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <queue>
#include <random>
#include <vector>

namespace ipi {
namespace {

using Adjacency = std::vector<std::vector<int>>;

Adjacency pattern_of(const SparseMatrix& p) {
  if (p.rows() != p.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix must be square");
  Adjacency adj(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index row = 0; row < p.outerSize(); ++row) {
    for (SparseMatrix::InnerIterator it(p, row); it; ++it) {
      if (it.value() < 0.0) throw Error(ErrorKind::NegativeEntry, "matrix has a negative entry");
      if (it.value() > 0.0) adj[static_cast<std::size_t>(row)].push_back(static_cast<int>(it.col()));
    }
  }
  return adj;
}

SparseMatrix to_sparse(const DenseMatrix& p) {
  if ((p.array() < 0.0).any()) throw Error(ErrorKind::NegativeEntry, "matrix has a negative entry");
  return p.sparseView();
}

// BFS levels from node 0; -1 marks unreachable nodes.
std::vector<int> bfs_levels(const Adjacency& adj) {
  std::vector<int> level(adj.size(), -1);
  if (adj.empty()) return level;
  std::queue<int> frontier;
  level[0] = 0;
  frontier.push(0);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
        frontier.push(v);
      }
    }
  }
  return level;
}

bool strongly_connected(const Adjacency& adj) {
  const auto reached = [](const std::vector<int>& level) {
    return std::all_of(level.begin(), level.end(), [](int l) { return l >= 0; });
  };
  if (!reached(bfs_levels(adj))) return false;
  Adjacency reverse(adj.size());
  for (std::size_t u = 0; u < adj.size(); ++u) {
    for (int v : adj[u]) reverse[static_cast<std::size_t>(v)].push_back(static_cast<int>(u));
  }
  return reached(bfs_levels(reverse));
}

// gcd over edges u -> v of level(u) + 1 - level(v); valid for strongly connected graphs.
int graph_period(const Adjacency& adj) {
  const auto level = bfs_levels(adj);
  int period = 0;
  for (std::size_t u = 0; u < adj.size(); ++u) {
    for (int v : adj[u]) period = std::gcd(period, std::abs(level[u] + 1 - level[static_cast<std::size_t>(v)]));
  }
  return period;
}

MatrixClassification classify_pattern(const Adjacency& adj) {
  MatrixClassification c;
  c.irreducible = strongly_connected(adj);
  if (c.irreducible) {
    c.period = graph_period(adj);
    c.primitive = c.period == 1;
  }
  return c;
}

}  // namespace

std::string to_string(MdpVerdict verdict) {
  switch (verdict) {
    case MdpVerdict::General: return "General";
    case MdpVerdict::Ergodic: return "Ergodic";
    case MdpVerdict::Regular: return "Regular";
    case MdpVerdict::Unknown: return "Unknown";
  }
  return "Unknown";
}

bool is_irreducible(const SparseMatrix& p) { return strongly_connected(pattern_of(p)); }

bool is_irreducible(const DenseMatrix& p) { return is_irreducible(to_sparse(p)); }

MatrixClassification classify_matrix(const SparseMatrix& p) { return classify_pattern(pattern_of(p)); }

MatrixClassification period_and_primitivity(const SparseMatrix& p) {
  auto c = classify_matrix(p);
  if (!c.irreducible) throw Error(ErrorKind::NotIrreducible, "period is defined for irreducible matrices only");
  return c;
}

MatrixClassification period_and_primitivity(const DenseMatrix& p) { return period_and_primitivity(to_sparse(p)); }

MdpClass classify_mdp(const MdpModel& model, std::uint64_t policy_enumeration_cap) {
  if (policy_enumeration_cap < 1) throw Error(ErrorKind::InvalidParameter, "enumeration cap must be >= 1");
  const int n = model.num_states();
  const int m = model.num_actions();

  // Successor lists per (action, state), reused for every policy.
  std::vector<Adjacency> rows;
  rows.reserve(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) rows.push_back(pattern_of(model.transition(a)));

  MdpClass result;
  bool all_primitive = true;
  std::vector<int> actions(static_cast<std::size_t>(n), 0);
  Adjacency adj(static_cast<std::size_t>(n));
  for (;;) {
    if (result.policies_checked == policy_enumeration_cap) {
      result.verdict = MdpVerdict::Unknown;
      return result;
    }
    for (int s = 0; s < n; ++s) {
      adj[static_cast<std::size_t>(s)] =
          rows[static_cast<std::size_t>(actions[static_cast<std::size_t>(s)])][static_cast<std::size_t>(s)];
    }
    const auto c = classify_pattern(adj);
    ++result.policies_checked;
    if (!c.irreducible) {
      result.verdict = MdpVerdict::General;
      return result;
    }
    all_primitive = all_primitive && c.primitive;

    int pos = 0;
    while (pos < n && ++actions[static_cast<std::size_t>(pos)] == m) actions[static_cast<std::size_t>(pos++)] = 0;
    if (pos == n) break;
  }
  result.verdict = all_primitive ? MdpVerdict::Regular : MdpVerdict::Ergodic;
  return result;
}

double richardson_nu_interval(const DenseMatrix& p, double gamma) {
  if (p.rows() != p.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix must be square");
  Eigen::EigenSolver<DenseMatrix> solver(p, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::EigensolveFailure, "eigenvalues of P did not converge");

  const double g2 = gamma * gamma;
  double nu_lower = -std::numeric_limits<double>::infinity();
  for (const auto& lambda : solver.eigenvalues()) {
    const double shifted = 1.0 - gamma * lambda.real();
    const double disc = std::max(0.0, (g2 - 1.0) * lambda.imag() * lambda.imag() + shifted * shifted);
    nu_lower = std::max(nu_lower, (shifted - gamma * std::sqrt(disc)) / (1.0 - g2));
  }
  return nu_lower;
}

double richardson_spectral_radius(const DenseMatrix& p, double gamma, double nu) {
  if (p.rows() != p.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix must be square");
  DenseMatrix iteration = gamma / nu * p;
  iteration.diagonal().array() += 1.0 - 1.0 / nu;
  Eigen::EigenSolver<DenseMatrix> solver(iteration, false);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::EigensolveFailure, "eigenvalues did not converge");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

SymmetricPartAnalysis symmetric_part_analysis(const DenseMatrix& p, double gamma) {
  if (p.rows() != p.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix must be square");
  const DenseMatrix sym = 0.5 * (p + p.transpose());

  Eigen::SelfAdjointEigenSolver<DenseMatrix> sym_solver(sym, Eigen::EigenvaluesOnly);
  DenseMatrix h = -gamma * sym;
  h.diagonal().array() += 1.0;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> h_solver(h, Eigen::EigenvaluesOnly);
  if (sym_solver.info() != Eigen::Success || h_solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigensolveFailure, "symmetric eigensolve did not converge");
  }

  SymmetricPartAnalysis out;
  out.lambda_min_h = h_solver.eigenvalues().minCoeff();
  out.positive_definite = out.lambda_min_h > 0.0;
  out.gamma_threshold = 1.0 / sym_solver.eigenvalues().maxCoeff();
  return out;
}

int minimal_polynomial_degree(const DenseMatrix& a, int trials, std::uint64_t seed) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix must be square");
  const Eigen::Index n = a.rows();
  if (n > kMinimalPolynomialMaxSize) throw Error(ErrorKind::TooLarge, "minimal polynomial oracle limited to n <= 64");
  if (n == 0) return 0;
  constexpr double kRankTolerance = 1e-10;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  int degree = 0;
  for (int t = 0; t < std::max(1, trials); ++t) {
    DenseMatrix krylov(n, n + 1);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    krylov.col(0) = v.normalized();
    int k = static_cast<int>(n);
    for (Eigen::Index j = 1; j <= n; ++j) {
      const Vector next = a * krylov.col(j - 1);
      const double norm = next.norm();
      if (norm == 0.0) {  // A^j v = 0: dependent already
        k = static_cast<int>(j);
        break;
      }
      krylov.col(j) = next / norm;
      Eigen::JacobiSVD<DenseMatrix> svd(krylov.leftCols(j + 1));
      const auto& sigma = svd.singularValues();
      if (sigma[j] <= kRankTolerance * sigma[0]) {
        k = static_cast<int>(j);
        break;
      }
    }
    degree = std::max(degree, k);
  }
  return degree;
}

}  // namespace ipi

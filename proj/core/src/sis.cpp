#include "ipi/sis.hpp"

#include "ipi/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace ipi::sis {
namespace {

void check_indices(int susceptible, int action, const SisParams& params) {
  if (susceptible < 0 || susceptible > params.population || action < 0 || action >= kNumActions) {
    std::ostringstream msg;
    msg << "SIS state " << susceptible << " / action " << action << " outside [0," << params.population
        << "] x [0," << kNumActions << ")";
    throw Error(ErrorKind::IndexOutOfRange, msg.str());
  }
}

// log of C(s,i) q^i (1-q)^(s-i), for 0 < q < 1.
double log_binomial_pmf(int s, int i, double log_q, double log_1mq) {
  return std::lgamma(s + 1.0) - std::lgamma(i + 1.0) - std::lgamma(s - i + 1.0) + i * log_q + (s - i) * log_1mq;
}

}  // namespace

SisParams SisParams::defaults(int population, double gamma) {
  SisParams p;
  p.population = population;
  p.gamma = gamma;
  for (int a1 = 0; a1 < kHygieneLevels; ++a1) {
    for (int a2 = 0; a2 < kDistancingLevels; ++a2) {
      const auto a = static_cast<std::size_t>(action_index(a1, a2));
      p.financial_cost[a] = 0.1 * a1 + 0.2 * a2;
      p.quality_of_life[a] = std::clamp(1.0 - (a1 / 4.0 + a2 / 3.0) / 2.0, 0.0, 1.0);
      p.contact_rate[a] = 5.0 * (1.0 - 0.2 * a2);
      p.infection_prob[a] = 0.2 * (1.0 - 0.2 * a1);
    }
  }
  return p;
}

void SisParams::validate() const {
  const auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidParameter, "SIS: " + what); };
  if (population < 1) fail("population must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::GammaOutOfRange, "SIS: gamma must lie in (0,1)");
  if (!(w_financial >= 0.0 && w_quality >= 0.0 && w_health >= 0.0)) fail("weights must be non-negative");
  if (!std::isfinite(cost_per_case)) fail("cost per case must be finite");
  for (int a = 0; a < kNumActions; ++a) {
    const auto i = static_cast<std::size_t>(a);
    if (!std::isfinite(financial_cost[i])) fail("financial cost must be finite");
    if (!(quality_of_life[i] >= 0.0 && quality_of_life[i] <= 1.0)) fail("quality of life must lie in [0,1]");
    if (!(contact_rate[i] > 0.0) || !std::isfinite(contact_rate[i])) fail("contact rate must be positive");
    if (!(infection_prob[i] >= 0.0 && infection_prob[i] <= 1.0)) fail("infection probability must lie in [0,1]");
  }
}

double infection_probability(int susceptible, int action, const SisParams& params) {
  check_indices(susceptible, action, params);
  const auto a = static_cast<std::size_t>(action);
  const double beta = static_cast<double>(params.population - susceptible) / params.population;
  return -std::expm1(-params.contact_rate[a] * beta * params.infection_prob[a]);
}

std::vector<std::pair<int, double>> transition_row(int susceptible, int action, const SisParams& params) {
  const double q = infection_probability(susceptible, action, params);
  const int n_pop = params.population;
  const int s = susceptible;
  if (q <= 0.0 || s == 0) return {{n_pop, 1.0}};
  if (q >= 1.0) return {{n_pop - s, 1.0}};

  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double log_floor = std::log(kPruneThreshold);
  const int mode = std::clamp(static_cast<int>(std::floor((s + 1) * q)), 0, s);

  // The pmf is unimodal, so walking outwards from the mode until the mass
  // drops below the threshold visits exactly the entries that survive pruning.
  std::vector<std::pair<int, double>> row;  // (new infections, mass)
  for (int i = mode; i >= 0; --i) {
    const double lp = log_binomial_pmf(s, i, log_q, log_1mq);
    if (lp < log_floor) break;
    row.emplace_back(i, std::exp(lp));
  }
  std::reverse(row.begin(), row.end());
  for (int i = mode + 1; i <= s; ++i) {
    const double lp = log_binomial_pmf(s, i, log_q, log_1mq);
    if (lp < log_floor) break;
    row.emplace_back(i, std::exp(lp));
  }

  double total = 0.0;
  for (const auto& [i, mass] : row) total += mass;
  std::vector<std::pair<int, double>> out;
  out.reserve(row.size());
  // Ascending next state = descending infections.
  for (auto it = row.rbegin(); it != row.rend(); ++it) out.emplace_back(n_pop - it->first, it->second / total);
  return out;
}

double stage_cost(int susceptible, int action, const SisParams& params) {
  check_indices(susceptible, action, params);
  const auto a = static_cast<std::size_t>(action);
  return params.w_financial * params.financial_cost[a] - params.w_quality * params.quality_of_life[a] +
         params.w_health * params.cost_per_case * (params.population - susceptible);
}

MdpModel build_sis_mdp(const SisParams& params, unsigned workers) {
  params.validate();
  const int n = params.population + 1;
  workers = std::clamp<unsigned>(workers, 1U, static_cast<unsigned>(n));

  std::vector<SparseMatrix> matrices;
  matrices.reserve(kNumActions);
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(n));
  for (int a = 0; a < kNumActions; ++a) {
    const auto fill = [&](int begin, int end) {
      for (int s = begin; s < end; ++s) rows[static_cast<std::size_t>(s)] = transition_row(s, a, params);
    };
    if (workers == 1) {
      fill(0, n);
    } else {
      std::vector<std::jthread> pool;
      const int chunk = (n + static_cast<int>(workers) - 1) / static_cast<int>(workers);
      for (int begin = 0; begin < n; begin += chunk) pool.emplace_back(fill, begin, std::min(n, begin + chunk));
    }

    Eigen::Index nnz = 0;
    for (const auto& row : rows) nnz += static_cast<Eigen::Index>(row.size());
    SparseMatrix p(n, n);
    p.reserve(nnz);
    for (int s = 0; s < n; ++s) {
      p.startVec(s);
      for (const auto& [next, prob] : rows[static_cast<std::size_t>(s)]) p.insertBack(s, next) = prob;
    }
    p.finalize();
    matrices.push_back(std::move(p));
  }

  DenseMatrix costs(n, kNumActions);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < kNumActions; ++a) costs(s, a) = stage_cost(s, a, params);
  }
  return MdpModel::from_matrices(params.gamma, std::move(matrices), std::move(costs));
}

}  // namespace ipi::sis

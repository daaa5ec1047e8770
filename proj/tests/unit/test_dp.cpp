#include "fixtures.hpp"

#include "ipi/dp.hpp"
#include "ipi/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

namespace ipi {
namespace {

using test::e1;
using test::identity_chain;
using test::inf_norm;
using test::random_model;
using test::random_vector;

OuterConfig config_with(double tol, bool record = false) {
  OuterConfig c;
  c.tol = tol;
  c.time_budget_s = std::nullopt;
  c.record_iterates = record;
  return c;
}

void expect_history_shape(const SolveReport& r) {
  const auto len = static_cast<std::size_t>(r.outer_iters) + 1;
  EXPECT_EQ(r.residual_history.size(), len) << r.solver;
  EXPECT_EQ(r.inner_iters_history.size(), len) << r.solver;
  EXPECT_EQ(r.time_history.size(), len) << r.solver;
  if (!r.error_history.empty()) {
    EXPECT_EQ(r.error_history.size(), len) << r.solver;
  }
  if (!r.iterates.empty()) {
    EXPECT_EQ(r.iterates.size(), len) << r.solver;
  }
}

TEST(OuterConfig, Validation) {
  OuterConfig c;
  EXPECT_NO_THROW(c.validate());
  c.tol = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = OuterConfig{};
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = OuterConfig{};
  c.opi_w = 0;
  EXPECT_THROW(c.validate(), Error);
  c = OuterConfig{};
  c.inner_method = inner::Sor{2.5};
  EXPECT_THROW(c.validate(), Error);
}

TEST(BruteForce, E1) {
  const auto opt = brute_force_optimal(e1());
  EXPECT_NEAR(opt.value[0], 0.0, 1e-12);
  EXPECT_NEAR(opt.value[1], 1.0, 1e-12);
  EXPECT_EQ(opt.policy, Policy({0, 1}));
}

TEST(BruteForce, SingleActionModel) {
  const auto opt = brute_force_optimal(identity_chain());
  EXPECT_NEAR(opt.value[0], 2.0, 1e-12);
  EXPECT_NEAR(opt.value[1], 4.0, 1e-12);
}

TEST(BruteForce, RandomOptimumIsBellmanFixedPoint) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto model = random_model(4, 3, 0.9, seed, 0.5);
    EXPECT_LE(inf_norm(bellman_residual(model, brute_force_optimal(model).value)), 1e-9);
  }
}

TEST(BruteForce, RejectsHugePolicySpaces) {
  const auto model = random_model(21, 2, 0.5, 1, 0.2);  // 2^21 > 1e6
  try {
    (void)brute_force_optimal(model);
    FAIL() << "expected TooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooLarge);
  }
}

TEST(ValueIteration, FixedPointStartStopsAfterOneCheck) {
  const auto report = value_iteration(identity_chain(), (Vector(2) << 2, 4).finished(), config_with(1e-12));
  EXPECT_EQ(report.terminated_by, Termination::Tolerance);
  EXPECT_EQ(report.outer_iters, 1);
  EXPECT_NEAR(report.final_value[0], 2.0, 1e-15);
  EXPECT_NEAR(report.final_value[1], 4.0, 1e-15);
  expect_history_shape(report);
}

TEST(ValueIteration, E1ConvergesToOptimum) {
  const auto report = value_iteration(e1(), Vector::Zero(2), config_with(1e-12));
  EXPECT_EQ(report.terminated_by, Termination::Tolerance);
  EXPECT_NEAR(report.final_value[0], 0.0, 1e-11);
  EXPECT_NEAR(report.final_value[1], 1.0, 1e-11);
  EXPECT_EQ(report.final_policy, Policy({0, 1}));
  expect_history_shape(report);
}

TEST(ValueIteration, ErrorContractsByGamma) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto model = random_model(6, 3, 0.9, seed, 0.5);
    auto config = config_with(1e-10);
    config.reference = brute_force_optimal(model).value;
    const auto report = value_iteration(model, random_vector(6, seed, 5.0), config);
    const auto& e = report.error_history;
    for (std::size_t k = 0; k + 1 < e.size(); ++k) EXPECT_LE(e[k + 1], 0.9 * e[k] + 1e-10) << k;
  }
}

TEST(ValueIteration, CapsAreReported) {
  const auto model = random_model(30, 3, 0.99, 3);
  auto config = config_with(1e-14);
  config.max_outer_iters = 5;
  const auto capped = value_iteration(model, Vector::Zero(30), config);
  EXPECT_EQ(capped.terminated_by, Termination::MaxIters);
  EXPECT_EQ(capped.outer_iters, 5);
  expect_history_shape(capped);

  config.max_outer_iters = 1000000;
  config.time_budget_s = 1e-9;
  const auto timed = value_iteration(model, Vector::Zero(30), config);
  EXPECT_EQ(timed.terminated_by, Termination::TimeBudget);
  expect_history_shape(timed);
}

TEST(ValueIteration, FinalPolicyIsGreedy) {
  const auto model = random_model(20, 4, 0.8, 5);
  const auto report = value_iteration(model, Vector::Zero(20), config_with(1e-6));
  EXPECT_EQ(report.final_policy, greedy_policy(model, report.final_value));
}

TEST(PolicyIteration, E1FromAnyStart) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto report = policy_iteration(e1(), random_vector(2, seed, 10.0), config_with(1e-12));
    EXPECT_EQ(report.terminated_by, Termination::Tolerance);
    EXPECT_LE(report.outer_iters, 3) << seed;
    EXPECT_NEAR(report.final_value[0], 0.0, 1e-12);
    EXPECT_NEAR(report.final_value[1], 1.0, 1e-12);
    EXPECT_EQ(report.final_policy, Policy({0, 1}));
    expect_history_shape(report);
  }
}

TEST(PolicyIteration, IteratesNonIncreasingAfterFirstEvaluation) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto model = random_model(40, 5, 0.95, seed, 0.1);
    const auto report = policy_iteration(model, random_vector(40, seed, 50.0), config_with(1e-10, true));
    const auto& it = report.iterates;
    for (std::size_t k = 1; k + 1 < it.size(); ++k) {
      EXPECT_LE((it[k + 1] - it[k]).maxCoeff(), 1e-10) << "seed " << seed << " k " << k;
    }
  }
}

TEST(PolicyIteration, ErrorContractsByGamma) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto model = random_model(7, 3, 0.9, seed, 0.4);
    auto config = config_with(1e-12);
    config.reference = brute_force_optimal(model).value;
    const auto report = policy_iteration(model, random_vector(7, seed, 5.0), config);
    const auto& e = report.error_history;
    for (std::size_t k = 0; k + 1 < e.size(); ++k) EXPECT_LE(e[k + 1], 0.9 * e[k] + 1e-10) << k;
  }
}

TEST(OptimisticPi, UnitSweepReproducesValueIteration) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto model = random_model(30, 4, 0.9, seed, 0.3);
    const Vector v0 = random_vector(30, seed);
    const auto vi = value_iteration(model, v0, config_with(1e-8, true));
    auto config = config_with(1e-8, true);
    config.opi_w = 1;
    const auto opi = optimistic_pi(model, v0, config);
    ASSERT_EQ(vi.outer_iters, opi.outer_iters);
    for (std::size_t k = 0; k < vi.iterates.size(); ++k) {
      EXPECT_LE(inf_norm(vi.iterates[k] - opi.iterates[k]), 1e-12) << k;
    }
  }
}

TEST(OptimisticPi, LargeSweepCountApproachesPolicyIteration) {
  const Vector v0 = (Vector(2) << 3.0, -1.0).finished();
  auto config = config_with(1e-12, true);
  config.max_outer_iters = 1;
  config.opi_w = 1000000;
  const auto opi = optimistic_pi(e1(), v0, config);
  const auto pi = policy_iteration(e1(), v0, config);
  ASSERT_EQ(opi.iterates.size(), 2U);
  ASSERT_EQ(pi.iterates.size(), 2U);
  EXPECT_LE(inf_norm(opi.iterates[1] - pi.iterates[1]), 1e-12);
}

TEST(OptimisticPi, ContractsFromDominatingStart) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto model = random_model(6, 3, 0.8, seed, 0.5);
    const Vector v_star = brute_force_optimal(model).value;
    const Vector w = (v_star.array() + 2.0 + static_cast<double>(seed)).matrix();
    const Vector v0 = apply_T(model, w).value;
    ASSERT_LE((apply_T(model, v0).value - v0).maxCoeff(), 1e-12);

    auto config = config_with(1e-11);
    config.opi_w = 5;
    config.reference = v_star;
    const auto report = optimistic_pi(model, v0, config);
    const auto& e = report.error_history;
    for (std::size_t k = 0; k + 1 < e.size(); ++k) EXPECT_LE(e[k + 1], 0.8 * e[k] + 1e-12) << k;
  }
}

TEST(InexactPi, TinyAlphaMatchesPolicyIteration) {
  const Vector v0 = (Vector(2) << 5.0, 5.0).finished();
  auto config = config_with(1e-12, true);
  config.alpha = 1e-12;
  config.inner_method = inner::Gmres{};
  const auto ipi = inexact_pi(e1(), v0, config);
  const auto pi = policy_iteration(e1(), v0, config);
  const std::size_t common = std::min(ipi.iterates.size(), pi.iterates.size());
  ASSERT_GE(common, 2U);
  for (std::size_t k = 0; k < common; ++k) EXPECT_LE(inf_norm(ipi.iterates[k] - pi.iterates[k]), 1e-8) << k;
  EXPECT_NEAR(ipi.final_value[1], 1.0, 1e-10);
}

TEST(InexactPi, RichardsonInnerStepsBounded) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto model = random_model(50, 5, 0.9, seed, 0.2);
    auto config = config_with(1e-9);
    config.alpha = 0.1;
    config.inner_method = inner::Richardson{1.0};
    const auto report = inexact_pi(model, Vector::Zero(50), config);
    EXPECT_EQ(report.terminated_by, Termination::Tolerance);
    for (int k = 1; k <= report.outer_iters; ++k) {
      EXPECT_LE(report.inner_iters_history[static_cast<std::size_t>(k)], 22) << k;
    }
    expect_history_shape(report);
  }
}

TEST(InexactPi, LoggedInnerResidualSatisfiesForcingCondition) {
  const auto model = random_model(40, 4, 0.9, 4, 0.2);
  auto config = config_with(1e-9);
  config.alpha = 0.2;
  for (const InnerMethod& method : {InnerMethod{inner::Gmres{}}, InnerMethod{inner::MinRes{}},
                                    InnerMethod{inner::GaussSeidel{}}}) {
    config.inner_method = method;
    const auto report = inexact_pi(model, Vector::Zero(40), config);
    ASSERT_EQ(report.inner_residual_history.size(), static_cast<std::size_t>(report.outer_iters));
    for (std::size_t k = 0; k < report.inner_residual_history.size(); ++k) {
      if (report.inner_converged_history[k]) {
        EXPECT_LE(report.inner_residual_history[k], report.inner_threshold_history[k]);
      }
    }
  }
}

TEST(InexactPi, GlobalBoundForSmallGamma) {
  // (alpha + gamma)(1 + gamma) + gamma = 0.8 for gamma = 0.2, alpha = 0.3.
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto model = random_model(6, 3, 0.2, seed, 0.5);
    auto config = config_with(1e-12);
    config.alpha = 0.3;
    config.reference = brute_force_optimal(model).value;
    for (const InnerMethod& method : {InnerMethod{inner::Richardson{1.0}}, InnerMethod{inner::Gmres{}},
                                      InnerMethod{inner::SteepestDescent{}}}) {
      config.inner_method = method;
      const auto report = inexact_pi(model, random_vector(6, seed, 20.0), config);
      const auto& e = report.error_history;
      for (std::size_t k = 0; k + 1 < e.size(); ++k) {
        if (e[k] < 1e-12) break;
        EXPECT_LE(e[k + 1], 0.8 * e[k] + 1e-9) << name(method) << " k " << k;
      }
    }
  }
}

TEST(InexactPi, AlphaScheduleIsUsed) {
  const auto model = random_model(20, 3, 0.9, 2);
  auto config = config_with(1e-9);
  std::vector<int> seen;
  config.alpha_schedule = [&seen](int k) {
    seen.push_back(k);
    return 0.5 / (k + 1.0);
  };
  const auto report = inexact_pi(model, Vector::Zero(20), config);
  EXPECT_EQ(report.terminated_by, Termination::Tolerance);
  ASSERT_EQ(seen.size(), static_cast<std::size_t>(report.outer_iters));
  for (std::size_t k = 0; k < report.inner_threshold_history.size(); ++k) {
    EXPECT_NEAR(report.inner_threshold_history[k] / report.residual_history[k], 0.5 / (static_cast<double>(k) + 1.0),
                1e-6);
  }
}

TEST(OuterSolvers, AgreeOnOptimum) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto model = random_model(50, 4, 0.9, seed, 0.1);
    auto config = config_with(1e-9);
    const Vector zero = Vector::Zero(50);
    const auto pi = policy_iteration(model, zero, config);
    const auto vi = value_iteration(model, zero, config);
    config.opi_w = 10;
    const auto opi = optimistic_pi(model, zero, config);
    const auto ipi = inexact_pi(model, zero, config);
    for (const auto* r : {&vi, &opi, &ipi}) {
      EXPECT_LE(inf_norm(r->final_value - pi.final_value), 1e-6) << r->solver;
      EXPECT_EQ(r->terminated_by, Termination::Tolerance) << r->solver;
    }
  }
}

TEST(OuterSolvers, RerunsAreDeterministic) {
  const auto model = random_model(60, 5, 0.95, 8, 0.1);
  auto config = config_with(1e-9);
  config.inner_method = inner::MinRes{};
  const auto a = inexact_pi(model, Vector::Zero(60), config);
  const auto b = inexact_pi(model, Vector::Zero(60), config);
  EXPECT_EQ(a.outer_iters, b.outer_iters);
  EXPECT_EQ(a.inner_iters_history, b.inner_iters_history);
  EXPECT_EQ(a.residual_history, b.residual_history);
}

TEST(SolveReport, ResidualHistoryIsBellmanResidualOfIterates) {
  const auto model = random_model(15, 3, 0.9, 6);
  const auto report = inexact_pi(model, Vector::Zero(15), config_with(1e-9, true));
  for (std::size_t k = 0; k < report.iterates.size(); ++k) {
    EXPECT_NEAR(report.residual_history[k], inf_norm(bellman_residual(model, report.iterates[k])), 1e-14);
  }
  EXPECT_EQ(report.total_inner_iters(),
            std::accumulate(report.inner_iters_history.begin(), report.inner_iters_history.end(), 0LL));
  EXPECT_EQ(to_string(Termination::TimeBudget), "TimeBudget");
}

}  // namespace
}  // namespace ipi

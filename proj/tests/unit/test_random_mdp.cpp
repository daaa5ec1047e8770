#include "fixtures.hpp"

#include "ipi/error.hpp"
#include "ipi/io.hpp"
#include "ipi/random_mdp.hpp"
#include "ipi/structure.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace ipi {
namespace {

RandomMdpSpec spec_of(int n, int m, double density, std::uint64_t seed, bool regular = false) {
  RandomMdpSpec s;
  s.num_states = n;
  s.num_actions = m;
  s.gamma = 0.9;
  s.density = density;
  s.seed = seed;
  s.ensure_regular = regular;
  return s;
}

std::string binary_bytes(const MdpModel& model) {
  std::ostringstream out(std::ios::binary);
  io::write_mdp_binary(model, out);
  return out.str();
}

TEST(GenerateRandom, SameSeedSameBytes) {
  const auto spec = spec_of(30, 4, 0.3, 1234, true);
  EXPECT_EQ(binary_bytes(generate_random(spec)), binary_bytes(generate_random(spec)));
  EXPECT_EQ(io::mdp_to_json(generate_random(spec)), io::mdp_to_json(generate_random(spec)));
  auto other = spec;
  other.seed = 1235;
  EXPECT_NE(binary_bytes(generate_random(spec)), binary_bytes(generate_random(other)));
}

TEST(GenerateRandom, SuccessorCountFollowsDensity) {
  const auto model = generate_random(spec_of(50, 3, 0.1, 7));
  for (int a = 0; a < 3; ++a) {
    const auto& p = model.transition(a);
    for (Eigen::Index s = 0; s < p.outerSize(); ++s) {
      int count = 0;
      for (SparseMatrix::InnerIterator it(p, s); it; ++it) count += it.value() > 0.0 ? 1 : 0;
      EXPECT_EQ(count, 5);
    }
  }
}

TEST(GenerateRandom, CostsInUnitInterval) {
  const auto model = generate_random(spec_of(40, 5, 0.5, 3));
  EXPECT_GE(model.costs().minCoeff(), 0.0);
  EXPECT_LT(model.costs().maxCoeff(), 1.0);
}

TEST(GenerateRandom, FullDensityGivesPositiveMatrices) {
  const auto model = generate_random(spec_of(8, 3, 1.0, 5));
  for (int a = 0; a < 3; ++a) {
    const DenseMatrix p = test::dense(model.transition(a));
    EXPECT_GT(p.minCoeff(), 0.0);
    EXPECT_TRUE(classify_matrix(model.transition(a)).primitive);
  }
  EXPECT_EQ(classify_mdp(model).verdict, MdpVerdict::Regular);
}

TEST(GenerateRandom, EnsureRegularMakesEveryPolicyPrimitive) {
  for (int n = 2; n <= 8; ++n) {
    for (int m = 1; m <= 3; ++m) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto model = generate_random(spec_of(n, m, 1.0 / n, seed, true));
        const auto c = classify_mdp(model);
        EXPECT_EQ(c.verdict, MdpVerdict::Regular) << "n " << n << " m " << m << " seed " << seed;
      }
    }
  }
}

TEST(GenerateRandom, SparseWithoutRegularizationCanBeReducible) {
  int general = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    general += classify_mdp(generate_random(spec_of(8, 2, 0.125, seed))).verdict == MdpVerdict::General ? 1 : 0;
  }
  EXPECT_GT(general, 0);
}

TEST(GenerateRandom, InvalidSpecs) {
  const auto kind = [](const RandomMdpSpec& s) {
    try {
      (void)generate_random(s);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  EXPECT_EQ(kind(spec_of(0, 2, 1.0, 1)), ErrorKind::InvalidSpec);
  EXPECT_EQ(kind(spec_of(5, 0, 1.0, 1)), ErrorKind::InvalidSpec);
  EXPECT_EQ(kind(spec_of(5, 2, 0.0, 1)), ErrorKind::InvalidSpec);
  EXPECT_EQ(kind(spec_of(5, 2, 1.5, 1)), ErrorKind::InvalidSpec);
  EXPECT_EQ(kind(spec_of(10, 2, 0.01, 1)), ErrorKind::InvalidSpec);
  auto bad_gamma = spec_of(5, 2, 1.0, 1);
  bad_gamma.gamma = 1.0;
  EXPECT_EQ(kind(bad_gamma), ErrorKind::InvalidSpec);
}

TEST(RandomStochasticMatrix, RowsSumToOne) {
  const DenseMatrix p = random_stochastic_matrix(40, 8, 0.25);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LE(test::inf_norm((p.rowwise().sum().array() - 1.0).matrix()), 1e-12);
  EXPECT_EQ(p, random_stochastic_matrix(40, 8, 0.25));
}

}  // namespace
}  // namespace ipi

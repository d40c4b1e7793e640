#include <gtest/gtest.h>

#include <boost/math/special_functions/beta.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qrgd/harness.hpp"
#include "qrgd/initialization.hpp"
#include "qrgd/lattice_quantizer.hpp"

namespace qrgd {
namespace {

TEST(RandomInit, WorkedExample) {
  const InitResult init = random_init(4, 2.0, 0.1, 7);
  EXPECT_DOUBLE_EQ(init.ball_param, 0.05);
  EXPECT_DOUBLE_EQ(init.init_radius, std::acos(0.05));
  EXPECT_DOUBLE_EQ(init.suggested_eta, 0.025);
  EXPECT_LE(init.suggested_eta, std::cos(init.init_radius) / 2.0 * (1 + 1e-15));
  EXPECT_EQ(init.init_bits, 0);
  EXPECT_NEAR(init.point.coords().norm(), 1.0, 1e-12);
  EXPECT_EQ(init.point.coords(), random_init(4, 2.0, 0.1, 7).point.coords());
}

TEST(RandomInit, RejectsDegenerateInputs) {
  EXPECT_THROW(random_init(2, 1.0, 1.0, 0), std::invalid_argument);
  EXPECT_THROW(random_init(2, 1.0, 0.0, 0), std::invalid_argument);
  EXPECT_THROW(random_init(1, 1.0, 0.1, 0), std::invalid_argument);
  EXPECT_THROW(random_init(4, 0.0, 0.1, 0), std::invalid_argument);
}

TEST(RandomInit, LandsInTheCapOftenEnough) {
  constexpr int kTrials = 100000;
  const UnitVectord target = sample_uniform(16, std::uint64_t{99});
  int hits = 0;
  for (int i = 0; i < kTrials; ++i) {
    const InitResult init = random_init(16, 1.0, 0.1, static_cast<std::uint64_t>(i));
    if (std::abs(init.point.dot(target)) >= init.ball_param) ++hits;
  }
  EXPECT_GE(static_cast<double>(hits) / kTrials, 0.9);
}

TEST(IncompleteBeta, MatchesBoost) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = 0.5 + 200.0 * unit(rng);
    const double b = 0.1 + 5.0 * unit(rng);
    const double x = unit(rng);
    EXPECT_NEAR(regularized_incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-12);
  }
}

TEST(CapProbability, Examples) {
  EXPECT_EQ(cap_probability(5, 0.0), 1.0);
  EXPECT_EQ(cap_probability(5, 1.0), 0.0);
  // In three dimensions |x_1| is uniform on [0, 1].
  for (double a : {0.1, 0.5, 0.9}) EXPECT_NEAR(cap_probability(3, a), 1.0 - a, 1e-13);
  // In two dimensions the angle is uniform.
  EXPECT_NEAR(cap_probability(2, 0.5), 1.0 - 2.0 * std::asin(0.5) / (std::numbers::pi), 1e-13);
  EXPECT_THROW(cap_probability(3, 1.5), std::invalid_argument);
}

TEST(CapProbability, IsMonotoneAndMatchesSampling) {
  for (Eigen::Index d : {4, 16, 64}) {
    for (double a = 0.0; a < 0.99; a += 0.05) {
      EXPECT_GE(cap_probability(d, a), cap_probability(d, std::min(a + 0.05, 1.0)));
    }
    std::mt19937_64 rng(static_cast<std::uint64_t>(d));
    constexpr int kSamples = 100000;
    const double a = 0.5 / std::sqrt(static_cast<double>(d));
    int hits = 0;
    for (int i = 0; i < kSamples; ++i) {
      if (std::abs(sample_uniform(d, rng).coords()(0)) >= a) ++hits;
    }
    const double exact = cap_probability(d, a);
    const double se = std::sqrt(exact * (1 - exact) / kSamples);
    EXPECT_NEAR(static_cast<double>(hits) / kSamples, exact, 3 * se);
  }
}

TEST(WarmStart, SingleNodeUsesItsOwnEigenvector) {
  const SyntheticInstance inst = synth_instance(SyntheticSpec::with_gap(6, 500, 1.0, 0.5, 0.1, 3));
  const std::vector<Shard> shards{Shard::from_rows(inst.rows)};
  BitLedger ledger;
  const InitResult init = warm_start(shards, 0, 0.5, ledger);
  EXPECT_EQ(init.point.coords(), inst.spectrum.leading_vector.coords());
  EXPECT_DOUBLE_EQ(init.ball_param, 0.25);
  EXPECT_EQ(init.init_bits, 0);
  EXPECT_EQ(ledger.total(), 0);
}

TEST(WarmStart, IdenticalShardsRecoverTheMinimizer) {
  const SyntheticInstance inst = synth_instance(SyntheticSpec::with_gap(20, 2000, 2.0, 0.5, 0.1, 4));
  const std::vector<Shard> shards(4, Shard::from_rows(inst.rows));
  BitLedger ledger;
  const double lower = 0.5;
  const InitResult init = warm_start(shards, 0, lower, ledger);
  const double w = lower / (2.0 * (std::sqrt(2.0) + 2.0));
  const UnitVectord x_star = aligned_minimizer(reference_spectrum(assemble_global(shards)), init.point);
  EXPECT_NEAR(init.point.coords().norm(), 1.0, 1e-12);
  EXPECT_LE((init.point.coords() - x_star.coords()).norm(), 2 * w);
  EXPECT_GE(init.point.dot(x_star), 1.0 - 2 * w * w);
  EXPECT_EQ(init.init_bits, ledger.setup_bits());
  EXPECT_EQ(init.init_bits, 3 * bit_cost({2.0, w, 20}));
  EXPECT_LE(init.init_bits, 16 * 4 * 20);
}

TEST(WarmStart, NearIdenticalShardsStayAligned) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SyntheticInstance inst =
        synth_instance(SyntheticSpec::with_gap(20, 40000, 2.0, 0.5, 0.1, 100 + seed));
    const std::vector<Shard> shards = partition_rows(inst.rows, 4, seed);
    BitLedger ledger;
    const InitResult init = warm_start(shards, 0, 0.5, ledger);
    EXPECT_GE(init.point.dot(aligned_minimizer(inst.spectrum, init.point)), 0.25);
  }
}

TEST(WarmStart, RejectsDegenerateMaster) {
  const std::vector<Shard> shards{Shard(Eigen::MatrixXd::Identity(3, 3), 3),
                                  Shard(Eigen::MatrixXd::Identity(3, 3), 3)};
  BitLedger ledger;
  EXPECT_THROW(warm_start(shards, 0, 0.5, ledger), std::invalid_argument);
  EXPECT_THROW(warm_start(shards, 2, 0.5, ledger), std::invalid_argument);
}

}  // namespace
}  // namespace qrgd

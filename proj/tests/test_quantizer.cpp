#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include "qrgd/lattice_quantizer.hpp"

namespace qrgd {
namespace {

Eigen::VectorXd gaussian(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = normal(rng);
  return v;
}

// A point uniformly distributed in the ball of radius r around c.
Eigen::VectorXd in_ball(const Eigen::VectorXd& c, double r, std::mt19937_64& rng) {
  Eigen::VectorXd dir = gaussian(c.size(), rng);
  dir.normalize();
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return c + dir * (r * std::pow(u, 1.0 / static_cast<double>(c.size())));
}

// Expected payload length from first principles: residues modulo L, each
// group of g coordinates packed as one base-L integer of ceil(log2 L^g) bits,
// g the largest count with L^g < 2^128.
std::int64_t oracle_bits(std::uint64_t modulus, Eigen::Index dim) {
  const double per_digit = std::log2(static_cast<double>(modulus));
  const auto per_block = static_cast<Eigen::Index>(std::ceil(128.0 / per_digit)) - 1;
  std::int64_t bits = 0;
  for (Eigen::Index left = dim; left > 0; left -= per_block) {
    const Eigen::Index g = std::min(left, per_block);
    bits += static_cast<std::int64_t>(std::ceil(static_cast<double>(g) * per_digit));
  }
  return bits;
}

TEST(Quantizer, WorkedExample) {
  const QuantizerConfig cfg{16, 1, 4};
  const LatticeGeometry lattice = lattice_geometry(cfg);
  EXPECT_NEAR(lattice.cell, 1.0, 1e-11);
  EXPECT_EQ(lattice.modulus, 34U);
  // 34^4 - 1 = 1336335 needs 21 bits.
  EXPECT_EQ(bit_cost(cfg), 21);
  const EncodedMessage msg = encode(cfg, Eigen::Vector4d(0.2, -3.4, 7.6, 15.0));
  EXPECT_EQ(msg.bit_count, 21);
  EXPECT_EQ(msg.payload.size(), 3U);
}

TEST(Quantizer, ZeroEncodesToZeroResidues) {
  const QuantizerConfig cfg{5, 0.1, 6};
  for (auto r : residues(encode(cfg, Eigen::VectorXd::Zero(6)))) EXPECT_EQ(r, 0U);
}

TEST(Quantizer, RoundingRuleResidues) {
  const QuantizerConfig cfg{4, 0.5, 2};
  const LatticeGeometry lattice = lattice_geometry(cfg);
  const Eigen::Vector2d x(0.3 * lattice.cell, -0.7 * lattice.cell);
  const auto r = residues(encode(cfg, x));
  EXPECT_EQ(r[0], 0U);
  EXPECT_EQ(r[1], lattice.modulus - 1);
}

TEST(Quantizer, BitCostMatchesPayloadAndOracle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::Index dim = 1 + i % 70;
    const double ratio = std::pow(10.0, 0.01 + 6.0 * unit(rng));
    const QuantizerConfig cfg{ratio, 1.0, dim};
    const EncodedMessage msg = encode(cfg, gaussian(dim, rng));
    EXPECT_EQ(msg.bit_count, bit_cost(cfg));
    EXPECT_EQ(static_cast<std::int64_t>(msg.payload.size()), (msg.bit_count + 7) / 8);
    EXPECT_EQ(bit_cost(cfg), oracle_bits(lattice_geometry(cfg).modulus, dim));
    EXPECT_LE(static_cast<double>(bit_cost(cfg)), static_cast<double>(dim) * (std::log2(ratio) + 4.0));
  }
}

TEST(Quantizer, ContractHoldsOverTheInputBall) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index dim : {2, 8, 32, 128}) {
    for (int i = 0; i < 5000; ++i) {
      const double y = std::pow(10.0, -2.0 + 4.0 * unit(rng));
      const double w = y / std::pow(10.0, 0.005 + 5.0 * unit(rng));
      const QuantizerConfig cfg{y, w, dim};
      const Eigen::VectorXd x = gaussian(dim, rng) * y * 3.0;
      const Eigen::VectorXd ref = in_ball(x, y, rng);
      EXPECT_LE((decode(encode(cfg, x), ref) - x).norm(), w);
    }
  }
}

TEST(Quantizer, ExactOnLatticePointsAndWithPerfectReference) {
  std::mt19937_64 rng(3);
  const QuantizerConfig cfg{10, 0.2, 5};
  const double cell = lattice_geometry(cfg).cell;
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x = gaussian(5, rng) * 5.0;
    EXPECT_LE((decode(encode(cfg, x), x) - x).norm(), cfg.output_radius);
    x = (x / cell).array().round().matrix() * cell;
    EXPECT_EQ(decode(encode(cfg, x), in_ball(x, cfg.input_radius, rng)), x);
  }
}

TEST(Quantizer, DecodeIsIdenticalForEveryValidReference) {
  std::mt19937_64 rng(4);
  const QuantizerConfig cfg{3, 0.01, 16};
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd x = gaussian(16, rng);
    const EncodedMessage msg = encode(cfg, x);
    const Eigen::VectorXd first = decode(msg, in_ball(x, cfg.input_radius, rng));
    for (int k = 0; k < 10; ++k) EXPECT_EQ(decode(msg, in_ball(x, cfg.input_radius, rng)), first);
    // On the boundary of the input ball as well.
    Eigen::VectorXd dir = gaussian(16, rng);
    EXPECT_EQ(decode(msg, x + dir.normalized() * cfg.input_radius), first);
  }
}

TEST(Quantizer, EncodeIsDeterministic) {
  std::mt19937_64 rng(5);
  const QuantizerConfig cfg{2, 0.001, 40};
  const Eigen::VectorXd x = gaussian(40, rng);
  EXPECT_EQ(encode(cfg, x).payload, encode(cfg, x).payload);
}

TEST(Quantizer, BitCostGrowsWithTheRadiusRatio) {
  constexpr Eigen::Index kDim = 8;
  for (double ratio = 1.01; ratio < 1e6; ratio *= 1.37) {
    EXPECT_LE(bit_cost({ratio, 1.0, kDim}), bit_cost({ratio * 1.37, 1.0, kDim}));
  }
}

TEST(Quantizer, DoublingTheInputRadiusCostsOneBitPerCoordinate) {
  for (Eigen::Index dim : {1, 3, 8}) {
    for (double y : {7.0, 100.0, 3000.0}) {
      const QuantizerConfig base{y, 1.0, dim};
      const QuantizerConfig doubled{2 * y, 1.0, dim};
      const double ratio = static_cast<double>(lattice_geometry(doubled).modulus) /
                           static_cast<double>(lattice_geometry(base).modulus);
      const double expected = static_cast<double>(dim) * std::log2(ratio);
      EXPECT_NEAR(static_cast<double>(bit_cost(doubled) - bit_cost(base)), expected, 1.0);
      // The modulus carries a +2 offset, so the ratio approaches 2 only as y/w grows.
      if (y >= 100.0) EXPECT_NEAR(expected, static_cast<double>(dim), 0.02 * static_cast<double>(dim));
    }
  }
}

TEST(Quantizer, SmallRatioCostsFewBits) {
  const std::int64_t bits = bit_cost({1.01, 1.0, 4});
  EXPECT_GT(bits, 0);
  EXPECT_LE(bits, 4 * 2);
  EXPECT_THROW(bit_cost({1.0, 1.0, 4}), std::invalid_argument);
}

TEST(Quantizer, RejectsInvalidConfigs) {
  EXPECT_THROW(lattice_geometry({0, 1, 2}), std::invalid_argument);
  EXPECT_THROW(lattice_geometry({1, -1, 2}), std::invalid_argument);
  EXPECT_THROW(lattice_geometry({1, 0.5, 0}), std::invalid_argument);
  EXPECT_THROW(lattice_geometry({1e20, 1, 2}), std::invalid_argument);
  EXPECT_THROW(encode({2, 1, 3}, Eigen::Vector2d(0, 0)), std::invalid_argument);
}

TEST(Quantizer, BudgetConfigFitsItsBudget) {
  for (Eigen::Index dim : {1, 4, 50, 200}) {
    for (int b = 1; b <= 16; ++b) {
      const QuantizerConfig cfg = config_for_budget(3.5, dim, b);
      EXPECT_LE(encode(cfg, Eigen::VectorXd::Zero(dim)).bit_count, b * dim);
      EXPECT_EQ(lattice_geometry(cfg).modulus, std::uint64_t{1} << b);
    }
  }
  EXPECT_THROW(config_for_budget(1, 4, 0), std::invalid_argument);
  EXPECT_THROW(config_for_budget(1, 4, 53), std::invalid_argument);
}

TEST(QuantizeTangent, ZeroAndContract) {
  std::mt19937_64 rng(6);
  const UnitVectord p = sample_uniform(6, rng);
  const QuantizerConfig cfg{1.0, 0.05, 6};
  const auto zero = quantize_tangent(cfg, TangentVectord::zero(p), TangentVectord::zero(p));
  EXPECT_EQ(zero.decoded.norm(), 0.0);
  for (int i = 0; i < 2000; ++i) {
    const TangentVectord v = project_to_tangent(p, gaussian(6, rng));
    const TangentVectord ref = project_to_tangent(p, in_ball(v.coords(), cfg.input_radius, rng));
    const auto q = quantize_tangent(cfg, v, ref);
    EXPECT_LE((q.decoded.coords() - v.coords()).norm(), cfg.output_radius);
    EXPECT_LE(std::abs(p.coords().dot(q.decoded.coords())), 1e-10);
  }
}

TEST(QuantizeTangent, TenfoldFinerOutputCostsLog2TenPerCoordinate) {
  constexpr Eigen::Index kDim = 10;
  const std::int64_t coarse = bit_cost({50.0, 1.0, kDim});
  const std::int64_t fine = bit_cost({50.0, 0.1, kDim});
  EXPECT_NEAR(static_cast<double>(fine - coarse), kDim * std::log2(10.0), 2.0);
}

TEST(QuantizeTangent, RejectsMismatchedBases) {
  const auto e1 = UnitVectord::basis(3, 0);
  const auto e2 = UnitVectord::basis(3, 1);
  EXPECT_THROW(quantize_tangent({1, 0.1, 3}, TangentVectord::zero(e1), TangentVectord::zero(e2)),
               std::invalid_argument);
}

TEST(RawTransport, RoundTripsBitExactly) {
  std::mt19937_64 rng(7);
  Eigen::VectorXd x = gaussian(9, rng);
  x(0) = -0.0;
  x(1) = 1e-310;
  const EncodedMessage msg = encode_raw(x);
  EXPECT_EQ(msg.bit_count, 9 * 64);
  const Eigen::VectorXd back = decode_raw(msg);
  for (Eigen::Index i = 0; i < 9; ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back(i)), std::bit_cast<std::uint64_t>(x(i)));
  }
}

}  // namespace
}  // namespace qrgd

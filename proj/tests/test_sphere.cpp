#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qrgd/sphere.hpp"

namespace qrgd {
namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd gaussian(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = normal(rng);
  return v;
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// Integrates x'' = -|v|^2 x from (p, v) over unit time with classical RK4.
Eigen::VectorXd rk4_geodesic(const Eigen::VectorXd& p, const Eigen::VectorXd& v, int steps) {
  const double speed_sq = v.squaredNorm();
  Eigen::VectorXd x = p;
  Eigen::VectorXd u = v;
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    const Eigen::VectorXd k1x = u;
    const Eigen::VectorXd k1u = -speed_sq * x;
    const Eigen::VectorXd k2x = u + 0.5 * h * k1u;
    const Eigen::VectorXd k2u = -speed_sq * (x + 0.5 * h * k1x);
    const Eigen::VectorXd k3x = u + 0.5 * h * k2u;
    const Eigen::VectorXd k3u = -speed_sq * (x + 0.5 * h * k2x);
    const Eigen::VectorXd k4x = u + h * k3u;
    const Eigen::VectorXd k4u = -speed_sq * (x + h * k3x);
    x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
  }
  return x;
}

TEST(UnitVector, RenormalizesAndRejectsBadInput) {
  const UnitVectord p(vec({3, 4}));
  EXPECT_NEAR(p.coords().norm(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(p.coords()(0), 0.6);
  EXPECT_THROW(UnitVectord(vec({1})), std::invalid_argument);
  EXPECT_THROW(UnitVectord(vec({0, 0})), std::invalid_argument);
}

TEST(TangentVector, RejectsNonTangentCoords) {
  const auto e1 = UnitVectord::basis(3, 0);
  EXPECT_NO_THROW(TangentVectord(e1, vec({0, 1, 2})));
  EXPECT_THROW(TangentVectord(e1, vec({1e-6, 1, 0})), std::invalid_argument);
}

TEST(ProjectToTangent, Examples) {
  const auto e1 = UnitVectord::basis(2, 0);
  EXPECT_EQ(project_to_tangent(e1, vec({1, 0})).norm(), 0.0);
  EXPECT_TRUE(project_to_tangent(e1, vec({0, 1})).coords().isApprox(vec({0, 1})));
  const UnitVectord p(vec({1, 1}));
  const TangentVectord t = project_to_tangent(p, vec({1, 0}));
  EXPECT_NEAR(t.coords()(0), 0.5, 1e-15);
  EXPECT_NEAR(t.coords()(1), -0.5, 1e-15);
  EXPECT_NEAR(p.coords().dot(t.coords()), 0.0, 1e-15);
}

TEST(ExpMap, Examples) {
  const auto e1 = UnitVectord::basis(3, 0);
  EXPECT_TRUE(same_point(exp_map(e1, TangentVectord::zero(e1)), e1));
  const UnitVectord q = exp_map(e1, TangentVectord(e1, vec({0, kPi / 2, 0})));
  EXPECT_LT((q.coords() - vec({0, 1, 0})).norm(), 1e-15);
}

TEST(ExpMap, MatchesIntegratedGeodesic) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Index d = 2 + i % 6;
    const UnitVectord p = sample_uniform(d, rng);
    TangentVectord v = project_to_tangent(p, gaussian(d, rng));
    v = TangentVectord(p, v.coords() * (kPi * unit(rng) / v.norm()));
    const Eigen::VectorXd oracle = rk4_geodesic(p.coords(), v.coords(), 2000);
    EXPECT_LT((exp_map(p, v).coords() - oracle).norm(), 1e-8);
  }
}

TEST(LogMap, Examples) {
  const auto e1 = UnitVectord::basis(3, 0);
  const auto e2 = UnitVectord::basis(3, 1);
  EXPECT_EQ(log_map(e1, e1).norm(), 0.0);
  EXPECT_LT((log_map(e1, e2).coords() - vec({0, kPi / 2, 0})).norm(), 1e-15);
  EXPECT_THROW(log_map(e1, -e1), GeometryError);
}

TEST(LogMap, RoundTripsThroughExp) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Index d = 2 + i % 10;
    const UnitVectord p = sample_uniform(d, rng);
    const UnitVectord q = sample_uniform(d, rng);
    EXPECT_LT((exp_map(p, log_map(p, q)).coords() - q.coords()).norm(), 1e-10);
    EXPECT_NEAR(distance(p, q), log_map(p, q).norm(), 1e-10);
  }
}

TEST(LogMap, InvertsExpMap) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Index d = 2 + i % 10;
    const UnitVectord p = sample_uniform(d, rng);
    TangentVectord v = project_to_tangent(p, gaussian(d, rng));
    const double len = (kPi - 0.1) * (1e-8 + unit(rng));
    v = TangentVectord(p, v.coords() * (std::min(len, kPi - 0.1) / v.norm()));
    EXPECT_LT((log_map(p, exp_map(p, v)).coords() - v.coords()).norm(), 1e-9);
  }
}

TEST(Distance, Examples) {
  std::mt19937_64 rng(4);
  const UnitVectord p = sample_uniform(5, rng);
  EXPECT_EQ(distance(p, p), 0.0);
  EXPECT_DOUBLE_EQ(distance(UnitVectord::basis(3, 0), UnitVectord::basis(3, 1)), kPi / 2);
  EXPECT_DOUBLE_EQ(distance(p, -p), kPi);
}

TEST(Distance, AccurateForNearbyPoints) {
  const auto e1 = UnitVectord::basis(2, 0);
  const UnitVectord q = exp_map(e1, TangentVectord(e1, vec({0, 1e-9})));
  EXPECT_NEAR(distance(e1, q), 1e-9, 1e-22);
}

TEST(ParallelTransport, Examples) {
  const auto e1 = UnitVectord::basis(3, 0);
  const auto e2 = UnitVectord::basis(3, 1);
  const TangentVectord u(e1, vec({0, 1, 0}));
  EXPECT_TRUE(parallel_transport(e1, e1, u).coords().isApprox(u.coords()));
  const TangentVectord moved = parallel_transport(e1, e2, u);
  EXPECT_LT((moved.coords() - vec({-1, 0, 0})).norm(), 1e-15);
  // Directions orthogonal to the plane of motion are unchanged.
  const TangentVectord side(e1, vec({0, 0, 1}));
  EXPECT_LT((parallel_transport(e1, e2, side).coords() - side.coords()).norm(), 1e-15);
}

TEST(ParallelTransport, IsALinearIsometry) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Index d = 2 + i % 12;
    const UnitVectord p = sample_uniform(d, rng);
    const UnitVectord q = sample_uniform(d, rng);
    const TangentVectord u = project_to_tangent(p, gaussian(d, rng));
    const TangentVectord w = project_to_tangent(p, gaussian(d, rng));
    const TangentVectord tu = parallel_transport(p, q, u);
    const TangentVectord tw = parallel_transport(p, q, w);
    EXPECT_NEAR(tu.dot(tw), u.dot(w), 1e-10);
    EXPECT_NEAR(tu.norm(), u.norm(), 1e-10);
    EXPECT_LT(std::abs(q.coords().dot(tu.coords())), 1e-10);
    const TangentVectord sum(p, 2.0 * u.coords() - 3.0 * w.coords());
    EXPECT_LT((parallel_transport(p, q, sum).coords() - (2.0 * tu.coords() - 3.0 * tw.coords())).norm(),
              1e-10);
  }
}

TEST(ParallelTransport, RejectsWrongBase) {
  const auto e1 = UnitVectord::basis(3, 0);
  const auto e2 = UnitVectord::basis(3, 1);
  const TangentVectord at_e2(e2, vec({1, 0, 0}));
  EXPECT_THROW(parallel_transport(e1, e2, at_e2), std::invalid_argument);
}

TEST(TangentChordBound, Examples) {
  const auto e1 = UnitVectord::basis(3, 0);
  const auto e2 = UnitVectord::basis(3, 1);
  const auto e3 = UnitVectord::basis(3, 2);
  const auto [same_arc, same_chord] = tangent_chord_bound(e2, e2, e1);
  EXPECT_EQ(same_arc, 0.0);
  EXPECT_EQ(same_chord, 0.0);
  const auto [arc, chord] = tangent_chord_bound(e2, e3, e1);
  EXPECT_NEAR(arc, kPi / 2, 1e-15);
  EXPECT_NEAR(chord, kPi / std::sqrt(2.0), 1e-15);
}

TEST(TangentChordBound, HoldsInAHemisphere) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Index d = 2 + i % 8;
    const UnitVectord h = sample_uniform(d, rng);
    const auto side = [&](const UnitVectord& z) { return z.dot(h) >= 0 ? z : -z; };
    const UnitVectord a = side(sample_uniform(d, rng));
    const UnitVectord b = side(sample_uniform(d, rng));
    const UnitVectord c = side(sample_uniform(d, rng));
    const auto [arc, chord] = tangent_chord_bound(a, b, c);
    EXPECT_LE(arc, chord + 1e-12);
  }
}

TEST(SampleUniform, IsReproducible) {
  EXPECT_EQ(sample_uniform(7, std::uint64_t{42}).coords(), sample_uniform(7, std::uint64_t{42}).coords());
  EXPECT_NE(sample_uniform(7, std::uint64_t{42}).coords(), sample_uniform(7, std::uint64_t{43}).coords());
}

TEST(SampleUniform, MatchesSphereMoments) {
  std::mt19937_64 rng(7);
  constexpr int kSamples = 100000;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  double second = 0;
  for (int i = 0; i < kSamples; ++i) {
    const UnitVectord x = sample_uniform(3, rng);
    mean += x.coords();
    second += x.coords()(0) * x.coords()(0);
  }
  mean /= kSamples;
  second /= kSamples;
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 0.02);
  EXPECT_NEAR(second, 1.0 / 3.0, 0.02);
}

}  // namespace
}  // namespace qrgd

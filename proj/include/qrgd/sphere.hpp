#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace qrgd {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when a geometric operation is undefined for its inputs (e.g. the
/// logarithm between antipodal points).
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace tolerance {
/// Relative slack used when checking that a vector is tangent at a base.
inline constexpr double kTangency = 1e-10;
/// Bases closer than this are treated as the same point.
inline constexpr double kSameBase = 1e-12;
/// ||p + q|| below this makes p and q antipodal for log/transport.
inline constexpr double kAntipodal = 1e-10;
/// Step norms below this are treated as zero in exp and transport.
inline constexpr double kZeroStep = 1e-15;
}  // namespace tolerance

/// A point on the unit sphere S^{d-1}, d >= 2. Coordinates are renormalized
/// on construction.
template <typename Scalar>
class UnitVector {
 public:
  using VectorType = Vector<Scalar>;

  template <typename Derived>
  explicit UnitVector(const Eigen::MatrixBase<Derived>& coords) : coords_(coords) {
    if (coords_.size() < 2) {
      throw std::invalid_argument("UnitVector: dimension must be at least 2");
    }
    if (!coords_.allFinite()) {
      throw std::invalid_argument("UnitVector: non-finite coordinates");
    }
    const Scalar norm = coords_.norm();
    if (!(norm > Scalar(0))) {
      throw std::invalid_argument("UnitVector: zero vector cannot be normalized");
    }
    coords_ /= norm;
  }

  /// The i-th standard basis vector of R^d.
  static UnitVector basis(Eigen::Index d, Eigen::Index i) {
    if (i < 0 || i >= d) throw std::out_of_range("UnitVector::basis: index out of range");
    VectorType e = VectorType::Zero(d);
    e(i) = Scalar(1);
    return UnitVector(e);
  }

  const VectorType& coords() const { return coords_; }
  Eigen::Index dim() const { return coords_.size(); }
  Scalar dot(const UnitVector& other) const { return coords_.dot(other.coords_); }
  UnitVector operator-() const { return UnitVector(-coords_); }

 private:
  VectorType coords_;
};

/// A vector in the tangent space at `base`, i.e. orthogonal to it.
template <typename Scalar>
class TangentVector {
 public:
  using VectorType = Vector<Scalar>;

  template <typename Derived>
  TangentVector(UnitVector<Scalar> base, const Eigen::MatrixBase<Derived>& coords)
      : base_(std::move(base)), coords_(coords) {
    if (coords_.size() != base_.dim()) {
      throw std::invalid_argument("TangentVector: dimension mismatch with base");
    }
    if (!coords_.allFinite()) {
      throw std::invalid_argument("TangentVector: non-finite coordinates");
    }
    const Scalar slack = Scalar(tolerance::kTangency) * std::max(Scalar(1), coords_.norm());
    if (std::abs(base_.coords().dot(coords_)) > slack) {
      throw std::invalid_argument("TangentVector: coordinates are not tangent at base");
    }
  }

  static TangentVector zero(const UnitVector<Scalar>& base) {
    return TangentVector(base, VectorType::Zero(base.dim()));
  }

  const UnitVector<Scalar>& base() const { return base_; }
  const VectorType& coords() const { return coords_; }
  Scalar norm() const { return coords_.norm(); }
  Scalar dot(const TangentVector& other) const { return coords_.dot(other.coords_); }

 private:
  UnitVector<Scalar> base_;
  VectorType coords_;
};

template <typename Scalar>
bool same_point(const UnitVector<Scalar>& a, const UnitVector<Scalar>& b) {
  return (a.coords() - b.coords()).norm() <= Scalar(tolerance::kSameBase);
}

template <typename Scalar>
void require_same_base(const TangentVector<Scalar>& u, const UnitVector<Scalar>& p,
                       const char* where) {
  if (!same_point(u.base(), p)) {
    throw std::invalid_argument(std::string(where) + ": tangent vector is based elsewhere");
  }
}

/// Orthogonal projection (I - p p^T) w onto the tangent space at p.
template <typename Scalar, typename Derived>
TangentVector<Scalar> project_to_tangent(const UnitVector<Scalar>& p,
                                         const Eigen::MatrixBase<Derived>& w) {
  if (w.size() != p.dim()) {
    throw std::invalid_argument("project_to_tangent: dimension mismatch");
  }
  const auto& x = p.coords();
  Vector<Scalar> out = w - x.dot(w) * x;
  return TangentVector<Scalar>(p, out);
}

/// Geodesic distance. The half-angle form keeps full relative accuracy for
/// nearby points, where arccos of the inner product loses half the digits.
template <typename Scalar>
Scalar distance(const UnitVector<Scalar>& p, const UnitVector<Scalar>& q) {
  if (p.dim() != q.dim()) throw std::invalid_argument("distance: dimension mismatch");
  const Scalar chord = (p.coords() - q.coords()).norm();
  const Scalar cochord = (p.coords() + q.coords()).norm();
  return Scalar(2) * std::atan2(chord, cochord);
}

template <typename Scalar>
UnitVector<Scalar> exp_map(const UnitVector<Scalar>& p, const TangentVector<Scalar>& v) {
  require_same_base(v, p, "exp_map");
  const Scalar len = v.norm();
  if (len < Scalar(tolerance::kZeroStep)) return p;
  Vector<Scalar> out = std::cos(len) * p.coords() + (std::sin(len) / len) * v.coords();
  return UnitVector<Scalar>(out);
}

template <typename Scalar>
TangentVector<Scalar> log_map(const UnitVector<Scalar>& p, const UnitVector<Scalar>& q) {
  if (p.dim() != q.dim()) throw std::invalid_argument("log_map: dimension mismatch");
  if ((p.coords() + q.coords()).norm() < Scalar(tolerance::kAntipodal)) {
    throw GeometryError("log_map: points are antipodal, the logarithm is undefined");
  }
  // Projecting q - p (rather than q) keeps the direction accurate when q is near p.
  const Vector<Scalar> diff = q.coords() - p.coords();
  Vector<Scalar> dir = diff - p.coords().dot(diff) * p.coords();
  const Scalar len = dir.norm();
  if (len == Scalar(0)) return TangentVector<Scalar>::zero(p);
  dir *= distance(p, q) / len;
  return project_to_tangent(p, dir);
}

/// Transports u from T_from to T_to along the minimizing geodesic.
template <typename Scalar>
TangentVector<Scalar> parallel_transport(const UnitVector<Scalar>& from,
                                         const UnitVector<Scalar>& to,
                                         const TangentVector<Scalar>& u) {
  require_same_base(u, from, "parallel_transport");
  const TangentVector<Scalar> v = log_map(from, to);
  const Scalar angle = v.norm();
  if (angle < Scalar(tolerance::kZeroStep)) return TangentVector<Scalar>(to, u.coords());
  const Vector<Scalar> dir = v.coords() / angle;
  const Scalar along = dir.dot(u.coords());
  Vector<Scalar> out =
      u.coords() + along * ((std::cos(angle) - Scalar(1)) * dir - std::sin(angle) * from.coords());
  return TangentVector<Scalar>(to, out);
}

/// (dist(a, b), ||log_c a - log_c b||). The first never exceeds the second on
/// the sphere, which has positive curvature.
template <typename Scalar>
std::pair<Scalar, Scalar> tangent_chord_bound(const UnitVector<Scalar>& a,
                                              const UnitVector<Scalar>& b,
                                              const UnitVector<Scalar>& c) {
  const TangentVector<Scalar> la = log_map(c, a);
  const TangentVector<Scalar> lb = log_map(c, b);
  return {distance(a, b), (la.coords() - lb.coords()).norm()};
}

/// Uniform point on S^{d-1}, drawn from the caller's generator.
template <typename Scalar = double, typename Generator>
UnitVector<Scalar> sample_uniform(Eigen::Index d, Generator& rng) {
  if (d < 2) throw std::invalid_argument("sample_uniform: dimension must be at least 2");
  std::normal_distribution<Scalar> normal;
  Vector<Scalar> g(d);
  // A zero draw has probability zero; loop only to keep the contract total.
  do {
    for (Eigen::Index i = 0; i < d; ++i) g(i) = normal(rng);
  } while (g.squaredNorm() == Scalar(0));
  return UnitVector<Scalar>(g);
}

template <typename Scalar = double>
UnitVector<Scalar> sample_uniform(Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_uniform<Scalar>(d, rng);
}

using UnitVectord = UnitVector<double>;
using TangentVectord = TangentVector<double>;

}  // namespace qrgd

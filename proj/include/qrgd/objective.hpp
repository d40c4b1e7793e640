#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qrgd/sphere.hpp"

namespace qrgd {

namespace detail {

template <typename Scalar>
void require_symmetric(const Matrix<Scalar>& a, const char* where) {
  if (a.rows() != a.cols() || a.rows() < 2) {
    throw std::invalid_argument(std::string(where) + ": matrix must be square with d >= 2");
  }
  if (!a.allFinite()) throw std::invalid_argument(std::string(where) + ": non-finite entries");
  const Scalar scale = std::max(a.norm(), Scalar(1e-300));
  if ((a - a.transpose()).norm() > Scalar(1e-10) * scale) {
    throw std::invalid_argument(std::string(where) + ": matrix is not symmetric");
  }
}

}  // namespace detail

/// One node's local covariance A_i = M_i^T M_i together with its smoothness
/// constant 2 lambda_max(A_i).
template <typename Scalar>
class CovarianceShard {
 public:
  using MatrixType = Matrix<Scalar>;

  CovarianceShard(MatrixType matrix, Eigen::Index row_count)
      : matrix_(std::move(matrix)), row_count_(row_count) {
    detail::require_symmetric(matrix_, "CovarianceShard");
    if (row_count_ < 0) throw std::invalid_argument("CovarianceShard: negative row count");
    matrix_ = (matrix_ + matrix_.transpose()).eval() / Scalar(2);
    Eigen::SelfAdjointEigenSolver<MatrixType> solver(matrix_, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("CovarianceShard: eigenvalue computation failed");
    }
    const auto& ev = solver.eigenvalues();
    if (ev(0) < -Scalar(1e-10) * std::max(matrix_.norm(), Scalar(1))) {
      throw std::invalid_argument("CovarianceShard: matrix is not positive semidefinite");
    }
    local_smoothness_ = Scalar(2) * std::max(ev(ev.size() - 1), Scalar(0));
  }

  /// A_i = rows^T rows.
  template <typename Derived>
  static CovarianceShard from_rows(const Eigen::MatrixBase<Derived>& rows) {
    MatrixType gram = rows.transpose() * rows;
    return CovarianceShard(std::move(gram), rows.rows());
  }

  const MatrixType& matrix() const { return matrix_; }
  Eigen::Index row_count() const { return row_count_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  Scalar local_smoothness() const { return local_smoothness_; }

 private:
  MatrixType matrix_;
  Eigen::Index row_count_;
  Scalar local_smoothness_{};
};

template <typename Scalar>
struct Spectrum {
  Vector<Scalar> eigenvalues;  // descending
  Matrix<Scalar> eigenvectors;  // columns match eigenvalues
  UnitVector<Scalar> leading_vector;
  Scalar gap;
  Scalar smoothness;  // 2 lambda_1
};

template <typename Scalar>
Spectrum<Scalar> reference_spectrum(const Matrix<Scalar>& a) {
  detail::require_symmetric(a, "reference_spectrum");
  const Matrix<Scalar> sym = (a + a.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("reference_spectrum: eigensolver did not converge");
  }
  const Vector<Scalar> values = solver.eigenvalues().reverse();
  const Matrix<Scalar> vectors = solver.eigenvectors().rowwise().reverse();
  return Spectrum<Scalar>{values, vectors, UnitVector<Scalar>(vectors.col(0)),
                          values(0) - values(1), Scalar(2) * values(0)};
}

template <typename Scalar>
Spectrum<Scalar> reference_spectrum(const CovarianceShard<Scalar>& shard) {
  return reference_spectrum(shard.matrix());
}

template <typename Scalar>
CovarianceShard<Scalar> assemble_global(std::span<const CovarianceShard<Scalar>> shards) {
  if (shards.empty()) throw std::invalid_argument("assemble_global: no shards");
  Matrix<Scalar> sum = Matrix<Scalar>::Zero(shards[0].dim(), shards[0].dim());
  Eigen::Index rows = 0;
  for (const auto& s : shards) {
    if (s.dim() != sum.rows()) throw std::invalid_argument("assemble_global: dimension mismatch");
    sum += s.matrix();
    rows += s.row_count();
  }
  return CovarianceShard<Scalar>(std::move(sum), rows);
}

template <typename Scalar>
CovarianceShard<Scalar> assemble_global(const std::vector<CovarianceShard<Scalar>>& shards) {
  return assemble_global(std::span<const CovarianceShard<Scalar>>(shards));
}

/// n * max_i gamma_i. Dominates the true smoothness 2 lambda_1(sum A_i) and
/// guarantees gamma_i <= gamma / n for every shard.
template <typename Scalar>
Scalar over_approx_smoothness(std::span<const CovarianceShard<Scalar>> shards) {
  if (shards.empty()) throw std::invalid_argument("over_approx_smoothness: no shards");
  Scalar largest = 0;
  for (const auto& s : shards) largest = std::max(largest, s.local_smoothness());
  return Scalar(shards.size()) * largest;
}

template <typename Scalar>
Scalar over_approx_smoothness(const std::vector<CovarianceShard<Scalar>>& shards) {
  return over_approx_smoothness(std::span<const CovarianceShard<Scalar>>(shards));
}

/// f(x) = -x^T A x.
template <typename Scalar>
Scalar cost(const CovarianceShard<Scalar>& a, const UnitVector<Scalar>& x) {
  return -x.coords().dot(a.matrix() * x.coords());
}

/// Ambient gradient -2 A x.
template <typename Scalar>
Vector<Scalar> euclidean_grad(const CovarianceShard<Scalar>& a, const UnitVector<Scalar>& x) {
  return Scalar(-2) * (a.matrix() * x.coords());
}

template <typename Scalar>
TangentVector<Scalar> riemannian_grad(const CovarianceShard<Scalar>& a,
                                      const UnitVector<Scalar>& x) {
  return project_to_tangent(x, euclidean_grad(a, x));
}

/// The leading eigenvector with the sign that makes <x, x*> >= 0.
template <typename Scalar>
UnitVector<Scalar> aligned_minimizer(const Spectrum<Scalar>& spectrum,
                                     const UnitVector<Scalar>& x) {
  return x.dot(spectrum.leading_vector) >= Scalar(0) ? spectrum.leading_vector
                                                     : -spectrum.leading_vector;
}

/// Slack of each local convexity inequality at x, with x* the minimizer on
/// x's side and a = <x, x*>. Nonnegative slack means the inequality holds.
template <typename Scalar>
struct ConvexitySlacks {
  Scalar ball_param;              // a
  Scalar optimality_gap;          // f(x) - f*
  Scalar weak_quasi_convexity;    // <grad, -log> - 2a (f - f*)
  Scalar quadratic_growth;        // (f - f*) - (delta/4) dist^2
  Scalar gradient_dominance;      // ||grad||^2 - delta a^2 (f - f*)
  Scalar strong_weak_convexity;   // (1/a)<grad, -log> - (delta/4) dist^2 - (f - f*)

  Scalar min_slack() const {
    return std::min({weak_quasi_convexity, quadratic_growth, gradient_dominance,
                     strong_weak_convexity});
  }
};

template <typename Scalar>
ConvexitySlacks<Scalar> check_convexity_properties(const CovarianceShard<Scalar>& a,
                                                   const UnitVector<Scalar>& x,
                                                   const Spectrum<Scalar>& spectrum) {
  if (!(spectrum.gap > Scalar(0))) {
    throw std::invalid_argument("check_convexity_properties: eigengap must be positive");
  }
  const UnitVector<Scalar> x_star = aligned_minimizer(spectrum, x);
  const Scalar ball = x.dot(x_star);
  if (!(ball > Scalar(0))) {
    throw std::invalid_argument("check_convexity_properties: x is orthogonal to the minimizer");
  }
  const Scalar delta = spectrum.gap;
  const Scalar gap = cost(a, x) + spectrum.eigenvalues(0);
  const TangentVector<Scalar> grad = riemannian_grad(a, x);
  const Scalar pull = -grad.dot(log_map(x, x_star));
  const Scalar dist = distance(x, x_star);
  const Scalar growth = delta / Scalar(4) * dist * dist;
  return ConvexitySlacks<Scalar>{
      ball,
      gap,
      pull - Scalar(2) * ball * gap,
      gap - growth,
      grad.coords().squaredNorm() - delta * ball * ball * gap,
      pull / ball - growth - gap,
  };
}

template <typename Scalar>
ConvexitySlacks<Scalar> check_convexity_properties(const CovarianceShard<Scalar>& a,
                                                   const UnitVector<Scalar>& x) {
  return check_convexity_properties(a, x, reference_spectrum(a));
}

using Shard = CovarianceShard<double>;
using Spectrumd = Spectrum<double>;

}  // namespace qrgd

#include "qrgd/initialization.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qrgd/lattice_quantizer.hpp"

namespace qrgd {
namespace {

/// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw std::runtime_error("regularized_incomplete_beta: continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw std::invalid_argument("incomplete beta: a, b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast only on this side of the mean; use symmetry otherwise.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double cap_probability(Eigen::Index d, double a) {
  if (d < 2) throw std::invalid_argument("cap_probability: dimension must be at least 2");
  if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("cap_probability: a outside [0, 1]");
  if (a == 0.0) return 1.0;
  if (a == 1.0) return 0.0;
  return regularized_incomplete_beta((static_cast<double>(d) - 1.0) / 2.0, 0.5, 1.0 - a * a);
}

InitResult random_init(Eigen::Index d, double gamma, double p, std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("random_init: dimension must be at least 2");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("random_init: p must lie in (0, 1)");
  if (!(gamma > 0.0)) throw std::invalid_argument("random_init: gamma must be positive");
  const double ball = p / std::sqrt(static_cast<double>(d));
  if (!(ball < 1.0)) throw std::invalid_argument("random_init: p / sqrt(d) must be below 1");
  return InitResult{sample_uniform(d, seed), ball, std::acos(ball), ball / gamma, p, 0};
}

InitResult warm_start(std::span<const Shard> shards, int master_id, double quant_lower_bound,
                      BitLedger& ledger) {
  if (shards.empty()) throw std::invalid_argument("warm_start: no shards");
  if (master_id < 0 || static_cast<std::size_t>(master_id) >= shards.size()) {
    throw std::invalid_argument("warm_start: master id out of range");
  }
  if (!(quant_lower_bound > 0.0 && quant_lower_bound <= 1.0)) {
    throw std::invalid_argument("warm_start: quant_lower_bound must lie in (0, 1]");
  }
  const Spectrumd local = reference_spectrum(shards[master_id]);
  if (!(local.gap > 1e-12 * std::abs(local.eigenvalues(0)))) {
    throw std::invalid_argument("warm_start: master's leading eigenvector is not unique");
  }
  const UnitVectord& v_master = local.leading_vector;
  const double gamma = over_approx_smoothness(shards);
  const double ball = quant_lower_bound / 2.0;
  const auto make = [&](const UnitVectord& point, std::int64_t bits) {
    return InitResult{point, ball, std::acos(ball), ball / gamma, 0.0, bits};
  };
  if (shards.size() == 1) return make(v_master, 0);

  // Any two unit vectors are within distance 2, so y = 2 is valid whatever
  // sign each worker's eigensolver picks.
  const QuantizerConfig cfg{2.0, quant_lower_bound / (2.0 * (std::numbers::sqrt2 + 2.0)),
                            v_master.dim()};
  const EncodedMessage msg = encode(cfg, v_master.coords());
  std::int64_t bits = 0;
  Eigen::VectorXd decoded;
  for (std::size_t i = 0; i < shards.size(); ++i) {
    if (static_cast<int>(i) == master_id) continue;
    const Spectrumd own = reference_spectrum(shards[i]);
    Eigen::VectorXd here = decode(msg, own.leading_vector.coords());
    if (decoded.size() != 0 && here != decoded) {
      throw std::logic_error("warm_start: workers decoded different points");
    }
    decoded = std::move(here);
    bits += msg.bit_count;
  }
  const UnitVectord point(decoded);
  // Normalizing at most doubles the quantization error.
  if ((point.coords() - v_master.coords()).norm() >
      2.0 * (decoded - v_master.coords()).norm() * (1.0 + 1e-12) + 1e-15) {
    throw std::logic_error("warm_start: normalization increased the error beyond twice");
  }
  ledger.charge_setup(bits);
  return make(point, bits);
}

}  // namespace qrgd

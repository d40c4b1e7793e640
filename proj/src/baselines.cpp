#include "qrgd/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qrgd/lattice_quantizer.hpp"

namespace qrgd {
namespace {

constexpr int kRawBits = 53;
const double kNoBudget = std::numeric_limits<double>::quiet_NaN();

/// A value sent over one link and what the receiver reconstructs.
struct Delivery {
  Eigen::VectorXd decoded;
  std::int64_t bits;
};

Delivery deliver(const Eigen::VectorXd& value, double input_radius,
                 const Eigen::VectorXd& reference, int bits_per_coord, int round,
                 const char* method) {
  if (bits_per_coord >= kRawBits) {
    const EncodedMessage msg = encode_raw(value);
    return Delivery{decode_raw(msg), msg.bit_count};
  }
  if ((value - reference).norm() > input_radius * (1.0 + 1e-9)) {
    throw std::runtime_error(std::string(method) + ": round " + std::to_string(round) +
                             " value outside its decoding radius");
  }
  const QuantizerConfig cfg = config_for_budget(input_radius, value.size(), bits_per_coord);
  const EncodedMessage msg = encode(cfg, value);
  return Delivery{decode(msg, reference), msg.bit_count};
}

/// Radius of the decode error for the next round's bound.
double output_radius(double input_radius, Eigen::Index dim, int bits_per_coord) {
  if (bits_per_coord >= kRawBits) return 0.0;
  return config_for_budget(input_radius, dim, bits_per_coord).output_radius;
}

void require_bits(int bits_per_coord) {
  if (bits_per_coord < 1) throw std::invalid_argument("baseline: bits per coordinate must be >= 1");
}

void require_common(std::span<const Shard> shards, const UnitVectord& x0, int rounds) {
  if (shards.empty()) throw std::invalid_argument("baseline: no shards");
  for (const auto& s : shards) {
    if (s.dim() != x0.dim()) throw std::invalid_argument("baseline: dimension mismatch");
  }
  if (rounds < 0) throw std::invalid_argument("baseline: negative round count");
}

/// Shared bookkeeping: global objective, ground truth and the trace.
class Recorder {
 public:
  Recorder(std::string method, std::span<const Shard> shards, const UnitVectord& x0)
      : global_(assemble_global(shards)),
        spectrum_(reference_spectrum(global_)),
        trace_{std::move(method), {}, {}, x0} {}

  const Shard& global() const { return global_; }
  BitLedger& ledger() { return trace_.ledger; }

  void record(int t, const UnitVectord& x, double sum_error) {
    const RoundBits bits =
        trace_.ledger.rounds().empty() ? RoundBits{} : trace_.ledger.rounds().back();
    trace_.records.push_back(RoundRecord{t, cost(global_, x),
                                         distance(x, aligned_minimizer(spectrum_, x)), sum_error,
                                         kNoBudget, bits.uplink, bits.downlink,
                                         trace_.ledger.total()});
  }

  Trajectory finish(const UnitVectord& x) {
    trace_.final_point = x;
    return std::move(trace_);
  }

 private:
  Shard global_;
  Spectrumd spectrum_;
  Trajectory trace_;
};

}  // namespace

std::string_view to_string(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::full_precision_rgd: return "full_precision_rgd";
    case BaselineMethod::euclidean_diff_quant: return "euclidean_diff_quant";
    case BaselineMethod::quantized_power_iteration: return "quantized_power_iteration";
    case BaselineMethod::single_node_rgd: return "single_node_rgd";
  }
  throw std::invalid_argument("unknown baseline method");
}

BaselineMethod parse_baseline_method(std::string_view name) {
  for (auto m : {BaselineMethod::full_precision_rgd, BaselineMethod::euclidean_diff_quant,
                 BaselineMethod::quantized_power_iteration, BaselineMethod::single_node_rgd}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown baseline method: " + std::string(name));
}

Trajectory full_precision_rgd(std::span<const Shard> shards, const UnitVectord& x0, double eta,
                              int rounds) {
  require_common(shards, x0, rounds);
  Recorder rec("full_precision_rgd", shards, x0);
  const auto workers = static_cast<std::int64_t>(shards.size() - 1);
  UnitVectord x = x0;
  for (int t = 0; t <= rounds; ++t) {
    rec.ledger().open_round();
    Eigen::VectorXd sum = riemannian_grad(shards[0], x).coords();
    for (std::size_t i = 1; i < shards.size(); ++i) {
      const EncodedMessage msg = encode_raw(riemannian_grad(shards[i], x).coords());
      rec.ledger().charge_uplink(msg.bit_count);
      sum += decode_raw(msg);
    }
    const EncodedMessage down = encode_raw(sum);
    rec.ledger().charge_downlink(workers * down.bit_count);
    const TangentVectord q = project_to_tangent(x, sum);
    rec.record(t, x, (q.coords() - riemannian_grad(rec.global(), x).coords()).norm());
    if (t < rounds) x = exp_map(x, TangentVectord(x, -eta * q.coords()));
  }
  return rec.finish(x);
}

Trajectory single_node_rgd(const Shard& global, const UnitVectord& x0, double eta, int rounds) {
  const std::span<const Shard> one(&global, 1);
  require_common(one, x0, rounds);
  Recorder rec("single_node_rgd", one, x0);
  UnitVectord x = x0;
  for (int t = 0; t <= rounds; ++t) {
    rec.ledger().open_round();
    rec.record(t, x, 0.0);
    if (t < rounds) x = exp_map(x, TangentVectord(x, -eta * riemannian_grad(global, x).coords()));
  }
  return rec.finish(x);
}

Trajectory euclidean_diff_quant(std::span<const Shard> shards, const UnitVectord& x0, double eta,
                                int rounds, int bits_per_coord) {
  require_common(shards, x0, rounds);
  require_bits(bits_per_coord);
  Recorder rec("euclidean_diff_quant", shards, x0);
  const std::size_t n = shards.size();
  const Eigen::Index d = x0.dim();
  const double node_gamma = over_approx_smoothness(shards) / static_cast<double>(n);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);

  UnitVectord x = x0;
  UnitVectord previous = x0;
  std::vector<Eigen::VectorXd> last_grad(n, zero);
  Eigen::VectorXd accumulated = zero;  // identical on every node
  for (int t = 0; t <= rounds; ++t) {
    rec.ledger().open_round();
    // ||grad_i(x) - grad_i(x')|| <= gamma_i ||x - x'||; initially ||grad_i|| <= gamma_i.
    const double spread = t == 0 ? node_gamma : node_gamma * (x.coords() - previous.coords()).norm();
    const double radius = spread + 1e-12 * node_gamma;
    const double node_error = output_radius(radius, d, bits_per_coord);

    Eigen::VectorXd aggregate = zero;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::VectorXd grad = euclidean_grad(shards[i], x);
      const Eigen::VectorXd delta = grad - last_grad[i];
      last_grad[i] = grad;
      if (i == 0) {
        aggregate += delta;
        continue;
      }
      const Delivery up = deliver(delta, radius, zero, bits_per_coord, t, "euclidean_diff_quant");
      rec.ledger().charge_uplink(up.bits);
      aggregate += up.decoded;
    }
    if (n > 1) {
      const double down_radius = static_cast<double>(n) * radius +
                                 static_cast<double>(n - 1) * node_error;
      const Delivery down =
          deliver(aggregate, down_radius, zero, bits_per_coord, t, "euclidean_diff_quant");
      rec.ledger().charge_downlink(static_cast<std::int64_t>(n - 1) * down.bits);
      aggregate = down.decoded;
    }
    accumulated += aggregate;

    const TangentVectord q = project_to_tangent(x, accumulated);
    rec.record(t, x, (q.coords() - riemannian_grad(rec.global(), x).coords()).norm());
    if (t < rounds) {
      previous = x;
      x = exp_map(x, TangentVectord(x, -eta * q.coords()));
    }
  }
  return rec.finish(x);
}

Trajectory quantized_power_iteration(std::span<const Shard> shards, const UnitVectord& x0,
                                     int rounds, int bits_per_coord, PowerRadius radius_rule) {
  require_common(shards, x0, rounds);
  require_bits(bits_per_coord);
  Recorder rec("quantized_power_iteration", shards, x0);
  const std::size_t n = shards.size();
  const Eigen::Index d = x0.dim();
  const auto workers = static_cast<std::int64_t>(n - 1);

  UnitVectord x = x0;
  UnitVectord previous = x0;
  std::vector<Eigen::VectorXd> decoded(n, Eigen::VectorXd::Zero(d));
  std::vector<double> last_error(n, 0.0);
  for (int t = 0; t <= rounds; ++t) {
    rec.ledger().open_round();
    Eigen::VectorXd sum = shards[0].matrix() * x.coords();
    for (std::size_t i = 1; i < n; ++i) {
      const double lambda_max = shards[i].local_smoothness() / 2.0;
      // ||A_i x|| <= lambda_max initially; afterwards ||A_i (x - x')|| <= lambda_max ||x - x'||.
      double radius = lambda_max;
      if (t > 0) {
        const double move = radius_rule == PowerRadius::a_priori
                                ? 2.0
                                : (x.coords() - previous.coords()).norm();
        radius = lambda_max * move + last_error[i];
      }
      radius += 1e-12 * std::max(lambda_max, 1e-300);
      const Eigen::VectorXd value = shards[i].matrix() * x.coords();
      const Delivery up =
          deliver(value, radius, decoded[i], bits_per_coord, t, "quantized_power_iteration");
      rec.ledger().charge_uplink(up.bits);
      decoded[i] = up.decoded;
      last_error[i] = output_radius(radius, d, bits_per_coord);
      sum += decoded[i];
    }
    const double sum_error = (sum - rec.global().matrix() * x.coords()).norm();
    rec.record(t, x, sum_error);
    if (t < rounds) {
      if (!(sum.norm() > 0)) {
        throw std::runtime_error("quantized_power_iteration: aggregated vector vanished at round " +
                                 std::to_string(t));
      }
      previous = x;
      const EncodedMessage down = encode_raw(sum / sum.norm());
      rec.ledger().charge_downlink(workers * down.bit_count);
      x = UnitVectord(decode_raw(down));
    }
  }
  return rec.finish(x);
}

Trajectory run_baseline(const BaselineConfig& config, std::span<const Shard> shards,
                        const UnitVectord& x0) {
  switch (config.method) {
    case BaselineMethod::full_precision_rgd:
      return full_precision_rgd(shards, x0, config.step_size, config.rounds);
    case BaselineMethod::single_node_rgd:
      return single_node_rgd(assemble_global(shards), x0, config.step_size, config.rounds);
    case BaselineMethod::euclidean_diff_quant:
      return euclidean_diff_quant(shards, x0, config.step_size, config.rounds,
                                  config.bits_per_coord);
    case BaselineMethod::quantized_power_iteration:
      return quantized_power_iteration(shards, x0, config.rounds, config.bits_per_coord,
                                       config.power_radius);
  }
  throw std::invalid_argument("run_baseline: unknown method");
}

}  // namespace qrgd

#pragma once

#include <span>
#include <string_view>

#include "qrgd/objective.hpp"
#include "qrgd/trace.hpp"

namespace qrgd {

enum class BaselineMethod {
  full_precision_rgd,
  euclidean_diff_quant,
  quantized_power_iteration,
  single_node_rgd,
};

std::string_view to_string(BaselineMethod method);
BaselineMethod parse_baseline_method(std::string_view name);

/// How quantized power iteration bounds ||A_i x(t) - previous decode||.
enum class PowerRadius {
  a_priori,  // lambda_max(A_i) * 2 plus the previous decode error
  adaptive,  // lambda_max(A_i) * ||x(t) - x(t-1)|| plus the previous decode error
};

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::full_precision_rgd;
  int bits_per_coord = 4;  // >= 53 sends raw float64
  double step_size = 0;    // gradient methods only
  int rounds = 0;
  PowerRadius power_radius = PowerRadius::a_priori;
};

/// Workers send exact Riemannian gradients as float64, the master returns
/// the exact sum. x(t+1) = exp(-eta grad f(x(t))).
Trajectory full_precision_rgd(std::span<const Shard> shards, const UnitVectord& x0, double eta,
                              int rounds);

/// Riemannian gradient descent on one machine holding the whole matrix.
Trajectory single_node_rgd(const Shard& global, const UnitVectord& x0, double eta, int rounds);

/// Quantizes differences of consecutive Euclidean gradients; the master
/// accumulates them and steps along the projected aggregate.
Trajectory euclidean_diff_quant(std::span<const Shard> shards, const UnitVectord& x0, double eta,
                                int rounds, int bits_per_coord);

/// Power iteration with A_i x(t) quantized against the previous decode; the
/// master normalizes the aggregate and broadcasts the iterate in float64.
Trajectory quantized_power_iteration(std::span<const Shard> shards, const UnitVectord& x0,
                                     int rounds, int bits_per_coord,
                                     PowerRadius radius = PowerRadius::a_priori);

Trajectory run_baseline(const BaselineConfig& config, std::span<const Shard> shards,
                        const UnitVectord& x0);

}  // namespace qrgd

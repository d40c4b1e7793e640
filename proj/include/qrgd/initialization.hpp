#pragma once

#include <cstdint>
#include <span>

#include "qrgd/bit_ledger.hpp"
#include "qrgd/objective.hpp"

namespace qrgd {

/// Starting point plus the schedule inputs it certifies.
struct InitResult {
  UnitVectord point;
  double ball_param = 0;     // a: lower bound on <x0, x*>
  double init_radius = 0;    // D = arccos(a)
  double suggested_eta = 0;  // a / gamma
  double failure_prob = 0;   // p
  std::int64_t init_bits = 0;
};

/// Uniform point from a seed every node shares. With probability at least
/// 1 - p it lies within D = arccos(p / sqrt(d)) of +-v1.
InitResult random_init(Eigen::Index d, double gamma, double p, std::uint64_t seed);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// P(|<x, e1>| >= a) for x uniform on S^{d-1}.
double cap_probability(Eigen::Index d, double a);

/// The master's local leading eigenvector, quantized once to every worker
/// (each decodes against its own local eigenvector). `quant_lower_bound`
/// is the caller's lower bound on <v_master, x*>; the result certifies half
/// of it. Bits are charged to `ledger` as setup.
InitResult warm_start(std::span<const Shard> shards, int master_id, double quant_lower_bound,
                      BitLedger& ledger);

}  // namespace qrgd

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrgd/bit_ledger.hpp"
#include "qrgd/lattice_quantizer.hpp"
#include "qrgd/objective.hpp"
#include "qrgd/schedule.hpp"
#include "qrgd/sphere.hpp"
#include "qrgd/trace.hpp"

namespace qrgd {

/// A message whose value lies outside its decoders' input radius, or nodes
/// that disagree on shared state. Either falsifies the round invariants.
class ProtocolViolation : public std::runtime_error {
 public:
  ProtocolViolation(int round, int node, const std::string& detail);
  int round() const { return round_; }
  int node() const { return node_; }

 private:
  int round_;
  int node_;
};

/// What one node knows. Node 0 is the master.
struct NodeState {
  int node_id;
  Shard shard;
  TangentVectord last_decoded_local;  // q_i as the master decoded it
  TangentVectord last_decoded_sum;    // q, the decoded aggregate
  UnitVectord current_point;
};

struct ProtocolState {
  std::vector<NodeState> nodes;
  /// The master's decoded copy of each node's gradient, indexed by node id.
  std::vector<TangentVectord> master_view;
  BitLedger ledger;
  double gamma = 0;
  /// Largest norm removed by re-projecting transported references.
  double transport_correction = 0;
};

/// Setup scalars, then the initial exchange of gradients at x0.
ProtocolState run_setup(std::span<const Shard> shards, const UnitVectord& x0,
                        const ScheduleParams& params);

/// Steps every node to x(t+1) and exchanges gradients there.
RoundBits run_round(ProtocolState& state, int t, const ScheduleParams& params,
                    const RadiusSchedule& schedule);

/// Ground-truth quantities recorded after the exchange at x(t).
struct RoundMetrics {
  int t = 0;
  double cost = 0;
  double dist = 0;            // to the minimizer on the side of x0
  double dist_sq_bound = 0;   // xi^t D^2
  double max_node_error = 0;  // max_i ||q_i - grad f_i||
  double node_budget = 0;     // theta R(t) / (2n)
  double sum_error = 0;       // ||q - grad f||
  double sum_budget = 0;      // theta R(t)
  RoundBits bits;
  std::int64_t cumulative_bits = 0;
};

struct RunResult {
  UnitVectord final_point;
  UnitVectord minimizer;
  ScheduleParams params;
  BitLedger ledger;
  std::vector<RoundMetrics> rounds;
  double transport_correction = 0;
};

/// Setup plus params.horizon rounds. `init_bits` is charged as setup.
RunResult run(std::span<const Shard> shards, const UnitVectord& x0, const ScheduleParams& params,
              std::int64_t init_bits = 0);

struct RoundInvariantCheck {
  int t = 0;
  bool contraction = false;
  bool node_error = false;
  bool sum_error = false;
};

struct RoundInvariantReport {
  std::vector<RoundInvariantCheck> rounds;
  bool all_hold() const;
  std::size_t violations() const;
};

/// Checks the three per-round inequalities with 1e-9 absolute slack.
RoundInvariantReport verify_round_invariants(const RunResult& result);

Trajectory to_trajectory(const RunResult& result, std::string method = "quantized_rgd");

/// The same exchange engine driven by a fixed per-coordinate bit budget
/// instead of the geometric radius schedule. Radii follow from bounds all
/// nodes can evaluate: smoothness times the step length plus the previous
/// round's certified errors.
struct BudgetOptions {
  double step_size = 0;
  int rounds = 0;
  int bits_per_coord = 4;
};

Trajectory run_budgeted(std::span<const Shard> shards, const UnitVectord& x0,
                        const BudgetOptions& options, std::int64_t init_bits = 0);

}  // namespace qrgd

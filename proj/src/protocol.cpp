#include "qrgd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace qrgd {

ProtocolViolation::ProtocolViolation(int round, int node, const std::string& detail)
    : std::runtime_error("round " + std::to_string(round) + ", node " + std::to_string(node) +
                         ": " + detail),
      round_(round),
      node_(node) {}

namespace {

constexpr double kRadiusSlack = 1e-9;
constexpr std::int64_t kScalarBits = 64;

struct LinkConfigs {
  QuantizerConfig uplink;
  QuantizerConfig downlink;
};

void check_radius(double gap, double radius, int round, int node, const char* link) {
  if (!(gap <= radius * (1.0 + kRadiusSlack))) {
    std::ostringstream msg;
    msg << link << " value lies " << gap << " from its decoding reference, beyond radius "
        << radius;
    throw ProtocolViolation(round, node, msg.str());
  }
}

void require_agreement(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int round, int node,
                       const char* what) {
  if (a != b) throw ProtocolViolation(round, node, std::string("nodes disagree on ") + what);
}

ProtocolState make_state(std::span<const Shard> shards, const UnitVectord& x0) {
  if (shards.empty()) throw std::invalid_argument("protocol: at least one node is required");
  ProtocolState st;
  for (std::size_t i = 0; i < shards.size(); ++i) {
    if (shards[i].dim() != x0.dim()) {
      throw std::invalid_argument("protocol: shard dimension does not match the initial point");
    }
    st.nodes.push_back(NodeState{static_cast<int>(i), shards[i], TangentVectord::zero(x0),
                                 TangentVectord::zero(x0), x0});
    st.master_view.push_back(TangentVectord::zero(x0));
  }
  st.gamma = over_approx_smoothness(shards);
  return st;
}

/// Gradient exchange at the common current point. In the initial exchange
/// the master decodes against its own gradient and each worker decodes the
/// aggregate against its own gradient; afterwards everyone decodes against
/// the transported values of the previous round.
RoundBits exchange(ProtocolState& st, int round, const LinkConfigs& cfg, bool initial) {
  st.ledger.open_round();
  RoundBits bits;
  NodeState& master = st.nodes[0];
  const UnitVectord& x = master.current_point;

  const TangentVectord master_grad = riemannian_grad(master.shard, x);
  Eigen::VectorXd sum = master_grad.coords();
  for (std::size_t i = 1; i < st.nodes.size(); ++i) {
    NodeState& node = st.nodes[i];
    const int id = node.node_id;
    const TangentVectord grad = riemannian_grad(node.shard, node.current_point);
    const TangentVectord& master_ref = initial ? master_grad : st.master_view[i];
    check_radius((grad.coords() - master_ref.coords()).norm(), cfg.uplink.input_radius, round, id,
                 "uplink");
    const EncodedMessage msg = encode(cfg.uplink, grad.coords());
    st.ledger.charge_uplink(msg.bit_count);
    bits.uplink += msg.bit_count;

    TangentVectord at_master = decode_tangent(msg, master_ref);
    // The sender reconstructs what the master decoded from its own side information.
    TangentVectord at_worker = decode_tangent(msg, initial ? grad : node.last_decoded_local);
    require_agreement(at_master.coords(), at_worker.coords(), round, id, "an uplink decode");
    sum += at_master.coords();
    st.master_view[i] = std::move(at_master);
    node.last_decoded_local = std::move(at_worker);
  }
  st.master_view[0] = master_grad;
  master.last_decoded_local = master_grad;

  const TangentVectord aggregate = project_to_tangent(x, sum);
  if (st.nodes.size() == 1) {
    master.last_decoded_sum = aggregate;
    return bits;
  }
  const EncodedMessage msg = encode(cfg.downlink, aggregate.coords());
  master.last_decoded_sum = decode_tangent(msg, aggregate);
  for (std::size_t i = 1; i < st.nodes.size(); ++i) {
    NodeState& node = st.nodes[i];
    const TangentVectord own = initial ? riemannian_grad(node.shard, node.current_point)
                                       : node.last_decoded_sum;
    check_radius((aggregate.coords() - own.coords()).norm(), cfg.downlink.input_radius, round,
                 node.node_id, "downlink");
    st.ledger.charge_downlink(msg.bit_count);
    bits.downlink += msg.bit_count;
    node.last_decoded_sum = decode_tangent(msg, own);
    require_agreement(node.last_decoded_sum.coords(), master.last_decoded_sum.coords(), round,
                      node.node_id, "the downlink decode");
  }
  return bits;
}

TangentVectord carry(const UnitVectord& from, const UnitVectord& to, const TangentVectord& u,
                     double& correction) {
  const TangentVectord moved = parallel_transport(from, to, u);
  TangentVectord clean = project_to_tangent(to, moved.coords());
  correction = std::max(correction, (moved.coords() - clean.coords()).norm());
  return clean;
}

/// Every node steps along its own copy of q and carries its references to
/// the new point. Returns the step's intrinsic length.
double advance(ProtocolState& st, double eta, int round) {
  const UnitVectord from = st.nodes[0].current_point;
  for (NodeState& node : st.nodes) {
    const TangentVectord step(node.current_point, -eta * node.last_decoded_sum.coords());
    UnitVectord next = exp_map(node.current_point, step);
    require_agreement(next.coords(), node.node_id == 0 ? next.coords()
                                                       : st.nodes[0].current_point.coords(),
                      round, node.node_id, "the next iterate");
    node.last_decoded_local =
        carry(node.current_point, next, node.last_decoded_local, st.transport_correction);
    node.last_decoded_sum =
        carry(node.current_point, next, node.last_decoded_sum, st.transport_correction);
    if (node.node_id == 0) {
      for (auto& view : st.master_view) view = carry(from, next, view, st.transport_correction);
    }
    node.current_point = std::move(next);
  }
  return distance(from, st.nodes[0].current_point);
}

/// Distance to whichever of +-v1 is nearer.
double sign_free_distance(const Spectrumd& spectrum, const UnitVectord& x) {
  return distance(x, aligned_minimizer(spectrum, x));
}

void charge_setup_scalars(ProtocolState& st, int broadcast_scalars) {
  const auto workers = static_cast<std::int64_t>(st.nodes.size() - 1);
  // Each worker uploads its gamma_i; the master broadcasts the shared constants.
  st.ledger.charge_setup(workers * kScalarBits * (1 + broadcast_scalars));
}

}  // namespace

ProtocolState run_setup(std::span<const Shard> shards, const UnitVectord& x0,
                        const ScheduleParams& params) {
  ProtocolState st = make_state(shards, x0);
  if (params.smoothness < st.gamma * (1.0 - 1e-12)) {
    throw std::invalid_argument("run_setup: schedule smoothness is below n * max gamma_i");
  }
  // gamma, mu, D, eta and epsilon determine every radius of the run.
  charge_setup_scalars(st, 5);
  const double n = static_cast<double>(st.nodes.size());
  const double gamma = params.smoothness;
  const double budget = params.theta * RadiusSchedule::from(params).at(0);
  const double spread = 2.0 * gamma * std::numbers::pi;
  const LinkConfigs cfg{{spread, budget / (2.0 * n), x0.dim()},
                        {budget / 2.0 + spread, budget / 2.0, x0.dim()}};
  exchange(st, 0, cfg, true);
  return st;
}

RoundBits run_round(ProtocolState& state, int t, const ScheduleParams& params,
                    const RadiusSchedule& schedule) {
  if (t < 0) throw std::invalid_argument("run_round: negative round index");
  advance(state, params.step_size, t + 1);
  const double n = static_cast<double>(state.nodes.size());
  const double radius = schedule.at(t + 1);
  const double budget = params.theta * radius;
  const Eigen::Index d = state.nodes[0].current_point.dim();
  const LinkConfigs cfg{{radius / n, budget / (2.0 * n), d},
                        {(1.0 + params.theta / 2.0) * radius, budget / 2.0, d}};
  return exchange(state, t + 1, cfg, false);
}

RunResult run(std::span<const Shard> shards, const UnitVectord& x0, const ScheduleParams& params,
              std::int64_t init_bits) {
  const Shard global = assemble_global(shards);
  const Spectrumd spectrum = reference_spectrum(global);
  const UnitVectord x_star = aligned_minimizer(spectrum, x0);
  const RadiusSchedule schedule = RadiusSchedule::from(params);
  const double n = static_cast<double>(shards.size());

  ProtocolState st = run_setup(shards, x0, params);
  st.ledger.charge_setup(init_bits);

  std::vector<RoundMetrics> rounds;
  rounds.reserve(static_cast<std::size_t>(params.horizon) + 1);
  const auto record = [&](int t) {
    const NodeState& master = st.nodes[0];
    const UnitVectord& x = master.current_point;
    RoundMetrics m;
    m.t = t;
    m.cost = cost(global, x);
    m.dist = distance(x, x_star);
    m.dist_sq_bound = std::pow(params.xi, t) * params.init_radius * params.init_radius;
    for (std::size_t i = 1; i < st.nodes.size(); ++i) {
      const TangentVectord g = riemannian_grad(st.nodes[i].shard, x);
      m.max_node_error =
          std::max(m.max_node_error, (st.master_view[i].coords() - g.coords()).norm());
    }
    m.sum_budget = params.theta * schedule.at(t);
    m.node_budget = m.sum_budget / (2.0 * n);
    m.sum_error = (master.last_decoded_sum.coords() - riemannian_grad(global, x).coords()).norm();
    m.bits = st.ledger.rounds().back();
    m.cumulative_bits = st.ledger.total();
    rounds.push_back(m);
  };

  record(0);
  for (int t = 0; t < params.horizon; ++t) {
    run_round(st, t, params, schedule);
    record(t + 1);
  }
  return RunResult{st.nodes[0].current_point, x_star, params, st.ledger, std::move(rounds),
                   st.transport_correction};
}

bool RoundInvariantReport::all_hold() const { return violations() == 0; }

std::size_t RoundInvariantReport::violations() const {
  return static_cast<std::size_t>(std::count_if(rounds.begin(), rounds.end(), [](const auto& c) {
    return !(c.contraction && c.node_error && c.sum_error);
  }));
}

RoundInvariantReport verify_round_invariants(const RunResult& result) {
  constexpr double kSlack = 1e-9;
  RoundInvariantReport report;
  for (const RoundMetrics& m : result.rounds) {
    report.rounds.push_back(RoundInvariantCheck{
        m.t,
        m.dist * m.dist <= m.dist_sq_bound + kSlack,
        m.max_node_error <= m.node_budget + kSlack,
        m.sum_error <= m.sum_budget + kSlack,
    });
  }
  return report;
}

Trajectory to_trajectory(const RunResult& result, std::string method) {
  Trajectory out{std::move(method), {}, result.ledger, result.final_point};
  out.records.reserve(result.rounds.size());
  for (const RoundMetrics& m : result.rounds) {
    out.records.push_back(RoundRecord{m.t, m.cost, m.dist, m.sum_error, m.sum_budget,
                                      m.bits.uplink, m.bits.downlink, m.cumulative_bits});
  }
  return out;
}

Trajectory run_budgeted(std::span<const Shard> shards, const UnitVectord& x0,
                        const BudgetOptions& options, std::int64_t init_bits) {
  if (!(options.step_size > 0) || options.rounds < 0) {
    throw std::invalid_argument("run_budgeted: step size must be positive, rounds nonnegative");
  }
  const Shard global = assemble_global(shards);
  const Spectrumd spectrum = reference_spectrum(global);

  ProtocolState st = make_state(shards, x0);
  charge_setup_scalars(st, 2);  // gamma and eta
  st.ledger.charge_setup(init_bits);

  const double gamma = st.gamma;
  const double n = static_cast<double>(st.nodes.size());
  const double workers = n - 1.0;
  const double node_gamma = gamma / n;  // >= every gamma_i
  // Keeps radii positive once steps underflow; far below any reported error.
  const double floor = 1e-12 * gamma;
  const Eigen::Index d = x0.dim();
  const int b = options.bits_per_coord;

  Trajectory out{"quantized_rgd", {}, {}, x0};
  const auto record = [&](int t, const LinkConfigs& cfg) {
    const UnitVectord& x = st.nodes[0].current_point;
    const double certified = workers * cfg.uplink.output_radius +
                             (st.nodes.size() > 1 ? cfg.downlink.output_radius : 0.0);
    const RoundBits bits = st.ledger.rounds().back();
    out.records.push_back(RoundRecord{
        t, cost(global, x), sign_free_distance(spectrum, x),
        (st.nodes[0].last_decoded_sum.coords() - riemannian_grad(global, x).coords()).norm(),
        certified, bits.uplink, bits.downlink, st.ledger.total()});
  };

  // Initially ||grad f_i|| <= gamma_i and ||grad f|| <= 2 lambda_1 <= gamma.
  LinkConfigs cfg;
  cfg.uplink = config_for_budget(2.0 * node_gamma + floor, d, b);
  cfg.downlink = config_for_budget(
      workers * cfg.uplink.output_radius + gamma + node_gamma + floor, d, b);
  exchange(st, 0, cfg, true);
  record(0, cfg);

  for (int t = 1; t <= options.rounds; ++t) {
    const LinkConfigs prev = cfg;
    const double step = advance(st, options.step_size, t);
    // ||g_i(x') - G g_i(x)|| <= gamma_i dist(x, x'), plus last round's decode error.
    cfg.uplink = config_for_budget(node_gamma * step + prev.uplink.output_radius + floor, d, b);
    cfg.downlink = config_for_budget(workers * (cfg.uplink.output_radius +
                                                prev.uplink.output_radius) +
                                         gamma * step + prev.downlink.output_radius + floor,
                                     d, b);
    exchange(st, t, cfg, false);
    record(t, cfg);
  }
  out.ledger = st.ledger;
  out.final_point = st.nodes[0].current_point;
  return out;
}

}  // namespace qrgd

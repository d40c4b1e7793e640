#include "qrgd/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "qrgd/baselines.hpp"
#include "qrgd/harness.hpp"
#include "qrgd/initialization.hpp"
#include "qrgd/lattice_quantizer.hpp"
#include "qrgd/protocol.hpp"

namespace qrgd {
namespace {

struct Instance {
  std::vector<Shard> shards;
  Spectrumd spectrum;
  double gamma;
};

Instance make_instance(Eigen::Index d, int n, double lambda1, double gap_ratio, double tail_floor,
                       Eigen::Index rows, std::uint64_t seed) {
  const SyntheticInstance inst =
      synth_instance(SyntheticSpec::with_gap(d, rows, lambda1, gap_ratio, tail_floor, seed));
  std::vector<Shard> shards = partition_rows(inst.rows, n, seed);
  const double gamma = over_approx_smoothness(shards);
  return Instance{std::move(shards), inst.spectrum, gamma};
}

/// A point at a uniformly drawn angle in [0, max_angle] from `center`, in a
/// uniformly drawn direction.
UnitVectord point_within(const UnitVectord& center, double max_angle, std::mt19937_64& rng) {
  const UnitVectord dir_raw = sample_uniform(center.dim(), rng);
  const TangentVectord dir = project_to_tangent(center, dir_raw.coords());
  const double angle = std::uniform_real_distribution<double>(0.0, max_angle)(rng);
  return exp_map(center, TangentVectord(center, dir.coords() * (angle / dir.norm())));
}

Eigen::VectorXd random_vector(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = normal(rng);
  return v;
}

Shard random_psd(Eigen::Index d, std::mt19937_64& rng) {
  const Eigen::MatrixXd g = Eigen::MatrixXd::NullaryExpr(
      d, d, [&] { return std::normal_distribution<double>()(rng); });
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Eigen::VectorXd lambda(d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < d; ++i) lambda(i) = unit(rng);
  lambda(0) = 1.0 + unit(rng);  // keeps a clear leading eigenvalue
  return Shard(q * lambda.asDiagonal() * q.transpose(), d);
}

CriterionResult begin(int id, std::string title) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  return r;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// 1. Round invariants over 20 seeds at two gaps.
CriterionResult round_invariants() {
  CriterionResult r = begin(1, "Round invariant suite (d=20, n=4, 20 seeds, two gaps)");
  constexpr double kRadius = 1.0;
  std::size_t rounds = 0;
  std::size_t violations = 0;
  std::size_t aborts = 0;
  for (double gap_ratio : {0.1, 0.5}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Instance inst = make_instance(20, 4, 2.0, gap_ratio, 0.1, 20000, 100 + seed);
      std::mt19937_64 rng(seed);
      const UnitVectord x0 = point_within(inst.spectrum.leading_vector, kRadius, rng);
      const ScheduleParams params = build_schedule(
          inst.gamma, inst.spectrum.gap / 2.0, kRadius, std::cos(kRadius) / inst.gamma,
          1e-3 * kRadius);
      try {
        const RunResult res = run(inst.shards, x0, params);
        const RoundInvariantReport report = verify_round_invariants(res);
        rounds += report.rounds.size();
        violations += report.violations();
      } catch (const ProtocolViolation&) {
        ++aborts;
      }
    }
  }
  r.passed = violations == 0 && aborts == 0;
  r.detail = std::to_string(rounds) + " rounds checked, " + std::to_string(violations) +
             " violations, " + std::to_string(aborts) + " aborted runs";
  r.time_limit = 30;
  return r;
}

// 2. Quantizer error and bit bounds.
CriterionResult quantizer_contract() {
  CriterionResult r = begin(2, "Quantizer contract (1e5 trials per dim in {2, 8, 32, 128})");
  constexpr int kTrials = 100000;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t error_violations = 0;
  std::size_t bit_violations = 0;
  double worst_ratio = 0;  // error / w
  double worst_excess = -1e300;  // bits - dim (log2(y/w) + 4)
  for (Eigen::Index dim : {2, 8, 32, 128}) {
    for (int trial = 0; trial < kTrials; ++trial) {
      const double y = std::pow(10.0, -3.0 + 6.0 * unit(rng));
      const double ratio = std::pow(10.0, std::log10(1.01) + (6.0 - std::log10(1.01)) * unit(rng));
      const QuantizerConfig cfg{y, y / ratio, dim};
      const Eigen::VectorXd x = random_vector(dim, rng) * (10.0 * y);
      Eigen::VectorXd dir = random_vector(dim, rng);
      dir.normalize();
      // One trial in ten sits exactly on the boundary of the input ball.
      const double reach = trial % 10 == 0 ? 1.0 : std::pow(unit(rng), 1.0 / static_cast<double>(dim));
      const Eigen::VectorXd ref = x + dir * (y * reach);
      const Eigen::VectorXd out = decode(encode(cfg, x), ref);
      const double err = (out - x).norm();
      worst_ratio = std::max(worst_ratio, err / cfg.output_radius);
      if (!(err <= cfg.output_radius)) ++error_violations;
      const double bound = static_cast<double>(dim) * (std::log2(ratio) + 4.0);
      const auto bits = static_cast<double>(bit_cost(cfg));
      worst_excess = std::max(worst_excess, bits - bound);
      if (!(bits <= bound)) ++bit_violations;
    }
  }
  r.passed = error_violations == 0 && bit_violations == 0;
  r.detail = "error violations " + std::to_string(error_violations) + ", bit-bound violations " +
             std::to_string(bit_violations) + ", max error/w " + fmt(worst_ratio) +
             ", max bits minus bound " + fmt(worst_excess);
  r.time_limit = 60;
  return r;
}

// 3. Geometry identities.
CriterionResult geometry_suite() {
  CriterionResult r = begin(3, "Geometry suite (exp/log, transport, Rauch on 1e4 triples)");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> dims(2, 40);
  double inversion = 0;
  double isometry = 0;
  double tangency = 0;
  std::size_t rauch_violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Index d = dims(rng);
    const UnitVectord p = sample_uniform(d, rng);
    TangentVectord v = project_to_tangent(p, random_vector(d, rng));
    const double len = (std::numbers::pi - 0.1) * (1e-6 + (1.0 - 1e-6) * unit(rng));
    v = TangentVectord(p, v.coords() * (len / v.norm()));
    inversion = std::max(inversion, (log_map(p, exp_map(p, v)).coords() - v.coords()).norm());

    const UnitVectord q = sample_uniform(d, rng);
    const TangentVectord u = project_to_tangent(p, random_vector(d, rng));
    const TangentVectord w = project_to_tangent(p, random_vector(d, rng));
    const TangentVectord tu = parallel_transport(p, q, u);
    const TangentVectord tw = parallel_transport(p, q, w);
    isometry = std::max(isometry, std::abs(tu.dot(tw) - u.dot(w)));
    tangency = std::max(tangency, std::abs(q.coords().dot(tu.coords())));

    const UnitVectord h = sample_uniform(d, rng);
    const auto into_hemisphere = [&](const UnitVectord& z) { return z.dot(h) >= 0 ? z : -z; };
    const UnitVectord a = into_hemisphere(sample_uniform(d, rng));
    const UnitVectord b = into_hemisphere(sample_uniform(d, rng));
    const UnitVectord c = into_hemisphere(sample_uniform(d, rng));
    const auto [arc, chord] = tangent_chord_bound(a, b, c);
    if (!(arc <= chord + 1e-12)) ++rauch_violations;
  }
  r.passed = inversion <= 1e-9 && isometry <= 1e-10 && tangency <= 1e-10 && rauch_violations == 0;
  r.detail = "max inversion error " + fmt(inversion) + ", isometry " + fmt(isometry) +
             ", tangency " + fmt(tangency) + ", Rauch violations " +
             std::to_string(rauch_violations);
  r.time_limit = 10;
  return r;
}

// 4. Local convexity and smoothness of the Rayleigh quotient.
CriterionResult convexity_properties() {
  CriterionResult r = begin(4, "Convexity slacks and smoothness (1e4 samples each)");
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dims(2, 12);
  double worst_slack = 1e300;  // min slack / lambda_1
  double worst_smooth = 0;     // max ratio to the bound
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Index d = dims(rng);
    const Shard a = random_psd(d, rng);
    const Spectrumd spec = reference_spectrum(a);
    UnitVectord x = sample_uniform(d, rng);
    while (std::abs(x.dot(spec.leading_vector)) <= 0.05) x = sample_uniform(d, rng);
    const auto slacks = check_convexity_properties(a, x, spec);
    worst_slack = std::min(worst_slack, slacks.min_slack() / spec.eigenvalues(0));

    UnitVectord y = sample_uniform(d, rng);
    if (y.dot(x) < 0) y = -y;
    const TangentVectord moved = parallel_transport(y, x, riemannian_grad(a, y));
    const double lhs = (riemannian_grad(a, x).coords() - moved.coords()).norm();
    const double rhs = spec.smoothness * distance(x, y) * (1.0 + 1e-8);
    if (rhs > 0) worst_smooth = std::max(worst_smooth, lhs / rhs);
  }
  r.passed = worst_slack >= -1e-9 && worst_smooth <= 1.0;
  r.detail = "min slack/lambda1 " + fmt(worst_slack) + ", max smoothness ratio " + fmt(worst_smooth);
  r.time_limit = 30;
  return r;
}

// 5. Single-node descent contracts dist^2 by 1 - a mu eta per step.
CriterionResult single_node_contraction() {
  CriterionResult r = begin(5, "Single-node RGD contraction (20 seeds, d=10)");
  constexpr double kBall = 0.5;
  std::size_t steps = 0;
  std::size_t violations = 0;
  double worst = 0;  // max observed ratio / guaranteed factor
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance inst = make_instance(10, 1, 2.0, 0.5, 0.1, 5000, 500 + seed);
    const Shard& a = inst.shards[0];
    const UnitVectord& v1 = inst.spectrum.leading_vector;
    std::mt19937_64 rng(seed);
    // Start exactly on the boundary of the ball <x, v1> >= a.
    const TangentVectord dir = project_to_tangent(v1, random_vector(10, rng));
    const UnitVectord start =
        exp_map(v1, TangentVectord(v1, dir.coords() * (std::acos(kBall) / dir.norm())));
    const double gamma = inst.spectrum.smoothness;
    const double eta = kBall / gamma;
    const double factor = 1.0 - kBall * (inst.spectrum.gap / 2.0) * eta;
    const Trajectory tr = single_node_rgd(a, start, eta, 400);
    for (std::size_t t = 1; t < tr.records.size(); ++t) {
      const double before = tr.records[t - 1].dist * tr.records[t - 1].dist;
      const double after = tr.records[t].dist * tr.records[t].dist;
      if (before < 1e-20) break;  // below rounding level
      ++steps;
      worst = std::max(worst, after / (factor * before));
      if (!(after <= factor * before * (1.0 + 1e-10))) ++violations;
    }
  }
  r.passed = violations == 0 && steps > 0;
  r.detail = std::to_string(steps) + " steps, " + std::to_string(violations) +
             " violations, max ratio to bound " + fmt(worst);
  r.time_limit = 5;
  return r;
}

// 6. Random initialization lands in the cap with probability >= 1 - p.
CriterionResult random_init_cap() {
  CriterionResult r = begin(6, "Random-init cap bound (1e5 samples, d in {4,16,64,256}, p in {0.1,0.01})");
  constexpr int kSamples = 100000;
  bool ok = true;
  std::ostringstream detail;
  for (Eigen::Index d : {4, 16, 64, 256}) {
    std::mt19937_64 rng(600 + static_cast<std::uint64_t>(d));
    const UnitVectord target = sample_uniform(d, rng);
    std::vector<double> align(kSamples);
    for (double& a : align) a = std::abs(sample_uniform(d, rng).dot(target));
    for (double p : {0.1, 0.01}) {
      const double ball = p / std::sqrt(static_cast<double>(d));
      const double hits =
          static_cast<double>(std::count_if(align.begin(), align.end(), [&](double a) { return a >= ball; }));
      const double freq = hits / kSamples;
      const double exact = cap_probability(d, ball);
      const double se = std::sqrt(std::max(exact * (1.0 - exact), 1e-12) / kSamples);
      const bool cell = freq >= 1.0 - p && std::abs(freq - exact) <= 3.0 * se;
      ok = ok && cell;
      detail << "d=" << d << ",p=" << p << ": " << fmt(freq) << " (exact " << fmt(exact) << ")"
             << (cell ? "" : " FAIL") << "; ";
    }
  }
  r.passed = ok;
  r.detail = detail.str();
  r.time_limit = 60;
  return r;
}

// 7. End-to-end accuracy and bit total against the closed form.
CriterionResult end_to_end_accuracy() {
  CriterionResult r = begin(7, "End-to-end accuracy and bit total (eps = 1e-4 D)");
  constexpr double kRadius = 1.0;
  bool ok = true;
  std::ostringstream detail;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Instance inst = make_instance(20, 4, 2.0, 0.5, 0.1, 20000, 700 + seed);
    std::mt19937_64 rng(seed);
    const UnitVectord x0 = point_within(inst.spectrum.leading_vector, kRadius, rng);
    const double eps = 1e-4 * kRadius;
    const ScheduleParams params = build_schedule(inst.gamma, inst.spectrum.gap / 2.0, kRadius,
                                                 std::cos(kRadius) / inst.gamma, eps);
    const RunResult res = run(inst.shards, x0, params);
    const auto horizon_formula = static_cast<int>(
        std::ceil(std::log(kRadius * kRadius / (eps * eps)) / (1.0 - params.xi)));
    const double n = static_cast<double>(inst.shards.size());
    const double setup = static_cast<double>(res.ledger.setup_bits() + res.ledger.rounds()[0].uplink +
                                             res.ledger.rounds()[0].downlink);
    const double closed = params.horizon * (2.0 * n - 2.0) * 20.0 * std::log2(2.0 / params.theta) + setup;
    const double ratio = static_cast<double>(res.ledger.total()) / closed;
    const double final_dist = res.rounds.back().dist;
    const bool run_ok = final_dist <= eps && params.horizon <= horizon_formula && ratio >= 0.5 &&
                        ratio <= 2.0;
    ok = ok && run_ok;
    detail << "T=" << params.horizon << " final dist " << fmt(final_dist) << " bits/closed-form "
           << fmt(ratio) << (run_ok ? "" : " FAIL") << "; ";
  }
  r.passed = ok;
  r.detail = detail.str();
  r.time_limit = 60;
  return r;
}

// 8. Total bits grow like d^2 under random initialization.
CriterionResult dimension_scaling() {
  CriterionResult r = begin(8, "Dimension scaling of total bits (random init, d in {8,16,32,64})");
  constexpr double kP = 0.1;
  constexpr double kEpsRatio = 0.1;
  std::vector<double> log_d;
  std::vector<double> log_bits;
  std::ostringstream detail;
  bool reached = true;
  for (Eigen::Index d : {8, 16, 32, 64}) {
    const Instance inst = make_instance(d, 4, 2.0, 0.5, 0.1, 400 * d, 800 + static_cast<std::uint64_t>(d));
    // Condition on the probability-(1 - p) event that the start is in the cap.
    int skipped = 0;
    std::uint64_t seed = 0;
    InitResult init = random_init(d, inst.gamma, kP, seed);
    while (distance(init.point, aligned_minimizer(inst.spectrum, init.point)) > init.init_radius) {
      ++skipped;
      init = random_init(d, inst.gamma, kP, ++seed);
    }
    const ScheduleParams params =
        build_schedule(inst.gamma, inst.spectrum.gap / 2.0, init.init_radius, init.suggested_eta,
                       kEpsRatio * init.init_radius);
    const auto workers = static_cast<std::int64_t>(inst.shards.size() - 1);
    const RunResult res = run(inst.shards, init.point, params, workers * 64);
    reached = reached && res.rounds.back().dist <= params.epsilon;
    log_d.push_back(std::log(static_cast<double>(d)));
    log_bits.push_back(std::log(static_cast<double>(res.ledger.total())));
    detail << "d=" << d << ": T=" << params.horizon << ", bits=" << res.ledger.total()
           << ", skipped inits " << skipped << "; ";
  }
  const double n = static_cast<double>(log_d.size());
  const double mx = std::accumulate(log_d.begin(), log_d.end(), 0.0) / n;
  const double my = std::accumulate(log_bits.begin(), log_bits.end(), 0.0) / n;
  double sxy = 0;
  double sxx = 0;
  for (std::size_t i = 0; i < log_d.size(); ++i) {
    sxy += (log_d[i] - mx) * (log_bits[i] - my);
    sxx += (log_d[i] - mx) * (log_d[i] - mx);
  }
  const double slope = sxy / sxx;
  r.passed = reached && slope >= 1.5 && slope <= 2.5;
  r.detail = "fitted exponent " + fmt(slope) + (reached ? "" : ", accuracy not reached") + "; " +
             detail.str();
  r.time_limit = 300;
  return r;
}

// 9. Qualitative ordering of the methods at 4 bits per coordinate.
CriterionResult method_comparison() {
  CriterionResult r = begin(9, "Method comparison at 4 bits/coord (d=50, n=4, 10 seeds)");
  constexpr int kRounds = 300;
  constexpr int kBits = 4;
  constexpr int kSeeds = 10;
  struct Means {
    double full = 0, quantized = 0, euclidean = 0, power = 0;
  };
  const auto evaluate = [&](const Instance& inst) {
    Means m;
    const double eta = 1.0 / inst.gamma;
    for (int s = 0; s < kSeeds; ++s) {
      const UnitVectord x0 = sample_uniform(50, static_cast<std::uint64_t>(900 + s));
      m.full += full_precision_rgd(inst.shards, x0, eta, kRounds).records.back().cost;
      m.quantized += run_budgeted(inst.shards, x0, BudgetOptions{eta, kRounds, kBits}).records.back().cost;
      m.euclidean += euclidean_diff_quant(inst.shards, x0, eta, kRounds, kBits).records.back().cost;
      m.power += quantized_power_iteration(inst.shards, x0, kRounds, kBits).records.back().cost;
    }
    for (double* v : {&m.full, &m.quantized, &m.euclidean, &m.power}) *v /= kSeeds;
    return m;
  };
  const Instance well = make_instance(50, 4, 2.0, 0.5, 0.1, 20000, 901);
  const Instance ill = make_instance(50, 4, 2.0, 0.05, 0.5, 20000, 902);
  const Means mw = evaluate(well);
  const Means mi = evaluate(ill);
  const double l1w = well.spectrum.eigenvalues(0);
  const double l1i = ill.spectrum.eigenvalues(0);
  const bool a = std::abs(mw.quantized - mw.full) <= 1e-3 * l1w;
  const bool b = mw.euclidean > mw.quantized;
  const bool c = mi.power + l1i >= 1e-2 * l1i;
  r.passed = a && b && c;
  const auto rel = [](double f, double l1) { return fmt((f + l1) / l1); };
  r.detail = "relative gaps (f+l1)/l1 well-conditioned: full " + rel(mw.full, l1w) + ", quantized " +
             rel(mw.quantized, l1w) + ", euclidean " + rel(mw.euclidean, l1w) + ", power " +
             rel(mw.power, l1w) + "; ill-conditioned: full " + rel(mi.full, l1i) + ", quantized " +
             rel(mi.quantized, l1i) + ", euclidean " + rel(mi.euclidean, l1i) + ", power " +
             rel(mi.power, l1i) + "; (a) " + (a ? "ok" : "FAIL") + " (b) " + (b ? "ok" : "FAIL") +
             " (c) " + (c ? "ok" : "FAIL");
  r.time_limit = 120;
  return r;
}

// 10. Warm start certifies half the caller's alignment bound at O(n d) bits.
CriterionResult warm_start_bound() {
  CriterionResult r = begin(10, "Warm start alignment and O(nd) bits (100 seeds x 2 regimes)");
  constexpr double kLowerBound = 0.5;
  constexpr double kBitsPerNodeCoord = 16;
  constexpr Eigen::Index kDim = 20;
  constexpr int kNodes = 4;
  double worst_alignment = 1e300;
  double worst_bits = 0;  // bits / (n d)
  std::size_t failures = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (bool identical : {true, false}) {
      std::vector<Shard> shards;
      Spectrumd truth = [&] {
        if (identical) {
          const SyntheticInstance inst =
              synth_instance(SyntheticSpec::with_gap(kDim, 2000, 2.0, 0.5, 0.1, 1000 + seed));
          const Shard one = Shard::from_rows(inst.rows);
          shards.assign(kNodes, one);
          return reference_spectrum(assemble_global(shards));
        }
        const Instance inst = make_instance(kDim, kNodes, 2.0, 0.5, 0.1, 40000, 2000 + seed);
        shards = inst.shards;
        return inst.spectrum;
      }();
      BitLedger ledger;
      const InitResult init = warm_start(shards, 0, kLowerBound, ledger);
      const double alignment = init.point.dot(aligned_minimizer(truth, init.point));
      const double bits = static_cast<double>(init.init_bits) / (kNodes * kDim);
      worst_alignment = std::min(worst_alignment, alignment);
      worst_bits = std::max(worst_bits, bits);
      if (!(alignment >= kLowerBound / 2.0) || !(bits <= kBitsPerNodeCoord) ||
          ledger.total() != init.init_bits) {
        ++failures;
      }
    }
  }
  r.passed = failures == 0;
  r.detail = "min <x0,x*> " + fmt(worst_alignment) + " (bound " + fmt(kLowerBound / 2.0) +
             "), max bits/(n d) " + fmt(worst_bits) + " (C = " + fmt(kBitsPerNodeCoord) + "), " +
             std::to_string(failures) + " failures";
  r.time_limit = 30;
  return r;
}

const std::vector<std::function<CriterionResult()>>& criteria() {
  static const std::vector<std::function<CriterionResult()>> all = {
      round_invariants,  quantizer_contract, geometry_suite,    convexity_properties,
      single_node_contraction, random_init_cap, end_to_end_accuracy, dimension_scaling,
      method_comparison, warm_start_bound,
  };
  return all;
}

}  // namespace

int acceptance_criterion_count() { return static_cast<int>(criteria().size()); }

std::vector<CriterionResult> run_acceptance(const std::vector<int>& only) {
  std::vector<CriterionResult> results;
  for (std::size_t i = 0; i < criteria().size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = criteria()[i]();
    } catch (const std::exception& e) {
      res.id = id;
      res.title = "criterion " + std::to_string(id);
      res.detail = std::string("exception: ") + e.what();
    }
    res.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (res.time_limit > 0 && res.seconds > res.time_limit) {
      res.passed = false;
      res.detail += "; exceeded time limit of " + fmt(res.time_limit) + " s";
    }
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace qrgd

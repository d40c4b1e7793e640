#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "qrgd/harness.hpp"
#include "qrgd/initialization.hpp"
#include "qrgd/protocol.hpp"

namespace qrgd {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::int64_t kScalarBits = 64;

template <typename T>
std::optional<T> optional_field(const json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return obj.at(key).get<T>();
}

SyntheticSpec parse_synthetic(const json& j) {
  const auto dim = j.at("dim").get<Eigen::Index>();
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto seed = j.value("seed", std::uint64_t{0});
  if (j.contains("eigenvalues")) {
    return SyntheticSpec{dim, rows, j.at("eigenvalues").get<std::vector<double>>(), seed};
  }
  return SyntheticSpec::with_gap(dim, rows, j.value("lambda1", 1.0), j.at("gap_ratio").get<double>(),
                                 j.value("tail_floor", 0.0), seed);
}

MethodSpec parse_method(const json& j) {
  MethodSpec m;
  m.method = j.at("method").get<std::string>();
  if (m.method != "quantized_rgd") parse_baseline_method(m.method);  // validates the name
  m.label = j.value("label", m.method);
  m.bits_per_coord = optional_field<int>(j, "bits_per_coord");
  m.step_size = optional_field<double>(j, "step_size");
  m.step_scale = optional_field<double>(j, "step_scale");
  m.rounds = optional_field<int>(j, "rounds");
  const std::string radius = j.value("power_radius", std::string("a_priori"));
  if (radius == "a_priori") {
    m.power_radius = PowerRadius::a_priori;
  } else if (radius == "adaptive") {
    m.power_radius = PowerRadius::adaptive;
  } else {
    throw std::invalid_argument("config: power_radius must be a_priori or adaptive");
  }
  return m;
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

double resolve_step(const MethodSpec& m, double gamma) {
  if (m.step_size) return *m.step_size;
  if (m.step_scale) return *m.step_scale / gamma;
  throw std::invalid_argument("config: method '" + m.label + "' needs step_size or step_scale");
}

int resolve_rounds(const MethodSpec& m) {
  if (!m.rounds) throw std::invalid_argument("config: method '" + m.label + "' needs rounds");
  return *m.rounds;
}

/// Charges the initialization cost to a baseline trace as setup bits.
void add_init_bits(Trajectory& trace, std::int64_t bits) {
  trace.ledger.charge_setup(bits);
  for (auto& r : trace.records) r.cumulative_bits += bits;
}

ordered_json summary_json(const ExperimentSummary& s) {
  ordered_json out;
  out["status"] = s.ok ? "ok" : "failed";
  if (!s.ok) out["error"] = s.error;
  out["lambda1"] = s.lambda1;
  out["gap"] = s.gap;
  out["methods"] = ordered_json::array();
  for (const auto& m : s.methods) {
    ordered_json jm;
    jm["method"] = m.label;
    jm["mean_final_cost"] = m.mean_final_cost;
    jm["std_final_cost"] = m.std_final_cost;
    jm["mean_final_dist"] = m.mean_final_dist;
    jm["runs"] = ordered_json::array();
    for (const auto& r : m.runs) {
      jm["runs"].push_back(ordered_json{{"seed", r.seed},
                                        {"final_cost", r.final_cost},
                                        {"final_dist", r.final_dist},
                                        {"total_bits", r.total_bits},
                                        {"rounds", r.rounds}});
    }
    out["methods"].push_back(std::move(jm));
  }
  return out;
}

void finalize_statistics(MethodSummary& m) {
  const double count = static_cast<double>(m.runs.size());
  if (m.runs.empty()) return;
  double cost_sum = 0;
  double dist_sum = 0;
  for (const auto& r : m.runs) {
    cost_sum += r.final_cost;
    dist_sum += r.final_dist;
  }
  m.mean_final_cost = cost_sum / count;
  m.mean_final_dist = dist_sum / count;
  double sq = 0;
  for (const auto& r : m.runs) sq += (r.final_cost - m.mean_final_cost) * (r.final_cost - m.mean_final_cost);
  m.std_final_cost = m.runs.size() > 1 ? std::sqrt(sq / (count - 1.0)) : 0.0;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  const json j = json::parse(text);
  RunConfig cfg;
  const json& data = j.at("data");
  if (data.contains("csv")) {
    cfg.csv_path = data.at("csv").get<std::string>();
  } else if (data.contains("synthetic")) {
    cfg.synthetic = parse_synthetic(data.at("synthetic"));
  } else {
    throw std::invalid_argument("config: data needs either 'csv' or 'synthetic'");
  }
  cfg.center = data.value("center", false);
  for (const auto& m : j.at("methods")) cfg.methods.push_back(parse_method(m));
  if (cfg.methods.empty()) throw std::invalid_argument("config: no methods");
  cfg.n_nodes = j.value("n_nodes", 1);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  cfg.failure_prob = j.value("failure_prob", cfg.failure_prob);
  const std::string init = j.value("init", std::string("random"));
  if (init == "random") {
    cfg.init = InitScheme::random;
  } else if (init == "warm_start") {
    cfg.init = InitScheme::warm_start;
  } else {
    throw std::invalid_argument("config: init must be random or warm_start");
  }
  cfg.quant_lower_bound = j.value("quant_lower_bound", cfg.quant_lower_bound);
  cfg.gap_lower_bound = optional_field<double>(j, "gap_lower_bound");
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.repeats = j.value("repeats", 1);
  cfg.output = j.value("output", std::string("results"));
  if (cfg.n_nodes < 1) throw std::invalid_argument("config: n_nodes must be >= 1");
  if (!(cfg.epsilon > 0)) throw std::invalid_argument("config: epsilon must be positive");
  if (cfg.repeats < 1) throw std::invalid_argument("config: repeats must be >= 1");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

ExperimentSummary run_experiment(const RunConfig& config) {
  ExperimentSummary summary;
  std::filesystem::create_directories(config.output);
  for (const auto& m : config.methods) summary.methods.push_back(MethodSummary{m.label, {}, 0, 0, 0});

  try {
    Eigen::MatrixXd rows =
        config.csv_path ? ingest_csv(*config.csv_path) : synth_instance(*config.synthetic).rows;
    if (config.center) rows.rowwise() -= rows.colwise().mean();
    const std::vector<Shard> shards = partition_rows(rows, config.n_nodes, config.seed);
    const Spectrumd spectrum = reference_spectrum(assemble_global(shards));
    summary.lambda1 = spectrum.eigenvalues(0);
    summary.gap = spectrum.gap;
    const double gamma = over_approx_smoothness(shards);
    const double mu = config.gap_lower_bound.value_or(spectrum.gap) / 2.0;
    const auto workers = static_cast<std::int64_t>(shards.size() - 1);

    for (int rep = 0; rep < config.repeats; ++rep) {
      const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(rep);
      BitLedger init_ledger;
      const InitResult init =
          config.init == InitScheme::random
              ? random_init(rows.cols(), gamma, config.failure_prob, seed)
              : warm_start(shards, 0, config.quant_lower_bound, init_ledger);
      // A random start costs one broadcast seed.
      const std::int64_t init_bits =
          config.init == InitScheme::random ? workers * kScalarBits : init.init_bits;

      for (std::size_t k = 0; k < config.methods.size(); ++k) {
        const MethodSpec& m = config.methods[k];
        Trajectory trace{m.label, {}, {}, init.point};
        if (m.method == "quantized_rgd" && !m.bits_per_coord) {
          const ScheduleParams params =
              build_schedule(gamma, mu, init.init_radius, init.suggested_eta, config.epsilon);
          trace = to_trajectory(run(shards, init.point, params, init_bits), m.label);
        } else if (m.method == "quantized_rgd") {
          trace = run_budgeted(shards, init.point,
                               BudgetOptions{resolve_step(m, gamma), resolve_rounds(m),
                                             *m.bits_per_coord},
                               init_bits);
          trace.method = m.label;
        } else {
          BaselineConfig bc;
          bc.method = parse_baseline_method(m.method);
          bc.bits_per_coord = m.bits_per_coord.value_or(64);
          bc.rounds = resolve_rounds(m);
          bc.step_size = bc.method == BaselineMethod::quantized_power_iteration
                             ? 0.0
                             : resolve_step(m, gamma);
          bc.power_radius = m.power_radius;
          trace = run_baseline(bc, shards, init.point);
          trace.method = m.label;
          add_init_bits(trace, init_bits);
        }

        const std::string stem = m.label + "_seed" + std::to_string(seed);
        std::ostringstream csv;
        std::ostringstream jsonl;
        write_trace_csv(csv, std::span<const Trajectory>(&trace, 1));
        write_trace_jsonl(jsonl, std::span<const Trajectory>(&trace, 1));
        write_atomically(config.output / (stem + ".csv"), csv.str());
        write_atomically(config.output / (stem + ".jsonl"), jsonl.str());

        const RoundRecord& last = trace.records.back();
        summary.methods[k].runs.push_back(RunSummary{m.label, seed, last.cost, last.dist,
                                                     trace.ledger.total(), last.t});
      }
    }
  } catch (const std::exception& e) {
    summary.ok = false;
    summary.error = e.what();
  }
  for (auto& m : summary.methods) finalize_statistics(m);
  write_atomically(config.output / "summary.json", summary_json(summary).dump(2) + "\n");
  return summary;
}

}  // namespace qrgd

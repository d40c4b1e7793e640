#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qrgd/baselines.hpp"
#include "qrgd/objective.hpp"

namespace qrgd {

/// Reads a rectangular numeric CSV. A first row made only of non-numeric
/// cells is taken as a header and skipped.
Eigen::MatrixXd ingest_csv(const std::filesystem::path& path);

/// Contiguous row blocks whose sizes differ by at most one, larger blocks
/// first. With `shuffle` the rows are first permuted by `seed`.
std::vector<Shard> partition_rows(const Eigen::MatrixXd& rows, int n_nodes, std::uint64_t seed,
                                  bool shuffle = false);

/// Population spectrum for synthetic rows.
struct SyntheticSpec {
  Eigen::Index dim = 0;
  Eigen::Index rows = 0;
  std::vector<double> eigenvalues;  // descending, length dim
  std::uint64_t seed = 0;

  /// lambda_1, lambda_2 = lambda_1 (1 - gap_ratio), then a linear decay down
  /// to tail_floor * lambda_1.
  static SyntheticSpec with_gap(Eigen::Index dim, Eigen::Index rows, double lambda1,
                                double gap_ratio, double tail_floor, std::uint64_t seed);
};

struct SyntheticInstance {
  Eigen::MatrixXd rows;
  Eigen::MatrixXd rotation;  // Q
  Spectrumd spectrum;        // of the realized rows^T rows
  int attempts = 1;
};

/// Rows i.i.d. N(0, Q diag(eigenvalues) Q^T / rows) for a seeded random
/// orthogonal Q. A realized covariance without an eigengap is redrawn.
SyntheticInstance synth_instance(const SyntheticSpec& spec);

enum class InitScheme { random, warm_start };

/// One method of an experiment. Quantized descent on the certified radius schedule is
/// `quantized_rgd` without bits_per_coord.
struct MethodSpec {
  std::string method;  // quantized_rgd or a baseline name
  std::string label;   // file stem, defaults to method
  std::optional<int> bits_per_coord;
  std::optional<double> step_size;   // absolute
  std::optional<double> step_scale;  // step size in units of 1 / gamma
  std::optional<int> rounds;
  PowerRadius power_radius = PowerRadius::a_priori;
};

struct RunConfig {
  std::vector<MethodSpec> methods;
  std::optional<std::filesystem::path> csv_path;
  std::optional<SyntheticSpec> synthetic;
  bool center = false;
  int n_nodes = 1;
  double epsilon = 1e-3;  // absolute, in intrinsic distance
  double failure_prob = 0.1;
  InitScheme init = InitScheme::random;
  double quant_lower_bound = 0.5;
  std::optional<double> gap_lower_bound;  // defaults to the realized eigengap
  std::uint64_t seed = 0;
  int repeats = 1;
  std::filesystem::path output = "results";
};

/// Parses a JSON run configuration.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

struct RunSummary {
  std::string label;
  std::uint64_t seed = 0;
  double final_cost = 0;
  double final_dist = 0;
  std::int64_t total_bits = 0;
  int rounds = 0;
};

struct MethodSummary {
  std::string label;
  std::vector<RunSummary> runs;
  double mean_final_cost = 0;
  double std_final_cost = 0;  // sample standard deviation
  double mean_final_dist = 0;
};

struct ExperimentSummary {
  bool ok = true;
  std::string error;
  double lambda1 = 0;
  double gap = 0;
  std::vector<MethodSummary> methods;
};

/// Runs every method for every repeat on shared shards, writing one CSV and
/// one JSONL trace per (method, repeat) and summary.json. On failure the
/// summary records the error and whatever completed.
ExperimentSummary run_experiment(const RunConfig& config);

}  // namespace qrgd

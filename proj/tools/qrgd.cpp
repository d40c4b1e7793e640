// Command-line front end: experiments from a JSON config, synthetic data
// generation and the acceptance suite.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qrgd/harness.hpp"
#include "qrgd/trace.hpp"
#include "qrgd/verification.hpp"

namespace {

int run_command(const std::string& config_path) {
  const qrgd::RunConfig config = qrgd::load_run_config(config_path);
  const qrgd::ExperimentSummary summary = qrgd::run_experiment(config);
  if (!summary.ok) {
    std::cerr << "qrgd run: " << summary.error << "\n";
    return 1;
  }
  std::cout << "lambda1 " << qrgd::format_number(summary.lambda1) << ", eigengap "
            << qrgd::format_number(summary.gap) << "\n";
  for (const auto& m : summary.methods) {
    std::cout << m.label << ": mean final cost " << qrgd::format_number(m.mean_final_cost)
              << " (std " << qrgd::format_number(m.std_final_cost) << "), mean final dist "
              << qrgd::format_number(m.mean_final_dist) << "\n";
  }
  std::cout << "results in " << config.output.string() << "\n";
  return 0;
}

struct SynthOptions {
  Eigen::Index dim = 20;
  Eigen::Index rows = 10000;
  double lambda1 = 1.0;
  double gap_ratio = 0.5;
  double tail_floor = 0.1;
  std::uint64_t seed = 0;
  std::string csv;
  std::string spectrum;
};

int synth_command(const SynthOptions& opt) {
  const qrgd::SyntheticInstance inst = qrgd::synth_instance(qrgd::SyntheticSpec::with_gap(
      opt.dim, opt.rows, opt.lambda1, opt.gap_ratio, opt.tail_floor, opt.seed));
  {
    std::ofstream out(opt.csv);
    if (!out) throw std::runtime_error("cannot write " + opt.csv);
    for (Eigen::Index c = 0; c < inst.rows.cols(); ++c) out << (c ? "," : "") << "x" << c;
    out << "\n";
    for (Eigen::Index r = 0; r < inst.rows.rows(); ++r) {
      for (Eigen::Index c = 0; c < inst.rows.cols(); ++c) {
        out << (c ? "," : "") << qrgd::format_number(inst.rows(r, c));
      }
      out << "\n";
    }
  }
  if (!opt.spectrum.empty()) {
    nlohmann::ordered_json j;
    j["eigenvalues"] = std::vector<double>(inst.spectrum.eigenvalues.begin(),
                                           inst.spectrum.eigenvalues.end());
    j["gap"] = inst.spectrum.gap;
    j["leading_vector"] = std::vector<double>(inst.spectrum.leading_vector.coords().begin(),
                                              inst.spectrum.leading_vector.coords().end());
    j["attempts"] = inst.attempts;
    std::ofstream out(opt.spectrum);
    if (!out) throw std::runtime_error("cannot write " + opt.spectrum);
    out << j.dump(2) << "\n";
  }
  return 0;
}

int verify_command(const std::vector<int>& only) {
  const auto results = qrgd::run_acceptance(only);
  int failed = 0;
  for (const auto& r : results) {
    std::printf("[%s] C%d %s (%.1f s) %s\n", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str(),
                r.seconds, r.detail.c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized Riemannian gradient descent for the leading eigenvector"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("config", config_path, "Path to the JSON config")->required()->check(CLI::ExistingFile);

  SynthOptions synth_opt;
  auto* synth = app.add_subcommand("synth", "Write synthetic Gaussian rows with a chosen eigengap");
  synth->add_option("--dim", synth_opt.dim, "Dimension")->check(CLI::Range(2, 1 << 20));
  synth->add_option("--rows", synth_opt.rows, "Number of rows")->check(CLI::PositiveNumber);
  synth->add_option("--lambda1", synth_opt.lambda1, "Leading population eigenvalue");
  synth->add_option("--gap-ratio", synth_opt.gap_ratio, "(lambda1 - lambda2) / lambda1");
  synth->add_option("--tail-floor", synth_opt.tail_floor, "Smallest eigenvalue / lambda1");
  synth->add_option("--seed", synth_opt.seed, "Random seed");
  synth->add_option("--csv", synth_opt.csv, "Output CSV")->required();
  synth->add_option("--spectrum", synth_opt.spectrum, "Optional JSON with the realized spectrum");

  std::vector<int> only;
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  verify->add_option("--only", only, "Criterion ids to run")->delimiter(',');

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return run_command(config_path);
    if (*synth) return synth_command(synth_opt);
    if (*verify) return verify_command(only);
  } catch (const std::exception& e) {
    std::cerr << "qrgd: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

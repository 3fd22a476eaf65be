// psens command-line front end: simulate, estimate, study, oracle.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "psens/csv_io.hpp"
#include "psens/error.hpp"
#include "psens/harness.hpp"
#include "psens/simulators.hpp"

namespace {

using psens::Error;
using psens::ErrorCode;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<Eigen::Index> parse_integers(const std::string& text, const char* flag) {
  std::vector<Eigen::Index> out;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(Eigen::Index(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Config, std::string(flag) + ": '" + item + "' is not an integer");
    }
  }
  return out;
}

struct Options {
  std::string simulator;
  std::string input_csv;
  std::string n = "900";
  std::string partition_sizes;
  std::string estimators = "freq-pdf,freq-cdf";
  std::string measures = "eta,delta,beta";
  std::string inputs;
  int draws = 0;
  long long burn_in = -1;
  std::uint64_t seed = 1;
  int replicates = 100;
  std::string out;
  std::string resample = "bootstrap";
  std::string sequence = "sobol";
  bool timing = false;
};

psens::RunConfig to_config(const Options& o, psens::RunMode mode) {
  psens::RunConfig c;
  c.mode = mode;
  if (!o.simulator.empty()) c.simulator = psens::parse_simulator(o.simulator);
  if (!o.input_csv.empty()) c.input_csv = o.input_csv;
  c.sample_sizes = parse_integers(o.n, "--n");
  c.partition_sizes = parse_integers(o.partition_sizes, "--M");
  c.estimators.clear();
  for (const auto& e : split_list(o.estimators)) c.estimators.push_back(psens::parse_estimator(e));
  c.measures.clear();
  for (const auto& m : split_list(o.measures)) c.measures.push_back(psens::parse_measure(m));
  for (auto i : parse_integers(o.inputs, "--inputs")) {
    if (i < 1) throw Error(ErrorCode::Config, "--inputs are 1-based");
    c.inputs.push_back(i - 1);
  }
  if (o.draws > 0) c.posterior_draws = o.draws;
  if (o.burn_in >= 0) c.burn_in = o.burn_in;
  c.seed = o.seed;
  c.replicates = o.replicates;
  if (o.resample == "bootstrap") {
    c.resample = psens::Resample::Bootstrap;
  } else if (o.resample == "fresh") {
    c.resample = psens::Resample::Fresh;
  } else {
    throw Error(ErrorCode::Config, "--resample must be bootstrap or fresh");
  }
  if (o.sequence == "sobol") {
    c.sequence = psens::Sequence::QuasiRandom;
  } else if (o.sequence == "prng") {
    c.sequence = psens::Sequence::PseudoRandom;
  } else {
    throw Error(ErrorCode::Config, "--sequence must be sobol or prng");
  }
  if (!o.out.empty()) c.output_dir = o.out;
  c.record_timing = o.timing;
  return c;
}

void add_common(CLI::App* cmd, Options& o, bool with_estimators) {
  cmd->add_option("--simulator", o.simulator, "Built-in simulator: gamma-ratio-2 | linear-21");
  cmd->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--sequence", o.sequence, "Input design: sobol | prng")->capture_default_str();
  if (!with_estimators) return;
  cmd->add_option("--input-csv", o.input_csv, "Sample CSV with header x1,...,xk,y");
  cmd->add_option("--M", o.partition_sizes, "Partition sizes, comma list (default 2.5 n^(1/3))");
  cmd->add_option("--estimators", o.estimators, "freq-pdf,freq-cdf,bb,pu,bnj,bnc")->capture_default_str();
  cmd->add_option("--measures", o.measures, "eta,delta,beta")->capture_default_str();
  cmd->add_option("--inputs", o.inputs, "1-based input indices, comma list (default all)");
  cmd->add_option("--S", o.draws, "Posterior draws (default 100 for bb/pu, 1000 for bnj/bnc)");
  cmd->add_option("--burn-in", o.burn_in, "MCMC burn-in sweeps (default 10 n)");
  cmd->add_flag("--timing", o.timing, "Fill the wall_ms column (makes results run-dependent)");
}

void print_oracle(psens::SimulatorKind kind) {
  const auto spec = psens::simulator_spec(kind);
  const auto table = psens::oracle_values(spec);
  std::printf("input,eta,delta,beta\n");
  for (Eigen::Index i = 0; i < spec.k(); ++i)
    std::printf("x%ld,%.3f,%.3f,%.3f\n", long(i + 1), table[i].eta, table[i].delta, table[i].beta);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic sensitivity measures (eta, delta, beta) from a single sample"};
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "Generate a sample CSV from a built-in simulator");
  add_common(simulate, o, false);
  simulate->add_option("--n", o.n, "Sample size")->capture_default_str();

  auto* estimate = app.add_subcommand("estimate", "Run estimators on one sample");
  add_common(estimate, o, true);
  estimate->add_option("--n", o.n, "Sample size (built-in simulator)")->capture_default_str();

  auto* study = app.add_subcommand("study", "Replication RMSE study over n x M");
  add_common(study, o, true);
  study->add_option("--n", o.n, "Sample sizes, comma list")->capture_default_str();
  study->add_option("--replicates", o.replicates, "Replicates per cell")->capture_default_str();
  study->add_option("--resample", o.resample, "bootstrap | fresh")->capture_default_str();

  auto* oracle = app.add_subcommand("oracle", "Print the analytical measure values");
  oracle->add_option("--simulator", o.simulator, "gamma-ratio-2 | linear-21")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*oracle) {
      print_oracle(psens::parse_simulator(o.simulator));
      return 0;
    }
    if (*simulate) {
      if (o.simulator.empty()) throw Error(ErrorCode::Config, "simulate needs --simulator");
      const auto config = to_config(o, psens::RunMode::Estimate);
      const auto spec = psens::simulator_spec(*config.simulator);
      const auto sample = psens::generate_sample(spec, config.sample_sizes.at(0), config.seed, config.sequence);
      if (config.output_dir) {
        std::filesystem::create_directories(*config.output_dir);
        psens::write_sample_csv(sample, *config.output_dir / "sample.csv");
      } else {
        psens::write_sample_csv(sample, std::cout);
      }
      return 0;
    }
    const auto config = to_config(o, *study ? psens::RunMode::Study : psens::RunMode::Estimate);
    const auto result = psens::run(config);
    psens::write_results_csv(result, std::cout);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    return 0;
  } catch (const Error& e) {
    std::cerr << "error [" << psens::to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

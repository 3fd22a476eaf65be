#ifndef PSENS_HARNESS_HPP
#define PSENS_HARNESS_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psens/measures.hpp"
#include "psens/sample.hpp"
#include "psens/simulators.hpp"

namespace psens {

enum class EstimatorKind { FreqPdf, FreqCdf, Bb, Pu, Bnj, Bnc };

// CLI spellings: freq-pdf, freq-cdf, bb, pu, bnj, bnc.
std::string_view to_string(EstimatorKind e);
EstimatorKind parse_estimator(std::string_view text);
bool uses_partition(EstimatorKind e);
// The pdf-based frequentist family has no Kolmogorov-Smirnov estimator.
bool supports(EstimatorKind e, MeasureKind m);

// gamma-ratio-2, linear-21.
SimulatorKind parse_simulator(std::string_view text);
std::string_view simulator_name(SimulatorKind kind);
SimulatorSpec simulator_spec(SimulatorKind kind);

enum class Resample { Bootstrap, Fresh };
enum class RunMode { Estimate, Study };

struct RunConfig {
  RunMode mode = RunMode::Estimate;
  std::optional<SimulatorKind> simulator;
  std::optional<std::filesystem::path> input_csv;
  std::vector<Eigen::Index> inputs;  // 0-based; empty means every input
  std::vector<EstimatorKind> estimators;
  std::vector<MeasureKind> measures{MeasureKind::Eta, MeasureKind::Delta, MeasureKind::Beta};
  std::vector<Eigen::Index> sample_sizes{900};   // estimate uses the first
  std::vector<Eigen::Index> partition_sizes;     // empty: heuristic_partition_size(n)
  std::optional<int> posterior_draws;            // S; default 100 (Bb/Pu), 1000 (BNJ/BNC)
  std::optional<Eigen::Index> burn_in;           // default 10 n
  std::uint64_t seed = 1;
  int replicates = 100;                          // study only
  Resample resample = Resample::Bootstrap;
  Sequence sequence = Sequence::QuasiRandom;
  std::optional<std::filesystem::path> output_dir;
  bool record_timing = false;  // wall_ms stays empty otherwise, keeping outputs reproducible

  // Throws Error(Config) on an inconsistent configuration.
  void validate() const;
};

struct ResultRow {
  EstimatorKind estimator = EstimatorKind::FreqPdf;
  MeasureKind measure = MeasureKind::Eta;
  Eigen::Index input = 0;
  std::string input_name;
  Eigen::Index n = 0;
  std::optional<Eigen::Index> bins;
  double point = 0.0;
  std::optional<double> lo95;
  std::optional<double> hi95;
  std::optional<double> rmse_pct;
  std::optional<Eigen::Index> replicates;
  std::optional<double> wall_ms;
  // Posterior draws (Bayesian estimate) or replicate estimates (study).
  Eigen::VectorXd draws;
};

struct StudyResult {
  std::vector<ResultRow> rows;
  std::vector<std::string> warnings;
};

// round(2.5 n^(1/3)) clamped to [2, n / 10]; below n = 20 the ten-per-bin cap
// cannot be met and the upper bound is n.
Eigen::Index heuristic_partition_size(Eigen::Index n);

// Every selected estimator on one sample. input_laws supplies f_X for the
// partition-free estimators.
void estimate_sample(const Sample& sample, const SimulatorSpec& input_laws, const RunConfig& config,
                     std::uint64_t seed, StudyResult& out);

// Replication study over config.sample_sizes x partition sizes: each replicate
// resamples rows of the base sample (or draws a fresh one), re-partitions and
// re-estimates. point / lo95 / hi95 summarize the replicate estimates and
// rmse_pct = 100 sqrt(mean (estimate - truth)^2) / truth when an oracle exists.
StudyResult rmse_study(const RunConfig& config, int replicates);

// Executes config.mode and, when output_dir is set, persists results.csv,
// draws/*.csv and manifest.json. A failure still persists the rows obtained so
// far with status "failed" in the manifest, then rethrows.
StudyResult run(const RunConfig& config);

inline constexpr std::string_view kResultsHeader =
    "estimator,measure,input,n,M,point,lo95,hi95,rmse_pct,replicates,wall_ms";

void write_results_csv(const StudyResult& result, std::ostream& out);

}  // namespace psens

#endif  // PSENS_HARNESS_HPP

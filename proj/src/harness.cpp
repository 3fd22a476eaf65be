#include "psens/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "psens/bayes_partition.hpp"
#include "psens/bnc.hpp"
#include "psens/bnj.hpp"
#include "psens/csv_io.hpp"
#include "psens/error.hpp"
#include "psens/frequentist.hpp"
#include "psens/partition.hpp"
#include "psens/rng.hpp"

#ifndef PSENS_VERSION
#define PSENS_VERSION "unknown"
#endif

namespace psens {

std::string_view to_string(EstimatorKind e) {
  switch (e) {
    case EstimatorKind::FreqPdf:
      return "freq-pdf";
    case EstimatorKind::FreqCdf:
      return "freq-cdf";
    case EstimatorKind::Bb:
      return "bb";
    case EstimatorKind::Pu:
      return "pu";
    case EstimatorKind::Bnj:
      return "bnj";
    case EstimatorKind::Bnc:
      return "bnc";
  }
  return "?";
}

EstimatorKind parse_estimator(std::string_view text) {
  for (auto e : {EstimatorKind::FreqPdf, EstimatorKind::FreqCdf, EstimatorKind::Bb,
                 EstimatorKind::Pu, EstimatorKind::Bnj, EstimatorKind::Bnc})
    if (text == to_string(e)) return e;
  throw Error(ErrorCode::Config, "unknown estimator '" + std::string(text) +
                                     "' (expected freq-pdf, freq-cdf, bb, pu, bnj or bnc)");
}

bool uses_partition(EstimatorKind e) {
  return e != EstimatorKind::Bnj && e != EstimatorKind::Bnc;
}

bool supports(EstimatorKind e, MeasureKind m) {
  return !(e == EstimatorKind::FreqPdf && m == MeasureKind::Beta);
}

SimulatorKind parse_simulator(std::string_view text) {
  if (text == "gamma-ratio-2") return SimulatorKind::GammaRatio2;
  if (text == "linear-21") return SimulatorKind::CorrelatedLinear21;
  throw Error(ErrorCode::Config, "unknown simulator '" + std::string(text) +
                                     "' (expected gamma-ratio-2 or linear-21)");
}

std::string_view simulator_name(SimulatorKind kind) {
  switch (kind) {
    case SimulatorKind::GammaRatio2:
      return "gamma-ratio-2";
    case SimulatorKind::CorrelatedLinear21:
      return "linear-21";
    case SimulatorKind::ExternalCsv:
      break;
  }
  return "external-csv";
}

SimulatorSpec simulator_spec(SimulatorKind kind) {
  switch (kind) {
    case SimulatorKind::GammaRatio2:
      return gamma_ratio_2();
    case SimulatorKind::CorrelatedLinear21:
      return correlated_linear_21();
    case SimulatorKind::ExternalCsv:
      break;
  }
  throw Error(ErrorCode::Config, "external samples have no built-in simulator");
}

void RunConfig::validate() const {
  if (simulator.has_value() == input_csv.has_value())
    throw Error(ErrorCode::Config, "give exactly one of a simulator or an input CSV");
  if (simulator && *simulator == SimulatorKind::ExternalCsv)
    throw Error(ErrorCode::Config, "the external-csv kind is selected through an input CSV");
  if (estimators.empty()) throw Error(ErrorCode::Config, "select at least one estimator");
  if (measures.empty()) throw Error(ErrorCode::Config, "select at least one measure");
  const bool partitioned = std::any_of(estimators.begin(), estimators.end(), uses_partition);
  if (!partitioned && !partition_sizes.empty())
    throw Error(ErrorCode::Config, "partition sizes given but no partition estimator selected");
  for (auto m : partition_sizes)
    if (m < 1) throw Error(ErrorCode::Config, "partition sizes must be positive");
  if (!input_csv) {
    if (sample_sizes.empty()) throw Error(ErrorCode::Config, "give a sample size");
    for (auto n : sample_sizes)
      if (n < 10) throw Error(ErrorCode::Config, "sample sizes must be at least 10");
  }
  for (auto i : inputs)
    if (i < 0) throw Error(ErrorCode::Config, "input indices must be positive");
  if (posterior_draws && *posterior_draws < 1)
    throw Error(ErrorCode::Config, "S must be at least 1");
  if (burn_in && *burn_in < 0) throw Error(ErrorCode::Config, "burn-in must be non-negative");
  if (mode == RunMode::Study) {
    if (replicates < 2) throw Error(ErrorCode::Config, "a study needs at least 2 replicates");
    if (input_csv && resample == Resample::Fresh)
      throw Error(ErrorCode::Config, "fresh resampling needs a built-in simulator");
  }
}

Eigen::Index heuristic_partition_size(Eigen::Index n) {
  if (n < 8) throw Error(ErrorCode::Size, "the partition heuristic needs n >= 8");
  const auto m = Eigen::Index(std::lround(2.5 * std::cbrt(double(n))));
  const Eigen::Index upper = n >= 20 ? n / 10 : n;
  return std::clamp<Eigen::Index>(m, 2, upper);
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::uint64_t estimator_tag(EstimatorKind e) { return 0xE50 + std::uint64_t(e); }

std::vector<Eigen::Index> resolve_inputs(const RunConfig& config, const Sample& sample) {
  std::vector<Eigen::Index> inputs = config.inputs;
  if (inputs.empty())
    for (Eigen::Index i = 0; i < sample.k(); ++i) inputs.push_back(i);
  for (auto i : inputs)
    if (i >= sample.k())
      throw Error(ErrorCode::Config, "input " + std::to_string(i + 1) + " does not exist (k = " +
                                         std::to_string(sample.k()) + ")");
  return inputs;
}

ResultRow make_row(EstimatorKind e, MeasureKind m, const Sample& sample, Eigen::Index input,
                   std::optional<Eigen::Index> bins) {
  ResultRow row;
  row.estimator = e;
  row.measure = m;
  row.input = input;
  row.input_name = sample.input_names()[std::size_t(input)];
  row.n = sample.n();
  row.bins = bins;
  return row;
}

void attach_draws(ResultRow& row, const Eigen::VectorXd& draws) {
  const DrawSummary s = summarize_draws(draws);
  row.point = s.mean;
  row.lo95 = s.lo95;
  row.hi95 = s.hi95;
  row.replicates = draws.size();
  row.draws = draws;
}

double frequentist_value(EstimatorKind e, MeasureKind m, const Sample& sample,
                         const Partition& partition) {
  const bool pdf = e == EstimatorKind::FreqPdf;
  switch (m) {
    case MeasureKind::Eta:
      return (pdf ? eta_star(sample, partition) : eta_diamond(sample, partition)).value;
    case MeasureKind::Delta: {
      const Grid grid = output_grid(sample, partition);
      return (pdf ? delta_star(sample, partition, grid) : delta_diamond(sample, partition, grid)).value;
    }
    case MeasureKind::Beta:
      break;
  }
  if (pdf) throw Error(ErrorCode::Unsupported, "no pdf-based beta estimator");
  return beta_diamond(sample, partition).value;
}

}  // namespace

void estimate_sample(const Sample& sample, const SimulatorSpec& input_laws, const RunConfig& config,
                     std::uint64_t seed, StudyResult& out) {
  const auto inputs = resolve_inputs(config, sample);
  std::vector<Eigen::Index> sizes = config.partition_sizes;
  if (sizes.empty()) sizes.push_back(heuristic_partition_size(sample.n()));

  for (const EstimatorKind e : config.estimators) {
    for (const Eigen::Index i : inputs) {
      if (!uses_partition(e)) {
        const auto start = std::chrono::steady_clock::now();
        const Eigen::Index s = config.posterior_draws.value_or(1000);
        const Eigen::Index burn = config.burn_in.value_or(10 * sample.n());
        const std::uint64_t chain_seed = derive_seed(seed, {estimator_tag(e), std::uint64_t(i)});
        const Marginal& law = input_laws.marginals.at(std::size_t(i));
        MeasureDrawSet set;
        if (e == EstimatorKind::Bnj) {
          set = bnj_measures(fit_bnj(sample, i, default_bnj_prior(sample, i), burn, s, chain_seed), law);
        } else {
          set = bnc_measures(fit_bnc(sample, i, default_bnc_prior(sample, i), burn, s, chain_seed), law);
        }
        const double ms = elapsed_ms(start);
        for (const auto& msg : set.skipped)
          out.warnings.push_back(std::string(to_string(e)) + " " +
                                 sample.input_names()[std::size_t(i)] + ": " + msg);
        for (const MeasureKind m : config.measures) {
          ResultRow row = make_row(e, m, sample, i, std::nullopt);
          attach_draws(row, set.draws(m));
          if (config.record_timing) row.wall_ms = ms;
          out.rows.push_back(std::move(row));
        }
        continue;
      }

      for (const Eigen::Index bins : sizes) {
        const Partition partition = make_equiprobable_partition(sample, i, bins);
        std::optional<DpSpec> dp;
        if (e == EstimatorKind::Bb || e == EstimatorKind::Pu) dp = default_dp_spec(sample, bins);
        const std::uint64_t est_seed =
            derive_seed(seed, {estimator_tag(e), std::uint64_t(i), std::uint64_t(bins)});
        for (const MeasureKind m : config.measures) {
          if (!supports(e, m)) continue;
          const auto start = std::chrono::steady_clock::now();
          ResultRow row = make_row(e, m, sample, i, bins);
          if (dp) {
            const Scheme scheme = e == EstimatorKind::Bb ? Scheme::Bb : Scheme::Pu;
            const int s = config.posterior_draws.value_or(kDefaultPartitionReplicates);
            attach_draws(row, estimate_bayes_partition(sample, partition, *dp, m, scheme, s, est_seed).draws);
          } else {
            row.point = frequentist_value(e, m, sample, partition);
          }
          if (config.record_timing) row.wall_ms = elapsed_ms(start);
          out.rows.push_back(std::move(row));
        }
      }
    }
  }
}

StudyResult rmse_study(const RunConfig& base_config, int replicates) {
  RunConfig config = base_config;
  config.mode = RunMode::Study;
  config.replicates = replicates;
  config.validate();

  StudyResult result;
  std::optional<Sample> csv_sample;
  SimulatorSpec spec;
  if (config.input_csv) {
    csv_sample = ingest_csv(*config.input_csv);
    spec = external_csv(*csv_sample);
  } else {
    spec = simulator_spec(*config.simulator);
  }
  std::optional<OracleTable> oracle;
  try {
    oracle = oracle_values(spec);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoOracle) throw;
    result.warnings.push_back("no analytical values for this sample; rmse_pct left empty");
  }

  std::vector<Eigen::Index> sizes = config.sample_sizes;
  if (csv_sample) sizes = {csv_sample->n()};
  for (const Eigen::Index n : sizes) {
    const Sample base = csv_sample ? *csv_sample : generate_sample(spec, n, config.seed, config.sequence);
    std::vector<ResultRow> keys;
    std::vector<std::vector<double>> estimates;
    for (int r = 0; r < replicates; ++r) {
      const auto ur = std::uint64_t(r), un = std::uint64_t(n);
      std::optional<Sample> rep;
      if (config.resample == Resample::Bootstrap) {
        Rng rng = make_rng(config.seed, {0xB007, un, ur});
        std::vector<Eigen::Index> rows(static_cast<std::size_t>(base.n()));
        for (auto& row : rows) row = Eigen::Index(uniform_open(rng) * double(base.n()));
        rep = base.select_rows(rows);
      } else {
        rep = generate_sample(spec, n, derive_seed(config.seed, {0xF4E5, un, ur}), config.sequence);
      }
      StudyResult one;
      estimate_sample(*rep, spec, config, derive_seed(config.seed, {0x57D, un, ur}), one);
      if (r == 0) {
        keys = one.rows;
        estimates.assign(keys.size(), {});
      }
      if (one.rows.size() != keys.size()) throw Error(ErrorCode::Size, "replicate produced a different row set");
      for (std::size_t j = 0; j < keys.size(); ++j) estimates[j].push_back(one.rows[j].point);
      for (auto& w : one.warnings) result.warnings.push_back("replicate " + std::to_string(r) + ": " + w);
    }

    for (std::size_t j = 0; j < keys.size(); ++j) {
      ResultRow row = keys[j];
      row.wall_ms.reset();
      const Eigen::VectorXd est = Eigen::Map<const Eigen::VectorXd>(estimates[j].data(), replicates);
      attach_draws(row, est);
      if (oracle) {
        const MeasureTriple& t = (*oracle)[row.input];
        const double truth = row.measure == MeasureKind::Eta     ? t.eta
                             : row.measure == MeasureKind::Delta ? t.delta
                                                                 : t.beta;
        if (truth > 0.0) {
          row.rmse_pct = 100.0 * std::sqrt((est.array() - truth).square().mean()) / truth;
        } else {
          result.warnings.push_back("zero analytical value for " + row.input_name + "; rmse_pct left empty");
        }
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <typename T>
std::string optional_field(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) {
    return format_number(*v);
  } else {
    return std::to_string(*v);
  }
}

std::string draw_file_name(const ResultRow& row) {
  std::string name = std::string(to_string(row.estimator)) + "_" + std::string(to_string(row.measure)) +
                     "_" + row.input_name + "_n" + std::to_string(row.n);
  if (row.bins) name += "_M" + std::to_string(*row.bins);
  return name + ".csv";
}

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["mode"] = c.mode == RunMode::Estimate ? "estimate" : "study";
  if (c.simulator) j["simulator"] = std::string(simulator_name(*c.simulator));
  if (c.input_csv) j["input_csv"] = c.input_csv->string();
  std::vector<Eigen::Index> inputs;
  for (auto i : c.inputs) inputs.push_back(i + 1);
  j["inputs"] = inputs;
  std::vector<std::string> est, meas;
  for (auto e : c.estimators) est.emplace_back(to_string(e));
  for (auto m : c.measures) meas.emplace_back(to_string(m));
  j["estimators"] = est;
  j["measures"] = meas;
  j["n"] = c.sample_sizes;
  j["M"] = c.partition_sizes;
  j["S"] = c.posterior_draws ? nlohmann::json(*c.posterior_draws) : nlohmann::json();
  j["burn_in"] = c.burn_in ? nlohmann::json(*c.burn_in) : nlohmann::json();
  j["seed"] = c.seed;
  j["replicates"] = c.replicates;
  j["resample"] = c.resample == Resample::Bootstrap ? "bootstrap" : "fresh";
  j["sequence"] = c.sequence == Sequence::QuasiRandom ? "sobol" : "mt19937_64";
  j["timing"] = c.record_timing;
  return j;
}

void persist(const StudyResult& result, const RunConfig& config, const std::string& status,
             const std::string& error) {
  namespace fs = std::filesystem;
  const fs::path dir = *config.output_dir;
  std::error_code ec;
  fs::create_directories(dir / "draws", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + (dir / "draws").string() + "': " + ec.message());

  {
    std::ofstream out(dir / "results.csv");
    if (!out) throw Error(ErrorCode::Io, "cannot write results.csv in '" + dir.string() + "'");
    write_results_csv(result, out);
  }
  nlohmann::json files = nlohmann::json::array();
  for (const auto& row : result.rows) {
    if (row.draws.size() == 0) continue;
    const std::string name = draw_file_name(row);
    std::ofstream out(dir / "draws" / name);
    if (!out) throw Error(ErrorCode::Io, "cannot write draw file " + name);
    out << (config.mode == RunMode::Study ? "estimate\n" : "draw\n");
    for (Eigen::Index s = 0; s < row.draws.size(); ++s) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", row.draws[s]);
      out << buf << '\n';
    }
    files.push_back("draws/" + name);
  }

  nlohmann::json manifest;
  manifest["tool"] = "psens";
  manifest["version"] = PSENS_VERSION;
  manifest["status"] = status;
  if (!error.empty()) manifest["error"] = error;
  manifest["config"] = config_json(config);
  manifest["seeds"] = {{"master", config.seed},
                       {"derivation", "splitmix64 over key paths: (estimator, input, M) per "
                                      "estimate; (n, replicate) per study replicate"}};
  manifest["results"] = "results.csv";
  manifest["draw_files"] = files;
  manifest["warnings"] = result.warnings;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(ErrorCode::Io, "cannot write manifest.json");
  out << manifest.dump(2) << '\n';
}

}  // namespace

void write_results_csv(const StudyResult& result, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (const auto& r : result.rows) {
    out << to_string(r.estimator) << ',' << to_string(r.measure) << ',' << r.input_name << ','
        << r.n << ',' << optional_field(r.bins) << ',' << format_number(r.point) << ','
        << optional_field(r.lo95) << ',' << optional_field(r.hi95) << ','
        << optional_field(r.rmse_pct) << ',' << optional_field(r.replicates) << ','
        << optional_field(r.wall_ms) << '\n';
  }
}

StudyResult run(const RunConfig& config) {
  config.validate();
  StudyResult result;
  try {
    if (config.mode == RunMode::Study) {
      result = rmse_study(config, config.replicates);
    } else {
      std::optional<Sample> sample;
      SimulatorSpec spec;
      if (config.input_csv) {
        sample = ingest_csv(*config.input_csv);
        spec = external_csv(*sample);
      } else {
        spec = simulator_spec(*config.simulator);
        sample = generate_sample(spec, config.sample_sizes.front(), config.seed, config.sequence);
      }
      estimate_sample(*sample, spec, config, config.seed, result);
    }
  } catch (const std::exception& e) {
    if (config.output_dir) persist(result, config, "failed", e.what());
    throw;
  }
  if (config.output_dir) persist(result, config, "ok", "");
  return result;
}

}  // namespace psens

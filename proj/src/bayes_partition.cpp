#include "psens/bayes_partition.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "psens/ecdf.hpp"
#include "psens/error.hpp"
#include "psens/frequentist.hpp"
#include "psens/kde.hpp"

namespace psens {

std::string_view to_string(Scheme s) { return s == Scheme::Bb ? "bb" : "pu"; }

struct BaseMeasure::QuantileTable {
  static constexpr int kKnots = 4096;
  static constexpr int kExactCells = 16;
  std::vector<double> q;      // Q(j / kKnots)
  std::vector<double> slope;  // Q'(j / kKnots) = 1 / f(Q)
};

BaseMeasure::BaseMeasure(Law law) : law_(std::move(law)) {
  if (const auto* b = std::get_if<BetaBase>(&law_)) {
    if (!(b->a > 0.0 && b->b > 0.0)) throw Error(ErrorCode::Domain, "beta base needs a, b > 0");
    const boost::math::beta_distribution<> dist(b->a, b->b);
    auto table = std::make_shared<QuantileTable>();
    const int k = QuantileTable::kKnots;
    table->q.resize(k + 1);
    table->slope.resize(k + 1);
    for (int j = QuantileTable::kExactCells; j <= k - QuantileTable::kExactCells; ++j) {
      table->q[j] = boost::math::quantile(dist, double(j) / k);
      table->slope[j] = 1.0 / boost::math::pdf(dist, table->q[j]);
    }
    table_ = std::move(table);
  } else if (!(std::get<NormalBase>(law_).sd > 0.0)) {
    throw Error(ErrorCode::Domain, "normal base needs sd > 0");
  }
}

double BaseMeasure::quantile(double p) const {
  if (const auto* b = std::get_if<BetaBase>(&law_))
    return boost::math::quantile(boost::math::beta_distribution<>(b->a, b->b), p);
  const auto& n = std::get<NormalBase>(law_);
  return boost::math::quantile(boost::math::normal_distribution<>(n.mean, n.sd), p);
}

double BaseMeasure::draw(Rng& rng) const {
  const double u = uniform_open(rng);
  if (!table_) return quantile(u);
  const int k = QuantileTable::kKnots;
  const double pos = u * k;
  const int j = int(pos);
  // Q' is unbounded towards 0 and 1; the outer cells are evaluated exactly.
  if (j < QuantileTable::kExactCells || j >= k - QuantileTable::kExactCells) return quantile(u);
  const double t = pos - j;
  const double h = 1.0 / k;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * table_->q[j] + (t3 - 2 * t2 + t) * h * table_->slope[j] +
         (-2 * t3 + 3 * t2) * table_->q[j + 1] + (t3 - t2) * h * table_->slope[j + 1];
}

DpSpec default_dp_spec(const Sample& sample, Eigen::Index bins) {
  if (bins < 1) throw Error(ErrorCode::InvalidPartition, "partition size must be positive");
  DpSpec spec;
  spec.alpha = 0.1 * double(sample.n()) / double(bins);
  const auto& y = sample.y();
  const double m = y.mean();
  const double v = population_variance(y);
  const bool unit = y.minCoeff() > 0.0 && y.maxCoeff() < 1.0;
  if (unit && v > 0.0 && v < m * (1.0 - m)) {
    const double common = m * (1.0 - m) / v - 1.0;
    spec.base = BetaBase{m * common, (1.0 - m) * common};
  } else {
    spec.base = NormalBase{m, v > 0.0 ? std::sqrt(v) : 1.0};
  }
  return spec;
}

namespace {

void check_target(Eigen::Index have, Eigen::Index target) {
  if (have < 1) throw Error(ErrorCode::EmptySample, "cannot augment an empty bin");
  if (target < have)
    throw Error(ErrorCode::Size, "augmentation target " + std::to_string(target) +
                                     " below bin size " + std::to_string(have));
}

Eigen::Index uniform_index(Rng& rng, Eigen::Index size) {
  return std::min<Eigen::Index>(size - 1, Eigen::Index(uniform_open(rng) * double(size)));
}

}  // namespace

Augmentation bb_augment_traced(const Eigen::Ref<const Eigen::VectorXd>& bin_values,
                               Eigen::Index target_size, const DpSpec& spec, Rng& rng) {
  const Eigen::Index nm = bin_values.size();
  check_target(nm, target_size);
  const double p_base = spec.alpha / (spec.alpha + double(nm));
  Augmentation out;
  out.values.resize(target_size - nm);
  for (Eigen::Index j = 0; j < out.values.size(); ++j) {
    if (uniform_open(rng) < p_base) {
      out.values[j] = spec.base.draw(rng);
      ++out.base_draws;
    } else {
      out.values[j] = bin_values[uniform_index(rng, nm)];
    }
  }
  return out;
}

Eigen::VectorXd bb_augment(const Eigen::Ref<const Eigen::VectorXd>& bin_values,
                           Eigen::Index target_size, const DpSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return bb_augment_traced(bin_values, target_size, spec, rng).values;
}

Augmentation pu_augment_traced(const Eigen::Ref<const Eigen::VectorXd>& bin_values,
                               Eigen::Index target_size, const DpSpec& spec, Rng& rng) {
  const Eigen::Index nm = bin_values.size();
  check_target(nm, target_size);
  Eigen::VectorXd urn(target_size);
  urn.head(nm) = bin_values;
  Augmentation out;
  for (Eigen::Index j = nm; j < target_size; ++j) {
    if (uniform_open(rng) < spec.alpha / (spec.alpha + double(j))) {
      urn[j] = spec.base.draw(rng);
      ++out.base_draws;
    } else {
      urn[j] = urn[uniform_index(rng, j)];
    }
  }
  out.values = urn.tail(target_size - nm);
  return out;
}

Eigen::VectorXd pu_augment(const Eigen::Ref<const Eigen::VectorXd>& bin_values,
                           Eigen::Index target_size, const DpSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return pu_augment_traced(bin_values, target_size, spec, rng).values;
}

namespace {

// Output grid that also covers the bulk of the base measure, since synthetic
// draws from G may land outside the observed range.
Grid augmented_output_grid(const Sample& sample, const Partition& partition, const DpSpec& spec) {
  double h = silverman_bandwidth(sample.y());
  for (Eigen::Index m = 0; m < partition.bin_count(); ++m) {
    if (partition.count(m) < 2) continue;
    const auto ym = partition.bin_outputs(sample, m);
    if (sample_sd(ym) > 0.0) h = std::max(h, silverman_bandwidth(ym));
  }
  const double lo = std::min(sample.y().minCoeff(), spec.base.quantile(1e-6));
  const double hi = std::max(sample.y().maxCoeff(), spec.base.quantile(1.0 - 1e-6));
  return Grid::uniform(lo - 3.0 * h, hi + 3.0 * h, kDefaultOutputGridSize);
}

}  // namespace

PosteriorDraws estimate_bayes_partition(const Sample& sample, const Partition& partition,
                                        const DpSpec& spec, MeasureKind measure, Scheme scheme,
                                        int replicates, std::uint64_t seed, Route delta_route) {
  if (replicates < 1) throw Error(ErrorCode::Size, "need at least one replicate");
  if (!(spec.alpha > 0.0)) throw Error(ErrorCode::Domain, "DP concentration must be positive");
  const Eigen::Index n = sample.n();
  if (partition.total() != n)
    throw Error(ErrorCode::InvalidPartition, "partition does not cover the sample");
  const double var_y = population_variance(sample.y());
  if (!(var_y > 0.0)) throw Error(ErrorCode::DegenerateSample, "output variance is zero");
  const double ybar = sample.y().mean();

  std::vector<double> y_sorted(sample.y().data(), sample.y().data() + n);
  std::sort(y_sorted.begin(), y_sorted.end());

  const KernelDensity marg(sample.y());
  const EmpiricalCdf marg_cdf(sample.y());
  std::optional<Grid> grid;
  Eigen::VectorXd f_y;
  if (measure == MeasureKind::Delta) {
    grid = augmented_output_grid(sample, partition, spec);
    f_y = marg.evaluate_binned(*grid);
  }

  std::vector<Eigen::VectorXd> bins;
  for (Eigen::Index m = 0; m < partition.bin_count(); ++m) {
    bins.push_back(partition.bin_outputs(sample, m));
    if (bins.back().size() == 0) throw Error(ErrorCode::InvalidPartition, "empty bin");
  }

  PosteriorDraws out;
  out.input_index = partition.input_index();
  out.measure = measure;
  out.scheme = scheme;
  out.route = measure == MeasureKind::Delta ? delta_route : measure == MeasureKind::Eta
                                                                ? Route::PdfBased
                                                                : Route::CdfBased;
  out.bins = partition.bin_count();
  out.draws.resize(replicates);

  Eigen::VectorXd extended(n);
  for (int s = 0; s < replicates; ++s) {
    double acc = 0.0;
    for (Eigen::Index m = 0; m < partition.bin_count(); ++m) {
      const auto& ym = bins[std::size_t(m)];
      const Eigen::Index nm = ym.size();
      Rng rng = make_rng(seed, {std::uint64_t(s), std::uint64_t(m)});
      const Augmentation aug = scheme == Scheme::Bb ? bb_augment_traced(ym, n, spec, rng)
                                                    : pu_augment_traced(ym, n, spec, rng);
      extended.head(nm) = ym;
      extended.tail(n - nm) = aug.values;
      const double weight = double(nm) / double(n);

      switch (measure) {
        case MeasureKind::Eta: {
          const double gap = extended.mean() - ybar;
          acc += weight * gap * gap / var_y;
          break;
        }
        case MeasureKind::Delta: {
          if (nm == n) break;  // the bin is the whole sample
          const KernelDensity cond(extended);
          const Eigen::VectorXd f_m = cond.evaluate_binned(*grid);
          const double d = delta_route == Route::PdfBased
                               ? half_l1_on_grid(f_m, f_y, *grid)
                               : scheffe_mass_difference(cond, marg, f_m, f_y,
                                                         EmpiricalCdf(extended), marg_cdf, *grid);
          acc += weight * std::clamp(d, 0.0, 1.0);
          break;
        }
        case MeasureKind::Beta: {
          std::vector<double> e(extended.data(), extended.data() + n);
          std::sort(e.begin(), e.end());
          acc += weight * ks_distance_sorted(e, y_sorted);
          break;
        }
      }
    }
    out.draws[s] = acc;
  }
  return out;
}

}  // namespace psens

#include "psens/frequentist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "psens/error.hpp"

namespace psens {

std::string_view to_string(MeasureKind m) {
  switch (m) {
    case MeasureKind::Eta: return "eta";
    case MeasureKind::Delta: return "delta";
    case MeasureKind::Beta: return "beta";
  }
  return "?";
}

MeasureKind parse_measure(std::string_view text) {
  if (text == "eta") return MeasureKind::Eta;
  if (text == "delta") return MeasureKind::Delta;
  if (text == "beta") return MeasureKind::Beta;
  throw Error(ErrorCode::Config, "unknown measure '" + std::string(text) + "'");
}

namespace {

double output_variance(const Sample& sample) {
  const double v = population_variance(sample.y());
  if (!(v > 0.0)) throw Error(ErrorCode::DegenerateSample, "output variance is zero");
  return v;
}

double bin_weight(const Partition& p, Eigen::Index m) {
  return double(p.count(m)) / double(p.total());
}

void require_bins_of_at_least(const Partition& p, Eigen::Index size) {
  for (Eigen::Index m = 0; m < p.bin_count(); ++m) {
    if (p.count(m) < size)
      throw Error(size <= 1 ? ErrorCode::InvalidPartition : ErrorCode::PartitionTooFine,
                  "bin " + std::to_string(m) + " has " + std::to_string(p.count(m)) +
                      " members, need " + std::to_string(size));
  }
}

std::vector<double> sorted_copy(const Eigen::Ref<const Eigen::VectorXd>& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  return s;
}

PointEstimate make_estimate(const Partition& p, MeasureKind m, Route r, double value) {
  PointEstimate e;
  e.input_index = p.input_index();
  e.measure = m;
  e.route = r;
  e.value = value;
  e.bins = p.bin_count();
  e.exceeds_one = value > 1.0;
  return e;
}

}  // namespace

PointEstimate eta_star(const Sample& sample, const Partition& partition) {
  const double var = output_variance(sample);
  const double ybar = sample.y().mean();
  require_bins_of_at_least(partition, 1);
  double acc = 0.0;
  for (Eigen::Index m = 0; m < partition.bin_count(); ++m) {
    const double gap = partition.bin_outputs(sample, m).mean() - ybar;
    acc += bin_weight(partition, m) * gap * gap;
  }
  return make_estimate(partition, MeasureKind::Eta, Route::PdfBased, acc / var);
}

double step_cdf_gap(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySample, "cdf gap of empty sample");
  const double na = double(a.size()), nb = double(b.size());
  std::size_t i = 0, j = 0;
  double acc = 0.0;
  double prev = std::min(a.front(), b.front());
  double diff = 0.0;  // F_b - F_a just right of prev
  while (i < a.size() || j < b.size()) {
    double v;
    if (i == a.size()) v = b[j];
    else if (j == b.size()) v = a[i];
    else v = std::min(a[i], b[j]);
    acc += diff * (v - prev);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    diff = double(j) / nb - double(i) / na;
    prev = v;
  }
  return acc;
}

PointEstimate eta_diamond(const Sample& sample, const Partition& partition) {
  const double var = output_variance(sample);
  require_bins_of_at_least(partition, 1);
  const auto all = sorted_copy(sample.y());
  double acc = 0.0;
  for (Eigen::Index m = 0; m < partition.bin_count(); ++m) {
    const double gap = step_cdf_gap(sorted_copy(partition.bin_outputs(sample, m)), all);
    acc += bin_weight(partition, m) * gap * gap;
  }
  return make_estimate(partition, MeasureKind::Eta, Route::CdfBased, acc / var);
}

double half_l1_on_grid(const Eigen::Ref<const Eigen::VectorXd>& f1,
                       const Eigen::Ref<const Eigen::VectorXd>& f2, const Grid& grid) {
  return 0.5 * trapezoid((f1 - f2).cwiseAbs(), grid);
}

Grid output_grid(const Sample& sample, const Partition& partition) {
  double h = silverman_bandwidth(sample.y());
  double h_min = h;
  for (Eigen::Index m = 0; m < partition.bin_count(); ++m) {
    if (partition.count(m) < 2) continue;
    const auto ym = partition.bin_outputs(sample, m);
    if (!(sample_sd(ym) > 0.0)) continue;
    const double hm = silverman_bandwidth(ym);
    h = std::max(h, hm);
    h_min = std::min(h_min, hm);
  }
  const double lo = sample.y().minCoeff() - 3.0 * h, hi = sample.y().maxCoeff() + 3.0 * h;
  const double wanted = std::ceil((hi - lo) / (h_min / 4.0)) + 1.0;
  const auto points = Eigen::Index(std::clamp(wanted, double(kDefaultOutputGridSize), double(kMaxOutputGridSize)));
  return Grid::uniform(lo, hi, points);
}

PointEstimate delta_star(const Sample& sample, const Partition& partition, const Grid& grid,
                         DeltaScale scale) {
  require_bins_of_at_least(partition, 2);
  const Eigen::VectorXd f_y = KernelDensity(sample.y()).evaluate(grid);
  const double factor = scale == DeltaScale::HalfL1 ? 1.0 : 2.0;
  double acc = 0.0;
  for (Eigen::Index m = 0; m < partition.bin_count(); ++m) {
    const Eigen::VectorXd f_m = KernelDensity(partition.bin_outputs(sample, m)).evaluate(grid);
    acc += bin_weight(partition, m) * factor * half_l1_on_grid(f_m, f_y, grid);
  }
  return make_estimate(partition, MeasureKind::Delta, Route::PdfBased, acc);
}

double scheffe_mass_difference(const KernelDensity& cond, const KernelDensity& marg,
                               const Eigen::Ref<const Eigen::VectorXd>& cond_on_grid,
                               const Eigen::Ref<const Eigen::VectorXd>& marg_on_grid,
                               const EmpiricalCdf& cond_cdf, const EmpiricalCdf& marg_cdf,
                               const Grid& grid) {
  const Eigen::Index g = grid.size();
  auto excess = [&](double y) { return cond.density(y) - marg.density(y); };
  // Crossing between grid[lo] and grid[lo + 1]; positive_left says which side
  // has cond above marg.
  auto refine = [&](Eigen::Index lo, bool positive_left) {
    double a = grid[lo], b = grid[lo + 1];
    for (int step = 0; step < 10; ++step) {
      const double mid = 0.5 * (a + b);
      ((excess(mid) > 0.0) == positive_left ? a : b) = mid;
    }
    return 0.5 * (a + b);
  };

  double acc = 0.0;
  Eigen::Index i = 0;
  while (i < g) {
    if (!(cond_on_grid[i] > marg_on_grid[i])) {
      ++i;
      continue;
    }
    const Eigen::Index start = i;
    while (i < g && cond_on_grid[i] > marg_on_grid[i]) ++i;
    const Eigen::Index end = i - 1;
    const double lo = start == 0 ? -std::numeric_limits<double>::infinity() : refine(start - 1, false);
    const double hi = end == g - 1 ? std::numeric_limits<double>::infinity() : refine(end, true);
    auto mass = [](const EmpiricalCdf& f, double a, double b) {
      return (std::isinf(b) ? 1.0 : f(b)) - (std::isinf(a) ? 0.0 : f(a));
    };
    acc += mass(cond_cdf, lo, hi) - mass(marg_cdf, lo, hi);
  }
  return std::clamp(acc, 0.0, 1.0);
}

PointEstimate delta_diamond(const Sample& sample, const Partition& partition, const Grid& grid) {
  require_bins_of_at_least(partition, 2);
  const KernelDensity marg(sample.y());
  const Eigen::VectorXd f_y = marg.evaluate(grid);
  const EmpiricalCdf marg_cdf(sample.y());
  double acc = 0.0;
  for (Eigen::Index m = 0; m < partition.bin_count(); ++m) {
    const auto ym = partition.bin_outputs(sample, m);
    const KernelDensity cond(ym);
    acc += bin_weight(partition, m) *
           scheffe_mass_difference(cond, marg, cond.evaluate(grid), f_y, EmpiricalCdf(ym), marg_cdf, grid);
  }
  return make_estimate(partition, MeasureKind::Delta, Route::CdfBased, acc);
}

PointEstimate beta_diamond(const Sample& sample, const Partition& partition) {
  require_bins_of_at_least(partition, 1);
  const auto all = sorted_copy(sample.y());
  double acc = 0.0;
  for (Eigen::Index m = 0; m < partition.bin_count(); ++m)
    acc += bin_weight(partition, m) *
           ks_distance_sorted(sorted_copy(partition.bin_outputs(sample, m)), all);
  return make_estimate(partition, MeasureKind::Beta, Route::CdfBased, acc);
}

}  // namespace psens

#include "psens/numerics.hpp"

#include <cmath>
#include <vector>

namespace psens {

Grid::Grid(Eigen::VectorXd points) : points_(std::move(points)) {
  if (points_.size() < 2) throw Error(ErrorCode::Dimension, "grid needs at least two points");
  if (!points_.allFinite()) throw Error(ErrorCode::Domain, "grid has non-finite points");
  for (Eigen::Index i = 1; i < points_.size(); ++i)
    if (!(points_[i] > points_[i - 1]))
      throw Error(ErrorCode::Domain, "grid points must be strictly increasing");
}

Grid Grid::uniform(double lo, double hi, Eigen::Index count) {
  if (count < 2 || !(hi > lo)) throw Error(ErrorCode::Domain, "uniform grid needs lo < hi, count >= 2");
  Grid g(Eigen::VectorXd::LinSpaced(count, lo, hi));
  g.uniform_ = true;
  return g;
}

Eigen::VectorXd trapezoid_weights(const Grid& grid) {
  const auto& x = grid.points();
  const Eigen::Index g = x.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(g);
  for (Eigen::Index i = 1; i < g; ++i) {
    const double half = 0.5 * (x[i] - x[i - 1]);
    w[i - 1] += half;
    w[i] += half;
  }
  return w;
}

double empirical_quantile(const Eigen::Ref<const Eigen::VectorXd>& draws, double prob) {
  Eigen::VectorXd p(1);
  p << prob;
  return empirical_quantiles(draws, p)[0];
}

Eigen::VectorXd empirical_quantiles(const Eigen::Ref<const Eigen::VectorXd>& draws,
                                    const Eigen::Ref<const Eigen::VectorXd>& probs) {
  if (draws.size() == 0) throw Error(ErrorCode::EmptySample, "quantiles of empty draw set");
  std::vector<double> sorted(draws.data(), draws.data() + draws.size());
  std::sort(sorted.begin(), sorted.end());
  const double last = double(sorted.size() - 1);
  Eigen::VectorXd out(probs.size());
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::Domain, "quantile probability outside [0,1]");
    const double h = last * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    out[i] = sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
  }
  return out;
}

DrawSummary summarize_draws(const Eigen::Ref<const Eigen::VectorXd>& draws) {
  Eigen::VectorXd p(2);
  p << 0.025, 0.975;
  const auto q = empirical_quantiles(draws, p);
  return {draws.mean(), q[0], q[1]};
}

double ks_distance_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySample, "ks distance of empty sample");
  const double na = double(a.size()), nb = double(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() || j < b.size()) {
    double v;
    if (i == a.size()) v = b[j];
    else if (j == b.size()) v = a[i];
    else v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    best = std::max(best, std::abs(double(i) / na - double(j) / nb));
  }
  return best;
}

}  // namespace psens

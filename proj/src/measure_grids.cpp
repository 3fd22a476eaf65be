#include "psens/measure_grids.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psens/error.hpp"

namespace psens {

InputQuadrature input_quadrature(const Marginal& fx, Eigen::Index points, double tail) {
  if (points < 3) throw Error(ErrorCode::Size, "input quadrature needs at least 3 points");
  if (!(tail > 0.0 && tail < 0.5)) throw Error(ErrorCode::Domain, "tail must lie in (0, 0.5)");
  Grid grid = Grid::uniform(fx.quantile(tail), fx.quantile(1.0 - tail), points);
  Eigen::VectorXd density(points);
  for (Eigen::Index j = 0; j < points; ++j) density[j] = fx.pdf(grid[j]);
  Eigen::VectorXd trap = trapezoid_weights(grid);
  Eigen::VectorXd weights = trap.cwiseProduct(density);
  const double total = weights.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::Domain, "input density vanishes on its own grid");
  weights /= total;
  return {std::move(grid), std::move(density), std::move(weights), std::move(trap)};
}

Grid normal_mixture_grid(const Eigen::Ref<const Eigen::VectorXd>& means,
                         const Eigen::Ref<const Eigen::VectorXd>& sds,
                         const Eigen::Ref<const Eigen::VectorXd>& weights, Eigen::Index points) {
  constexpr double kZ = 5.33;  // 1 - Phi(5.33) < 1e-7
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index l = 0; l < means.size(); ++l) {
    if (!(weights[l] > 0.0)) continue;
    lo = std::min(lo, means[l] - kZ * sds[l]);
    hi = std::max(hi, means[l] + kZ * sds[l]);
  }
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorCode::Domain, "mixture has no usable component");
  return Grid::uniform(lo, hi, points);
}

Eigen::VectorXd cumulative_cdf(const Eigen::Ref<const Eigen::VectorXd>& density, const Grid& grid) {
  Eigen::VectorXd out(density.size());
  out[0] = 0.0;
  for (Eigen::Index i = 1; i < density.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (grid[i] - grid[i - 1]) * (density[i] + density[i - 1]);
  const double total = out[out.size() - 1];
  if (total > 0.0) out /= total;
  return out;
}

void add_normal_density(double w, double mean, double sd, const Grid& grid,
                        Eigen::Ref<Eigen::VectorXd> out) {
  const double c = w * kInvSqrt2Pi / sd;
  const double inv = 1.0 / sd;
  const auto& y = grid.points();
  Eigen::Index lo = 0, hi = y.size();
  if (grid.is_uniform()) {
    const double h = grid.step();
    lo = std::max<Eigen::Index>(0, Eigen::Index(std::floor((mean - 9.0 * sd - grid.front()) / h)));
    hi = std::min<Eigen::Index>(y.size(),
                                Eigen::Index(std::ceil((mean + 9.0 * sd - grid.front()) / h)) + 1);
  }
  for (Eigen::Index i = lo; i < hi; ++i) {
    const double z = (y[i] - mean) * inv;
    out[i] += c * std::exp(-0.5 * z * z);
  }
}

const Eigen::VectorXd& MeasureDrawSet::draws(MeasureKind m) const {
  switch (m) {
    case MeasureKind::Eta:
      return eta;
    case MeasureKind::Delta:
      return delta;
    case MeasureKind::Beta:
      break;
  }
  return beta;
}

}  // namespace psens

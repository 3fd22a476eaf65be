#ifndef PSENS_MEASURE_GRIDS_HPP
#define PSENS_MEASURE_GRIDS_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "psens/distributions.hpp"
#include "psens/measures.hpp"
#include "psens/numerics.hpp"

namespace psens {

inline constexpr Eigen::Index kInputGridSize = 201;
inline constexpr double kInputGridTail = 0.0005;

// Outer quadrature over a known input law: uniform points between the tail
// and 1 - tail quantiles; weights are trapezoid weights times f_X, rescaled
// to sum to one.
struct InputQuadrature {
  Grid grid;
  Eigen::VectorXd density;  // f_X at the grid points
  Eigen::VectorXd weights;  // sum to one
  Eigen::VectorXd trapezoid;  // plain trapezoid weights, for integrals in dx
};

InputQuadrature input_quadrature(const Marginal& fx, Eigen::Index points = kInputGridSize,
                                 double tail = kInputGridTail);

// Uniform output grid covering every normal component (weight > 0) out to
// 5.33 sd, i.e. beyond its 1e-7 and 1 - 1e-7 quantiles.
Grid normal_mixture_grid(const Eigen::Ref<const Eigen::VectorXd>& means,
                         const Eigen::Ref<const Eigen::VectorXd>& sds,
                         const Eigen::Ref<const Eigen::VectorXd>& weights,
                         Eigen::Index points = 512);

// Running trapezoid integral of a density on the grid, rescaled to end at 1.
Eigen::VectorXd cumulative_cdf(const Eigen::Ref<const Eigen::VectorXd>& density, const Grid& grid);

// Adds w * N(y | mean, sd) to out at every grid point within 9 sd of the mean.
void add_normal_density(double w, double mean, double sd, const Grid& grid,
                        Eigen::Ref<Eigen::VectorXd> out);

// Posterior draws of the three measures from a partition-free estimator.
struct MeasureDrawSet {
  Eigen::VectorXd eta;
  Eigen::VectorXd delta;
  Eigen::VectorXd beta;
  // One message per draw that was skipped as degenerate.
  std::vector<std::string> skipped;

  const Eigen::VectorXd& draws(MeasureKind m) const;
  DrawSummary summary(MeasureKind m) const { return summarize_draws(draws(m)); }
  Eigen::Index size() const { return eta.size(); }
};

}  // namespace psens

#endif  // PSENS_MEASURE_GRIDS_HPP

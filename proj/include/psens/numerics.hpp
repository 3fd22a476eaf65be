#ifndef PSENS_NUMERICS_HPP
#define PSENS_NUMERICS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "psens/error.hpp"

namespace psens {

// Strictly increasing evaluation points for quadrature and grid suprema.
class Grid {
 public:
  explicit Grid(Eigen::VectorXd points);

  static Grid uniform(double lo, double hi, Eigen::Index count);

  const Eigen::VectorXd& points() const { return points_; }
  Eigen::Index size() const { return points_.size(); }
  double operator[](Eigen::Index i) const { return points_[i]; }
  double front() const { return points_[0]; }
  double back() const { return points_[points_.size() - 1]; }
  bool is_uniform() const { return uniform_; }
  // Spacing of a uniform grid; mean spacing otherwise.
  double step() const { return (back() - front()) / double(size() - 1); }

 private:
  Eigen::VectorXd points_;
  bool uniform_ = false;
};

// Trapezoidal rule over a possibly nonuniform grid.
template <typename Derived>
double trapezoid(const Eigen::DenseBase<Derived>& f, const Grid& grid) {
  if (f.size() != grid.size())
    throw Error(ErrorCode::Dimension, "trapezoid: values and grid differ in length");
  const auto& x = grid.points();
  double acc = 0.0;
  for (Eigen::Index i = 1; i < x.size(); ++i)
    acc += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
  return acc;
}

// Trapezoid weights w such that w.dot(f) == trapezoid(f, grid).
Eigen::VectorXd trapezoid_weights(const Grid& grid);

template <typename Derived>
double grid_supremum(const Eigen::DenseBase<Derived>& f) {
  if (f.size() == 0) throw Error(ErrorCode::Dimension, "grid_supremum: empty vector");
  return f.maxCoeff();
}

// Linear-interpolation (type 7) quantiles of a set of draws.
Eigen::VectorXd empirical_quantiles(const Eigen::Ref<const Eigen::VectorXd>& draws,
                                    const Eigen::Ref<const Eigen::VectorXd>& probs);
double empirical_quantile(const Eigen::Ref<const Eigen::VectorXd>& draws, double prob);

// Monte Carlo mean and central 95% interval of a draw vector.
struct DrawSummary {
  double mean = 0.0;
  double lo95 = 0.0;
  double hi95 = 0.0;
};
DrawSummary summarize_draws(const Eigen::Ref<const Eigen::VectorXd>& draws);

// Kolmogorov-Smirnov distance sup_y |F_a(y) - F_b(y)| between the empirical
// cdfs of two ascending vectors; exact, evaluated over the union of jumps.
double ks_distance_sorted(const std::vector<double>& a, const std::vector<double>& b);

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return kInvSqrt2Pi / sd * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * 1.41421356237309504880));
}

}  // namespace psens

#endif  // PSENS_NUMERICS_HPP

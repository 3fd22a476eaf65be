#ifndef PSENS_FREQUENTIST_HPP
#define PSENS_FREQUENTIST_HPP

#include <Eigen/Dense>

#include <vector>

#include "psens/ecdf.hpp"
#include "psens/kde.hpp"
#include "psens/measures.hpp"
#include "psens/numerics.hpp"
#include "psens/partition.hpp"
#include "psens/sample.hpp"

namespace psens {

// Which normalization of the L1 density distance to report. HalfL1 keeps delta
// in [0, 1]; FullL1 is the unhalved integral.
enum class DeltaScale { HalfL1, FullL1 };

// Given-data estimators over an equiprobable partition, weighted by n_m / n.

// sum_m (n_m/n) (ybar_m - ybar)^2 / s_y^2, population variance.
PointEstimate eta_star(const Sample& sample, const Partition& partition);

// Same functional through integrals of cdf differences, integrated exactly
// between jump points.
PointEstimate eta_diamond(const Sample& sample, const Partition& partition);

// KDE-based L1 distance between bin and marginal output densities.
PointEstimate delta_star(const Sample& sample, const Partition& partition, const Grid& grid,
                         DeltaScale scale = DeltaScale::HalfL1);

// Scheffe route: mass difference of the empirical cdfs over the set where the
// bin KDE exceeds the marginal KDE.
PointEstimate delta_diamond(const Sample& sample, const Partition& partition, const Grid& grid);

// Kolmogorov-Smirnov distance between bin and marginal empirical cdfs.
PointEstimate beta_diamond(const Sample& sample, const Partition& partition);

// Uniform output grid wide enough for the marginal KDE and every bin KDE:
// [min y - 3h, max y + 3h] with h the largest bandwidth involved. At least 512
// points, refined to a quarter of the smallest bandwidth (capped at 16384) so
// narrow bin densities are resolved.
inline constexpr Eigen::Index kMaxOutputGridSize = 16384;
Grid output_grid(const Sample& sample, const Partition& partition);

// Building blocks shared with the Bayesian partition estimators.

// int (F_b - F_a) dy for two ascending samples, exact for step cdfs
// (equals mean(a) - mean(b)).
double step_cdf_gap(const std::vector<double>& a_sorted, const std::vector<double>& b_sorted);

double half_l1_on_grid(const Eigen::Ref<const Eigen::VectorXd>& f1,
                       const Eigen::Ref<const Eigen::VectorXd>& f2, const Grid& grid);

// P_cond(B) - P_marg(B) where B = {y : f_cond(y) > f_marg(y)}, B located by
// sign changes on the grid refined with 10 bisection steps on the exact KDEs,
// probabilities read off the empirical cdfs.
double scheffe_mass_difference(const KernelDensity& cond, const KernelDensity& marg,
                               const Eigen::Ref<const Eigen::VectorXd>& cond_on_grid,
                               const Eigen::Ref<const Eigen::VectorXd>& marg_on_grid,
                               const EmpiricalCdf& cond_cdf, const EmpiricalCdf& marg_cdf,
                               const Grid& grid);

}  // namespace psens

#endif  // PSENS_FREQUENTIST_HPP

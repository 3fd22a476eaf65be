#ifndef PSENS_KDE_HPP
#define PSENS_KDE_HPP

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "psens/numerics.hpp"

namespace psens {

// Silverman's rule, h = 0.9 min(sd, IQR / 1.34) n^{-1/5}. Falls back to sd when
// the IQR collapses to zero.
double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& values);

// Gaussian kernel density estimate.
class KernelDensity {
 public:
  KernelDensity(const Eigen::Ref<const Eigen::VectorXd>& values,
                std::optional<double> bandwidth = std::nullopt);

  double density(double y) const;
  double cdf(double y) const;

  // Exact evaluation on any grid. Kernel contributions beyond 9 bandwidths
  // are below double precision and are skipped.
  Eigen::VectorXd evaluate(const Grid& grid) const;

  // Linear-binning approximation on a uniform grid: O(G * window) regardless
  // of the number of centers. Used inside resampling loops.
  Eigen::VectorXd evaluate_binned(const Grid& grid) const;

  // 512 uniform points over [min - 3h, max + 3h].
  Grid default_grid() const;

  const std::vector<double>& centers() const { return centers_; }
  double bandwidth() const { return h_; }

 private:
  std::vector<double> centers_;  // ascending
  double h_;
};

inline KernelDensity kde(const Eigen::Ref<const Eigen::VectorXd>& values,
                         std::optional<double> bandwidth = std::nullopt) {
  return KernelDensity(values, bandwidth);
}

inline constexpr Eigen::Index kDefaultOutputGridSize = 512;

}  // namespace psens

#endif  // PSENS_KDE_HPP

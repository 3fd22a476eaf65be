#ifndef PSENS_BNC_HPP
#define PSENS_BNC_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "psens/distributions.hpp"
#include "psens/measure_grids.hpp"
#include "psens/numerics.hpp"
#include "psens/sample.hpp"
#include "psens/simulators.hpp"

namespace psens {

// Mixture of linear regressions with normalized-kernel weights,
//   f(y | x) = sum_l w_l(x) N(y | a_l + b_l x, sigma_l),
//   w_l(x) = omega_l K_l(x) / sum_j omega_j K_j(x),  K_l(x) = exp(-tau (x - mu_l)^2 / 2),
// with stick-breaking omega (concentration alpha), tau ~ Gamma(1, 1),
// (a_l, b_l) ~ N(b0, sigma_l C^{-1}), 1 / sigma_l ~ Gamma(1, 1),
// mu_l ~ N(mu0, mu_scale / tau). sigma_l is a variance.
// The sampler works on standardized x and y; b0, c_inv and mu0 refer to that scale.
struct BncPrior {
  double alpha = 1.0;
  Eigen::Vector2d b0 = Eigen::Vector2d::Zero();       // (intercept, slope)
  Eigen::Vector2d c_inv = Eigen::Vector2d::Ones();    // diagonal of C^{-1}
  double mu0 = 0.0;
  double mu_scale = 10.0;
  double tau_shape = 1.0;
  double tau_rate = 1.0;
  double sigma_shape = 1.0;  // 1 / sigma ~ Gamma(shape, rate)
  double sigma_rate = 1.0;
  int truncation = 50;       // stick-breaking components kept by the sampler
};

// On the standardized sample: b0 = least-squares (intercept, slope); C^{-1}
// diagonal from the largest deviation of convex-hull edge intercepts and
// slopes from b0 (edges spanning at least 10% of the x-range), floored at 1;
// mu0 = 0.
BncPrior default_bnc_prior(const Sample& sample, Eigen::Index input_index);

struct BncComponent {
  double omega = 0.0;  // stick-breaking weight, renormalized over kept components
  double a = 0.0;
  double b = 0.0;
  double sigma = 1.0;  // regression variance
  double mu = 0.0;     // kernel location
};

// One posterior draw, expressed on the original x and y scales.
struct BncDraw {
  std::vector<BncComponent> components;
  double tau = 1.0;  // shared kernel precision

  Eigen::Index J() const { return Eigen::Index(components.size()); }
  // Normalized kernel weights w_l(x).
  Eigen::VectorXd weights_at(double x) const;
};

struct BncDiagnostics {
  Eigen::Index capped_geometric = 0;   // latent counts that hit the cap
  std::vector<Eigen::Index> occupied;  // occupied components per retained draw
};

// Blocked Gibbs sampler on the truncated stick-breaking representation. The
// normalizing denominator of w_l(x_i) is removed by latent geometric counts
// with secondary allocations; regression parameters are conjugate,
// kernel locations and tau are updated by slice sampling. Retained draws keep
// the components occupied by the primary allocations, weights renormalized.
std::vector<BncDraw> fit_bnc(const Sample& sample, Eigen::Index input_index,
                             const BncPrior& prior, Eigen::Index burn_in, Eigen::Index draws,
                             std::uint64_t seed, BncDiagnostics* diagnostics = nullptr);

Eigen::VectorXd bnc_conditional_density(const BncDraw& draw, double x, const Grid& grid);

// Measures of one draw plus the quantities behind the consistency checks.
struct BncDrawMeasures {
  MeasureTriple measures;
  double mean_by_density = 0.0;     // int y f_Y(y) dy
  double mean_by_regression = 0.0;  // int mu_Y(x) f_X(x) dx
  double marginal_mass = 0.0;       // int f_Y(y) dy
  double output_variance = 0.0;
};

std::optional<BncDrawMeasures> bnc_draw_measures(const BncDraw& draw,
                                                 const InputQuadrature& quadrature);

MeasureDrawSet bnc_measures(const std::vector<BncDraw>& draws, const Marginal& input_law);

}  // namespace psens

#endif  // PSENS_BNC_HPP

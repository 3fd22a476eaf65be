#ifndef PSENS_BNJ_HPP
#define PSENS_BNJ_HPP

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

// Dirichlet-process mixture of bivariate normals for (X^i, Y). Components are
// (mu, Sigma) ~ NIW: Sigma ~ InvWishart(nu, Psi), mu | Sigma ~ N(m1, Sigma / gamma),
// with hyperpriors gamma ~ Gamma(shape, rate), m1 ~ N(m2, s2) and
// Psi ~ Wishart(scale_df, s2 / scale_df), so that E[Psi] = s2.
struct BnjPrior {
  double alpha = 1.0;
  double nu = 4.0;
  double gamma_shape = 0.5;
  double gamma_rate = 0.5;
  double scale_df = 4.0;
  Eigen::Vector2d m2 = Eigen::Vector2d::Zero();
  Eigen::Matrix2d s2 = Eigen::Matrix2d::Identity();
  int max_components = 50;
};

// m2 = (mean x^i, mean y), s2 = diag(var x^i, var y).
BnjPrior default_bnj_prior(const Sample& sample, Eigen::Index input_index);

struct BnjComponent {
  double weight = 0.0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();       // (mu1, mu2)
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();    // [[s1, s3], [s3, s2]]
};

struct BnjDraw {
  std::vector<BnjComponent> components;  // weights sum to one
  Eigen::Index J() const { return Eigen::Index(components.size()); }
};

struct ChainDiagnostics {
  Eigen::Index jitter_events = 0;      // non-positive-definite matrices repaired
  std::vector<Eigen::Index> occupied;  // occupied clusters per retained draw
};

// Collapsed Gibbs sampler (allocation updates with the component parameters
// integrated out, then component parameters and hyperparameters given the
// allocation). Every sweep after burn_in is retained. Weights of a draw are
// Dirichlet(cluster counts), i.e. the DP posterior weights with the mass of
// unoccupied components dropped, truncated to max_components.
std::vector<BnjDraw> fit_bnj(const Sample& sample, Eigen::Index input_index,
                             const BnjPrior& prior, Eigen::Index burn_in, Eigen::Index draws,
                             std::uint64_t seed, ChainDiagnostics* diagnostics = nullptr);

// f(y | x) on the grid: components reweighted by w_l N(x | mu1, s1), each
// contributing N(y | mu2 + s3 (x - mu1) / s1, s2 - s3^2 / s1).
Eigen::VectorXd bnj_conditional_density(const BnjDraw& draw, double x, const Grid& grid);

// Mixture moments of Y.
double bnj_output_mean(const BnjDraw& draw);
double bnj_output_variance(const BnjDraw& draw);

// Measures of one draw against the known input law; empty when the draw is
// degenerate (non-finite moments or zero output variance).
std::optional<MeasureTriple> bnj_draw_measures(const BnjDraw& draw,
                                               const InputQuadrature& quadrature);

MeasureDrawSet bnj_measures(const std::vector<BnjDraw>& draws, const Marginal& input_law);

}  // namespace psens

#endif  // PSENS_BNJ_HPP

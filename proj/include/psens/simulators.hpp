#ifndef PSENS_SIMULATORS_HPP
#define PSENS_SIMULATORS_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psens/distributions.hpp"
#include "psens/numerics.hpp"
#include "psens/sample.hpp"

namespace psens {

enum class SimulatorKind { GammaRatio2, CorrelatedLinear21, ExternalCsv };
enum class Sequence { QuasiRandom, PseudoRandom };

// Test simulator description. CorrelatedLinear21 covers any linear model
// y = a'x over jointly normal inputs; the factory below builds the 21-input case.
struct SimulatorSpec {
  SimulatorKind kind = SimulatorKind::GammaRatio2;
  std::vector<Marginal> marginals;
  std::optional<Eigen::MatrixXd> correlation;
  Eigen::VectorXd coefficients;  // linear model only

  Eigen::Index k() const { return Eigen::Index(marginals.size()); }
  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

// y = x1 / (x1 + x2), x1, x2 iid Gamma(3, 1); y ~ Beta(3, 3).
SimulatorSpec gamma_ratio_2();
// y = sum a_i x_i, x_i ~ Normal(1, 1) with pairwise correlation 0.5,
// a = (-4 x7, 2 x7, 1 x7).
SimulatorSpec correlated_linear_21();
// Linear-Gaussian model with equicorrelated Normal(mean, sd) inputs.
SimulatorSpec correlated_linear(Eigen::VectorXd coefficients, double rho, double mean = 1.0,
                                double sd = 1.0);
// Placeholder for samples ingested from disk; carries KDE marginals.
SimulatorSpec external_csv(const Sample& sample);

Sample generate_sample(const SimulatorSpec& spec, Eigen::Index n, std::uint64_t seed,
                       Sequence sequence = Sequence::QuasiRandom);

struct MeasureTriple {
  double eta = 0.0;
  double delta = 0.0;
  double beta = 0.0;
};

// Published analytical values, one entry per input.
struct OracleTable {
  std::vector<MeasureTriple> per_input;
  const MeasureTriple& operator[](Eigen::Index i) const { return per_input[std::size_t(i)]; }
};

OracleTable oracle_values(const SimulatorSpec& spec);

// Recomputes eta, delta, beta for a linear-Gaussian spec from the closed-form
// conditional normals, integrating over the input with the trapezoid rule.
MeasureTriple gaussian_conditional_oracle(const SimulatorSpec& spec, Eigen::Index input_index,
                                          const Grid& grid);
// +-8 sd around the input mean, 4001 points.
Grid default_oracle_grid(const SimulatorSpec& spec, Eigen::Index input_index);

// Half L1 distance and Kolmogorov-Smirnov distance between two normal laws,
// from the density crossing points.
double normal_half_l1(double m1, double s1, double m2, double s2);
double normal_ks(double m1, double s1, double m2, double s2);

}  // namespace psens

#endif  // PSENS_SIMULATORS_HPP

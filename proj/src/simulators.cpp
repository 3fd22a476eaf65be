#include "psens/simulators.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "psens/error.hpp"
#include "psens/rng.hpp"

namespace psens {

namespace {

double standard_normal_quantile(double u) {
  static const boost::math::normal_distribution<> unit;
  return boost::math::quantile(unit, u);
}

// Crossing points of two normal densities, ascending.
std::vector<double> density_crossings(double m1, double s1, double m2, double s2) {
  const double a = 0.5 / (s2 * s2) - 0.5 / (s1 * s1);
  const double b = m1 / (s1 * s1) - m2 / (s2 * s2);
  const double c = 0.5 * m2 * m2 / (s2 * s2) - 0.5 * m1 * m1 / (s1 * s1) + std::log(s2 / s1);
  std::vector<double> roots;
  if (std::abs(a) < 1e-14 * (1.0 / (s1 * s1) + 1.0 / (s2 * s2))) {
    if (b != 0.0) roots.push_back(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (b + std::copysign(sq, b));
      roots.push_back(q / a);
      if (q != 0.0) roots.push_back(c / q);
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

double SimulatorSpec::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  switch (kind) {
    case SimulatorKind::GammaRatio2:
      return x[0] / (x[0] + x[1]);
    case SimulatorKind::CorrelatedLinear21:
      return coefficients.dot(x);
    case SimulatorKind::ExternalCsv:
      break;
  }
  throw Error(ErrorCode::Unsupported, "external samples cannot be re-evaluated");
}

SimulatorSpec gamma_ratio_2() {
  SimulatorSpec s;
  s.kind = SimulatorKind::GammaRatio2;
  s.marginals = {Marginal(GammaMarginal{3.0, 1.0}), Marginal(GammaMarginal{3.0, 1.0})};
  return s;
}

SimulatorSpec correlated_linear(Eigen::VectorXd coefficients, double rho, double mean, double sd) {
  const Eigen::Index k = coefficients.size();
  if (k < 1) throw Error(ErrorCode::Dimension, "linear simulator needs at least one input");
  SimulatorSpec s;
  s.kind = SimulatorKind::CorrelatedLinear21;
  s.marginals.assign(std::size_t(k), Marginal(NormalMarginal{mean, sd}));
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(k, k, rho);
  r.diagonal().setOnes();
  s.correlation = r;
  s.coefficients = std::move(coefficients);
  return s;
}

SimulatorSpec correlated_linear_21() {
  Eigen::VectorXd a(21);
  a.segment(0, 7).setConstant(-4.0);
  a.segment(7, 7).setConstant(2.0);
  a.segment(14, 7).setConstant(1.0);
  return correlated_linear(std::move(a), 0.5);
}

SimulatorSpec external_csv(const Sample& sample) {
  SimulatorSpec s;
  s.kind = SimulatorKind::ExternalCsv;
  for (Eigen::Index i = 0; i < sample.k(); ++i)
    s.marginals.emplace_back(EmpiricalMarginal{KernelDensity(sample.column(i))});
  return s;
}

Sample generate_sample(const SimulatorSpec& spec, Eigen::Index n, std::uint64_t seed,
                       Sequence sequence) {
  if (spec.kind == SimulatorKind::ExternalCsv)
    throw Error(ErrorCode::Unsupported, "external samples are ingested, not generated");
  if (n < 2) throw Error(ErrorCode::Size, "sample size must be at least 2");
  const Eigen::Index k = spec.k();

  Eigen::MatrixXd chol;
  if (spec.correlation) {
    const Eigen::MatrixXd& r = *spec.correlation;
    if (r.rows() != k || r.cols() != k)
      throw Error(ErrorCode::Matrix, "correlation matrix does not match input count");
    if (!r.isApprox(r.transpose()))
      throw Error(ErrorCode::Matrix, "correlation matrix is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::Matrix, "correlation matrix is not positive definite");
    chol = llt.matrixL();
  }

  // Uniform scores on (0,1): digitally shifted Sobol points, or a seeded PRNG.
  Eigen::MatrixXd u(n, k);
  if (sequence == Sequence::QuasiRandom) {
    boost::random::sobol engine(static_cast<std::size_t>(k));
    std::vector<std::uint64_t> shift(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) shift[std::size_t(i)] = derive_seed(seed, {0x50b01, std::uint64_t(i)});
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < k; ++i) {
        const std::uint64_t bits = std::uint64_t(engine()) ^ shift[std::size_t(i)];
        u(j, i) = (double(bits >> 11) + 0.5) * 0x1.0p-53;
      }
  } else {
    Rng rng = make_rng(seed, {0x9e11d0});
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < k; ++i) u(j, i) = uniform_open(rng);
  }

  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd z(k);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (spec.correlation) {
      for (Eigen::Index i = 0; i < k; ++i) z[i] = standard_normal_quantile(u(j, i));
      z = chol * z;
      for (Eigen::Index i = 0; i < k; ++i) {
        const auto& law = spec.marginals[std::size_t(i)].law();
        if (const auto* nm = std::get_if<NormalMarginal>(&law)) {
          x(j, i) = nm->mean + nm->sd * z[i];
        } else {
          const double ui = std::clamp(normal_cdf(z[i], 0.0, 1.0), 1e-300, 1.0 - 0x1.0p-53);
          x(j, i) = spec.marginals[std::size_t(i)].quantile(ui);
        }
      }
    } else {
      for (Eigen::Index i = 0; i < k; ++i) x(j, i) = spec.marginals[std::size_t(i)].quantile(u(j, i));
    }
  }

  Eigen::VectorXd y(n);
  for (Eigen::Index j = 0; j < n; ++j) y[j] = spec.evaluate(x.row(j).transpose());
  return Sample(std::move(x), std::move(y));
}

OracleTable oracle_values(const SimulatorSpec& spec) {
  OracleTable t;
  switch (spec.kind) {
    case SimulatorKind::GammaRatio2:
      t.per_input.assign(2, MeasureTriple{0.496, 0.315, 0.289});
      return t;
    case SimulatorKind::CorrelatedLinear21: {
      if (spec.k() != 21)
        throw Error(ErrorCode::NoOracle, "tabulated values exist only for the 21-input model");
      const MeasureTriple g1{0.309, 0.212, 0.205}, g2{0.064, 0.084, 0.083}, g3{0.092, 0.102, 0.101};
      for (int i = 0; i < 21; ++i) t.per_input.push_back(i < 7 ? g1 : (i < 14 ? g2 : g3));
      return t;
    }
    case SimulatorKind::ExternalCsv:
      break;
  }
  throw Error(ErrorCode::NoOracle, "no analytical values for external samples");
}

Grid default_oracle_grid(const SimulatorSpec& spec, Eigen::Index input_index) {
  const auto& m = spec.marginals.at(std::size_t(input_index));
  const double mu = m.mean(), sd = std::sqrt(m.variance());
  return Grid::uniform(mu - 8.0 * sd, mu + 8.0 * sd, 4001);
}

double normal_half_l1(double m1, double s1, double m2, double s2) {
  const auto roots = density_crossings(m1, s1, m2, s2);
  std::vector<double> edges{-std::numeric_limits<double>::infinity()};
  edges.insert(edges.end(), roots.begin(), roots.end());
  edges.push_back(std::numeric_limits<double>::infinity());
  double acc = 0.0;
  for (std::size_t r = 0; r + 1 < edges.size(); ++r) {
    const double lo = edges[r], hi = edges[r + 1];
    double probe;
    if (std::isinf(lo) && std::isinf(hi)) probe = m1;
    else if (std::isinf(lo)) probe = hi - 1.0 - std::abs(hi);
    else if (std::isinf(hi)) probe = lo + 1.0 + std::abs(lo);
    else probe = 0.5 * (lo + hi);
    const double d1 = -std::log(s1) - 0.5 * std::pow((probe - m1) / s1, 2);
    const double d2 = -std::log(s2) - 0.5 * std::pow((probe - m2) / s2, 2);
    if (d1 > d2)
      acc += (normal_cdf(hi, m1, s1) - normal_cdf(lo, m1, s1)) -
             (normal_cdf(hi, m2, s2) - normal_cdf(lo, m2, s2));
  }
  return std::clamp(acc, 0.0, 1.0);
}

double normal_ks(double m1, double s1, double m2, double s2) {
  double best = 0.0;
  for (double r : density_crossings(m1, s1, m2, s2))
    best = std::max(best, std::abs(normal_cdf(r, m1, s1) - normal_cdf(r, m2, s2)));
  return best;
}

MeasureTriple gaussian_conditional_oracle(const SimulatorSpec& spec, Eigen::Index input_index,
                                          const Grid& grid) {
  if (spec.kind != SimulatorKind::CorrelatedLinear21)
    throw Error(ErrorCode::Unsupported, "closed-form conditionals exist only for linear-Gaussian models");
  const Eigen::Index k = spec.k();
  if (input_index < 0 || input_index >= k) throw Error(ErrorCode::Domain, "input index out of range");

  Eigen::VectorXd means(k), sds(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto* nm = std::get_if<NormalMarginal>(&spec.marginals[std::size_t(i)].law());
    if (!nm) throw Error(ErrorCode::Unsupported, "linear oracle needs normal marginals");
    means[i] = nm->mean;
    sds[i] = nm->sd;
  }
  const Eigen::MatrixXd r = spec.correlation ? *spec.correlation : Eigen::MatrixXd::Identity(k, k);
  const Eigen::MatrixXd cov = sds.asDiagonal() * r * sds.asDiagonal();
  const Eigen::VectorXd& a = spec.coefficients;

  const double mu_y = a.dot(means);
  const double var_y = a.dot(cov * a);
  const double sd_y = std::sqrt(var_y);
  const double cov_yx = (cov * a)[input_index];
  const double var_x = cov(input_index, input_index);
  const double slope = cov_yx / var_x;
  const double cond_var = std::max(0.0, var_y - cov_yx * cov_yx / var_x);
  const double cond_sd = std::sqrt(cond_var);
  const bool degenerate = cond_sd < 1e-12 * sd_y;

  const auto& xs = grid.points();
  Eigen::VectorXd fx(xs.size()), eta_i(xs.size()), delta_i(xs.size()), beta_i(xs.size());
  for (Eigen::Index g = 0; g < xs.size(); ++g) {
    fx[g] = normal_pdf(xs[g], means[input_index], sds[input_index]);
    const double m = mu_y + slope * (xs[g] - means[input_index]);
    eta_i[g] = (m - mu_y) * (m - mu_y) / var_y;
    if (degenerate) {
      const double f = normal_cdf(m, mu_y, sd_y);
      delta_i[g] = 1.0;
      beta_i[g] = std::max(f, 1.0 - f);
    } else {
      delta_i[g] = normal_half_l1(m, cond_sd, mu_y, sd_y);
      beta_i[g] = normal_ks(m, cond_sd, mu_y, sd_y);
    }
  }
  const double mass = trapezoid(fx, grid);
  return {trapezoid(eta_i.cwiseProduct(fx), grid) / mass,
          trapezoid(delta_i.cwiseProduct(fx), grid) / mass,
          trapezoid(beta_i.cwiseProduct(fx), grid) / mass};
}

}  // namespace psens

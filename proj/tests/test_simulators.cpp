#include <doctest.h>

#include <cmath>

#include "psens/distributions.hpp"
#include "psens/simulators.hpp"
#include "test_support.hpp"

using namespace psens;
using testing::vec;

namespace {

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd ca = a.array() - a.mean(), cb = b.array() - b.mean();
  return (ca * cb).sum() / std::sqrt(ca.square().sum() * cb.square().sum());
}

// Closed-form first-order variance share of a linear model over
// equicorrelated inputs: Cov(Y, X_i)^2 / (Var(Y) Var(X_i)).
double linear_eta(const Eigen::VectorXd& a, double rho, Eigen::Index i) {
  const double s = a.sum(), s2 = a.squaredNorm();
  const double var_y = s2 + rho * (s * s - s2);
  const double cov = a[i] + rho * (s - a[i]);
  return cov * cov / var_y;
}

}  // namespace

TEST_CASE("marginals: quantile inverts cdf") {
  const std::vector<Marginal> laws = {Marginal(NormalMarginal{1.0, 2.0}), Marginal(GammaMarginal{3.0, 1.0}),
                                      Marginal(UniformMarginal{-1.0, 4.0}),
                                      Marginal(LogUniformMarginal{0.1, 100.0})};
  for (const auto& law : laws) {
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999}) {
      const double q = law.quantile(p);
      CHECK(law.cdf(q) == doctest::Approx(p).epsilon(1e-9));
      CHECK(law.pdf(q) > 0.0);
    }
  }
  CHECK(Marginal(GammaMarginal{3.0, 1.0}).mean() == doctest::Approx(3.0));
  CHECK(Marginal(GammaMarginal{3.0, 2.0}).variance() == doctest::Approx(0.75));
  CHECK(Marginal(UniformMarginal{0.0, 1.0}).variance() == doctest::Approx(1.0 / 12.0));
  CHECK_THROWS_CODE(Marginal(NormalMarginal{0, 1}).quantile(1.0), ErrorCode::Domain);
}

TEST_CASE("gamma-ratio-2: output law is Beta(3,3)") {
  const Sample s = generate_sample(gamma_ratio_2(), 20000, 3, Sequence::PseudoRandom);
  CHECK(s.k() == 2);
  CHECK((s.y().array() > 0.0).all());
  CHECK((s.y().array() < 1.0).all());
  CHECK(s.y().mean() == doctest::Approx(0.5).epsilon(0.01));
  CHECK(population_variance(s.y()) == doctest::Approx(1.0 / 28.0).epsilon(0.03));
  for (Eigen::Index r = 0; r < 50; ++r)
    CHECK(s.y()[r] == doctest::Approx(s.x()(r, 0) / (s.x()(r, 0) + s.x()(r, 1))));
}

TEST_CASE("linear-21: output mean and input correlation") {
  const SimulatorSpec spec = correlated_linear_21();
  REQUIRE(spec.k() == 21);
  const Eigen::Index n = 100000;
  const Sample s = generate_sample(spec, n, 17, Sequence::PseudoRandom);
  const double se = std::sqrt(98.0 / double(n));
  CHECK(std::abs(s.y().mean() + 7.0) < 3.0 * se);
  CHECK(correlation(s.column(0), s.column(1)) == doctest::Approx(0.5).epsilon(0.04));
  CHECK(std::abs(correlation(s.column(0), s.column(1)) - 0.5) < 0.02);
  CHECK(std::abs(correlation(s.column(3), s.column(17)) - 0.5) < 0.02);
  for (Eigen::Index r = 0; r < 20; ++r)
    CHECK(s.y()[r] == doctest::Approx(spec.coefficients.dot(s.x().row(r).transpose())));
}

TEST_CASE("generation is deterministic in the seed for both sequences") {
  for (Sequence seq : {Sequence::QuasiRandom, Sequence::PseudoRandom}) {
    const Sample a = generate_sample(gamma_ratio_2(), 257, 9, seq);
    const Sample b = generate_sample(gamma_ratio_2(), 257, 9, seq);
    const Sample c = generate_sample(gamma_ratio_2(), 257, 10, seq);
    CHECK(a.x() == b.x());
    CHECK(a.y() == b.y());
    CHECK(a.y() != c.y());
  }
}

TEST_CASE("quasi-random samples have low-discrepancy marginals") {
  const Sample s = generate_sample(gamma_ratio_2(), 1024, 1, Sequence::QuasiRandom);
  const Marginal g(GammaMarginal{3.0, 1.0});
  // Probability integral transform of each column should be near-uniform.
  for (Eigen::Index c = 0; c < 2; ++c) {
    std::vector<double> u;
    for (Eigen::Index r = 0; r < s.n(); ++r) u.push_back(g.cdf(s.x()(r, c)));
    std::sort(u.begin(), u.end());
    double d = 0.0;
    for (std::size_t r = 0; r < u.size(); ++r)
      d = std::max({d, std::abs(u[r] - double(r) / 1024.0), std::abs(u[r] - double(r + 1) / 1024.0)});
    CHECK(d < 0.01);
  }
}

TEST_CASE("published table values") {
  const OracleTable g = oracle_values(gamma_ratio_2());
  CHECK(g[0].eta == doctest::Approx(0.496));
  CHECK(g[1].delta == doctest::Approx(0.315));
  CHECK(g[1].beta == doctest::Approx(0.289));
  const OracleTable l = oracle_values(correlated_linear_21());
  CHECK(l.per_input.size() == 21);
  CHECK(l[2].eta == doctest::Approx(0.309));
  CHECK(l[9].eta == doctest::Approx(0.064));
  CHECK(l[20].delta == doctest::Approx(0.102));
  CHECK_THROWS_CODE(oracle_values(correlated_linear(vec({1, 1}), 0.0)), ErrorCode::NoOracle);
}

TEST_CASE("linear-21 oracle: eta matches the closed form") {
  const SimulatorSpec spec = correlated_linear_21();
  CHECK(std::abs(linear_eta(spec.coefficients, 0.5, 2) - 0.309) < 0.002);
  CHECK(std::abs(linear_eta(spec.coefficients, 0.5, 9) - 0.064) < 0.002);
  for (Eigen::Index i : {0, 2, 9, 16, 20}) {
    const MeasureTriple m = gaussian_conditional_oracle(spec, i, default_oracle_grid(spec, i));
    CHECK(m.eta == doctest::Approx(linear_eta(spec.coefficients, 0.5, i)).epsilon(1e-4));
  }
}

TEST_CASE("linear-21 oracle: delta and beta reproduce the published table") {
  const SimulatorSpec spec = correlated_linear_21();
  const OracleTable t = oracle_values(spec);
  for (Eigen::Index i : {2, 9, 20}) {
    const MeasureTriple m = gaussian_conditional_oracle(spec, i, default_oracle_grid(spec, i));
    CHECK(std::abs(m.eta - t[i].eta) < 0.002);
    CHECK(std::abs(m.delta - t[i].delta) < 0.002);
    CHECK(std::abs(m.beta - t[i].beta) < 0.002);
  }
}

TEST_CASE("oracle: a model driven by one input has all measures at their maxima") {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(3);
  a[1] = 2.5;
  const SimulatorSpec spec = correlated_linear(a, 0.0);
  const MeasureTriple m = gaussian_conditional_oracle(spec, 1, default_oracle_grid(spec, 1));
  CHECK(std::abs(m.eta - 1.0) < 1e-3);
  const MeasureTriple z = gaussian_conditional_oracle(spec, 0, default_oracle_grid(spec, 0));
  CHECK(std::abs(z.eta) < 1e-9);
  CHECK(std::abs(z.delta) < 1e-9);
  CHECK(std::abs(z.beta) < 1e-9);
}

TEST_CASE("normal distances") {
  CHECK(normal_half_l1(0, 1, 0, 1) == doctest::Approx(0.0));
  CHECK(normal_ks(0, 1, 0, 1) == doctest::Approx(0.0));
  // Equal variances: both distances are 2 Phi(d / 2) - 1.
  const double d = 1.3;
  const double expected = 2.0 * normal_cdf(d / 2.0, 0, 1) - 1.0;
  CHECK(normal_half_l1(0, 1, d, 1) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(normal_ks(0, 1, d, 1) == doctest::Approx(expected).epsilon(1e-9));
  // Brute-force check for unequal variances.
  const Grid g = Grid::uniform(-20, 20, 200001);
  Eigen::VectorXd diff(g.size());
  double ks = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    diff[j] = std::abs(normal_pdf(g[j], 0.3, 0.7) - normal_pdf(g[j], -0.2, 1.9));
    ks = std::max(ks, std::abs(normal_cdf(g[j], 0.3, 0.7) - normal_cdf(g[j], -0.2, 1.9)));
  }
  CHECK(normal_half_l1(0.3, 0.7, -0.2, 1.9) == doctest::Approx(0.5 * trapezoid(diff, g)).epsilon(1e-6));
  CHECK(normal_ks(0.3, 0.7, -0.2, 1.9) == doctest::Approx(ks).epsilon(1e-6));
}

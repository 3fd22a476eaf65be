#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "psens/bnj.hpp"
#include "psens/simulators.hpp"
#include "test_support.hpp"

using namespace psens;

namespace {

BnjComponent component(double w, double m1, double m2, double s1, double s2, double s3) {
  BnjComponent c;
  c.weight = w;
  c.mean << m1, m2;
  c.cov << s1, s3, s3, s2;
  return c;
}

double grid_mean(const Eigen::VectorXd& f, const Grid& g) {
  return trapezoid(Eigen::VectorXd(f.array() * g.points().array()), g) / trapezoid(f, g);
}

double grid_variance(const Eigen::VectorXd& f, const Grid& g) {
  const double m = grid_mean(f, g);
  const Eigen::VectorXd c = (g.points().array() - m).square();
  return trapezoid(Eigen::VectorXd(f.array() * c.array()), g) / trapezoid(f, g);
}

// Bivariate normal sample with unit variances and correlation rho.
Sample bivariate_normal(Eigen::Index n, double rho, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    x(r, 0) = nd(rng);
    y[r] = rho * x(r, 0) + std::sqrt(1 - rho * rho) * nd(rng);
  }
  return Sample(x, y);
}

}  // namespace

TEST_CASE("conditional density: bivariate-normal conditioning") {
  BnjDraw d;
  d.components = {component(1.0, 0.3, -1.0, 1.0, 1.0, 0.5)};
  const Grid g = Grid::uniform(-12, 10, 4001);
  const Eigen::VectorXd f = bnj_conditional_density(d, 1.3, g);
  CHECK(trapezoid(f, g) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(grid_mean(f, g) == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(grid_variance(f, g) == doctest::Approx(0.75).epsilon(1e-6));

  // Zero covariance: every conditional is the component's output marginal.
  d.components = {component(1.0, 0.0, 2.0, 1.0, 0.25, 0.0)};
  for (double x : {-3.0, 0.0, 4.0}) {
    const Eigen::VectorXd h = bnj_conditional_density(d, x, g);
    for (Eigen::Index j = 0; j < g.size(); j += 97) CHECK(h[j] == doctest::Approx(normal_pdf(g[j], 2.0, 0.5)));
  }
}

TEST_CASE("conditional density: weights follow the x-marginal of each component") {
  BnjDraw d;
  d.components = {component(0.5, -2.0, 0.0, 1.0, 1.0, 0.0), component(0.5, 2.0, 5.0, 1.0, 1.0, 0.0)};
  const Grid g = Grid::uniform(-10, 15, 2001);
  const double w2 = normal_pdf(1.0, 2.0, 1.0) / (normal_pdf(1.0, 2.0, 1.0) + normal_pdf(1.0, -2.0, 1.0));
  CHECK(grid_mean(bnj_conditional_density(d, 1.0, g), g) == doctest::Approx(5.0 * w2).epsilon(1e-6));
}

TEST_CASE("property: conditional densities integrate to one") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2), pos(0.2, 2);
  for (int t = 0; t < 100; ++t) {
    BnjDraw d;
    double total = 0.0;
    for (int l = 0; l < 3; ++l) {
      const double s1 = pos(rng), s2 = pos(rng), r = u(rng) / 2.5;
      d.components.push_back(component(pos(rng), u(rng), u(rng), s1, s2, r * std::sqrt(s1 * s2)));
      total += d.components.back().weight;
    }
    for (auto& c : d.components) c.weight /= total;
    const Grid g = Grid::uniform(-15, 15, 3001);
    CHECK(trapezoid(bnj_conditional_density(d, u(rng), g), g) == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("mixture moments") {
  BnjDraw one;
  one.components = {component(1.0, 0.0, 3.5, 2.0, 0.7, 0.1)};
  CHECK(bnj_output_mean(one) == 3.5);
  CHECK(bnj_output_variance(one) == doctest::Approx(0.7));

  BnjDraw d;
  d.components = {component(0.2, 0, -1, 1, 0.5, 0), component(0.5, 0, 2, 1, 1.5, 0),
                  component(0.3, 0, 0, 1, 0.2, 0)};
  const Grid g = Grid::uniform(-12, 14, 8001);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(g.size());
  for (const auto& c : d.components) add_normal_density(c.weight, c.mean[1], std::sqrt(c.cov(1, 1)), g, f);
  CHECK(bnj_output_mean(d) == doctest::Approx(grid_mean(f, g)).epsilon(1e-6));
  CHECK(bnj_output_variance(d) == doctest::Approx(grid_variance(f, g)).epsilon(0.01));
}

TEST_CASE("draw measures: independence and the bivariate-normal closed form") {
  const InputQuadrature q = input_quadrature(NormalMarginal{0.0, 1.0});
  BnjDraw ind;
  ind.components = {component(1.0, 0.0, 1.0, 1.0, 2.0, 0.0)};
  const auto m0 = bnj_draw_measures(ind, q);
  REQUIRE(m0);
  CHECK(std::abs(m0->eta) < 1e-12);
  CHECK(m0->delta <= 0.02);
  CHECK(m0->beta <= 0.02);

  // Y | x ~ N(rho x, 1 - rho^2) against Y ~ N(0, 1); outer integral by an
  // independent fine trapezoid over the normal distances.
  const double rho = 0.6;
  BnjDraw d;
  d.components = {component(1.0, 0.0, 0.0, 1.0, 1.0, rho)};
  const auto m = bnj_draw_measures(d, q);
  REQUIRE(m);
  const Grid xg = Grid::uniform(-8, 8, 4001);
  Eigen::VectorXd dl(xg.size()), bt(xg.size());
  const double sc = std::sqrt(1 - rho * rho);
  for (Eigen::Index j = 0; j < xg.size(); ++j) {
    dl[j] = normal_pdf(xg[j], 0, 1) * normal_half_l1(rho * xg[j], sc, 0, 1);
    bt[j] = normal_pdf(xg[j], 0, 1) * normal_ks(rho * xg[j], sc, 0, 1);
  }
  CHECK(m->eta == doctest::Approx(rho * rho).epsilon(0.01));
  CHECK(m->delta == doctest::Approx(trapezoid(dl, xg)).epsilon(0.02));
  CHECK(m->beta == doctest::Approx(trapezoid(bt, xg)).epsilon(0.02));
}

TEST_CASE("draw measures are invariant to component labels") {
  const InputQuadrature q = input_quadrature(NormalMarginal{0.0, 1.0});
  BnjDraw d;
  d.components = {component(0.3, -1, 0, 0.5, 1, 0.3), component(0.7, 1, 2, 0.8, 0.6, -0.2)};
  BnjDraw r = d;
  std::swap(r.components[0], r.components[1]);
  const auto a = bnj_draw_measures(d, q), b = bnj_draw_measures(r, q);
  CHECK(a->eta == doctest::Approx(b->eta).epsilon(1e-12));
  CHECK(a->delta == doctest::Approx(b->delta).epsilon(1e-12));
  CHECK(a->beta == doctest::Approx(b->beta).epsilon(1e-12));
}

TEST_CASE("degenerate draws are skipped and logged") {
  BnjDraw bad;
  bad.components = {component(1.0, 0, 0, 1, 0.0, 0.0)};
  BnjDraw good;
  good.components = {component(1.0, 0, 0, 1, 1, 0.5)};
  const MeasureDrawSet set = bnj_measures({good, bad, good}, NormalMarginal{0, 1});
  CHECK(set.size() == 2);
  CHECK(set.skipped.size() == 1);
}

TEST_CASE("fit: single-cluster recovery") {
  const Sample s = bivariate_normal(500, 0.6, 3);
  ChainDiagnostics diag;
  const auto draws = fit_bnj(s, 0, default_bnj_prior(s, 0), 1000, 300, 5, &diag);
  REQUIRE(draws.size() == 300);
  Eigen::VectorXd means(300);
  for (std::size_t t = 0; t < draws.size(); ++t) {
    double w = 0.0;
    for (const auto& c : draws[t].components) w += c.weight;
    CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(draws[t].J() <= 50);
    means[Eigen::Index(t)] = bnj_output_mean(draws[t]);
  }
  // Posterior mean of the output mean sits within 3 standard errors of ybar.
  const double se = std::sqrt(population_variance(s.y()) / 500.0);
  CHECK(std::abs(means.mean() - s.y().mean()) < 3 * se);
  const MeasureDrawSet m = bnj_measures(draws, NormalMarginal{0, 1});
  const DrawSummary eta = m.summary(MeasureKind::Eta);
  CHECK(eta.lo95 <= 0.36);
  CHECK(eta.hi95 >= 0.36);
  CHECK(m.eta.maxCoeff() <= 1.0 + 1e-6);
  CHECK(m.delta.maxCoeff() <= 1.0);
  CHECK(m.beta.maxCoeff() <= 1.0);
}

TEST_CASE("fit: two well-separated clusters") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(400, 1);
  Eigen::VectorXd y(400);
  for (int r = 0; r < 400; ++r) {
    const double shift = r < 200 ? -5.0 : 5.0;
    x(r, 0) = shift + nd(rng);
    y[r] = shift + nd(rng);
  }
  const Sample s(x, y);
  ChainDiagnostics diag;
  fit_bnj(s, 0, default_bnj_prior(s, 0), 1000, 300, 2, &diag);
  std::map<Eigen::Index, int> counts;
  for (auto j : diag.occupied) ++counts[j];
  const auto mode = std::max_element(counts.begin(), counts.end(),
                                     [](auto& a, auto& b) { return a.second < b.second; })->first;
  CHECK(mode >= 2);
  CHECK(mode <= 3);
}

TEST_CASE("fit: deterministic in the seed") {
  const Sample s = bivariate_normal(60, 0.3, 4);
  const auto a = fit_bnj(s, 0, default_bnj_prior(s, 0), 50, 5, 11);
  const auto b = fit_bnj(s, 0, default_bnj_prior(s, 0), 50, 5, 11);
  REQUIRE(a.size() == b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    REQUIRE(a[t].J() == b[t].J());
    for (Eigen::Index l = 0; l < a[t].J(); ++l) {
      CHECK(a[t].components[std::size_t(l)].weight == b[t].components[std::size_t(l)].weight);
      CHECK(a[t].components[std::size_t(l)].mean == b[t].components[std::size_t(l)].mean);
    }
  }
  CHECK_THROWS_CODE(fit_bnj(bivariate_normal(5, 0.3, 1), 0, BnjPrior{}, 10, 1, 1), ErrorCode::Size);
}

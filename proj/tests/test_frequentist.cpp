#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "psens/frequentist.hpp"
#include "psens/simulators.hpp"
#include "test_support.hpp"

using namespace psens;
using testing::vec;
using testing::xy_sample;

namespace {

Sample shuffled(const Sample& s, std::uint64_t seed) {
  std::vector<Eigen::Index> perm(std::size_t(s.n()));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::VectorXd y(s.n());
  for (Eigen::Index r = 0; r < s.n(); ++r) y[r] = s.y()[perm[std::size_t(r)]];
  return Sample(s.x(), y);
}

// Independent oracle for the binned variance share: direct two-pass sums.
double eta_by_hand(const Sample& s, const Partition& p) {
  double ybar = 0.0;
  for (Eigen::Index r = 0; r < s.n(); ++r) ybar += s.y()[r];
  ybar /= double(s.n());
  double var = 0.0;
  for (Eigen::Index r = 0; r < s.n(); ++r) var += (s.y()[r] - ybar) * (s.y()[r] - ybar);
  var /= double(s.n());
  double acc = 0.0;
  for (Eigen::Index m = 0; m < p.bin_count(); ++m) {
    double bm = 0.0;
    for (auto r : p.members(m)) bm += s.y()[r];
    bm /= double(p.count(m));
    acc += double(p.count(m)) / double(s.n()) * (bm - ybar) * (bm - ybar);
  }
  return acc / var;
}

}  // namespace

TEST_CASE("eta: four-point hand example") {
  const Sample s = xy_sample(vec({1, 2, 3, 4}), vec({1, 2, 3, 4}));
  const Partition p = make_equiprobable_partition(s, 0, 2);
  CHECK(eta_star(s, p).value == doctest::Approx(0.8));
  CHECK(eta_diamond(s, p).value == doctest::Approx(0.8));
  CHECK(eta_star(s, p).bins == 2);
  CHECK(eta_star(s, p).measure == MeasureKind::Eta);
}

TEST_CASE("eta: equal bin means give zero") {
  const Sample s = xy_sample(vec({1, 2, 3, 4, 5, 6}), vec({0, 2, 2, 0, 1, 1}));
  const Partition p = make_equiprobable_partition(s, 0, 3);
  CHECK(eta_star(s, p).value == doctest::Approx(0.0));
  CHECK(std::abs(eta_diamond(s, p).value) < 1e-15);
  CHECK_THROWS_CODE(eta_star(xy_sample(vec({1, 2}), vec({3, 3})),
                             make_equiprobable_partition(xy_sample(vec({1, 2}), vec({3, 3})), 0, 2)),
                    ErrorCode::DegenerateSample);
}

TEST_CASE("property: eta_star equals eta_diamond and the two-pass oracle") {
  std::mt19937_64 rng(21);
  std::lognormal_distribution<double> ln(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 10 + int(rng() % 300);
    Eigen::VectorXd x(n), y(n);
    for (int r = 0; r < n; ++r) x[r] = ln(rng), y[r] = std::sin(3 * x[r]) + ln(rng);
    const Sample s = xy_sample(x, y);
    const Partition p = make_equiprobable_partition(s, 0, 2 + int(rng() % 8));
    const double a = eta_star(s, p).value, b = eta_diamond(s, p).value;
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
    CHECK(a == doctest::Approx(eta_by_hand(s, p)).epsilon(1e-10));
  }
}

TEST_CASE("beta: identity map hand example") {
  const Sample s = xy_sample(vec({1, 2, 3, 4}), vec({1, 2, 3, 4}));
  CHECK(beta_diamond(s, make_equiprobable_partition(s, 0, 2)).value == doctest::Approx(0.5));
}

TEST_CASE("property: beta depends only on ranks of y") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Eigen::VectorXd x(200), y(200);
  for (int r = 0; r < 200; ++r) x[r] = nd(rng), y[r] = x[r] + nd(rng);
  const Sample s = xy_sample(x, y);
  const Partition p = make_equiprobable_partition(s, 0, 7);
  const Eigen::VectorXd ty = y.array().exp() * 3.0 + 1.0;
  CHECK(beta_diamond(s, p).value == beta_diamond(xy_sample(x, ty), p).value);
}

TEST_CASE("delta: half L1 of disjoint densities is one") {
  const Grid g = Grid::uniform(0, 4, 401);
  Eigen::VectorXd f1 = Eigen::VectorXd::Zero(401), f2 = Eigen::VectorXd::Zero(401);
  for (Eigen::Index j = 0; j < 401; ++j) {
    if (g[j] <= 1.0) f1[j] = 1.0;
    if (g[j] >= 2.0 && g[j] <= 3.0) f2[j] = 1.0;
  }
  // The trapezoid smears each indicator over half a cell at both ends.
  CHECK(half_l1_on_grid(f1, f2, g) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(half_l1_on_grid(f1, f1, g) == 0.0);
}

TEST_CASE("delta: well-separated clusters") {
  // Two tight output clusters, one per bin. The marginal KDE bandwidth spans
  // the gap, so each narrow bin density is almost disjoint from it and the
  // density route approaches 1. The cdf route reads the masses off the
  // empirical cdfs, where each cluster carries half the marginal: 1 - 1/2.
  Eigen::VectorXd x(200), y(200);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd(0.0, 0.01);
  for (int r = 0; r < 200; ++r) x[r] = r, y[r] = (r < 100 ? 0.0 : 10.0) + nd(rng);
  const Sample s = xy_sample(x, y);
  const Partition p = make_equiprobable_partition(s, 0, 2);
  const Grid g = output_grid(s, p);
  const double half = delta_star(s, p, g).value;
  CHECK(half > 0.95);
  CHECK(half <= 1.0);
  CHECK(delta_star(s, p, g, DeltaScale::FullL1).value == doctest::Approx(2.0 * half));
  CHECK(delta_diamond(s, p, g).value == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("delta: identical bins give zero") {
  // Each bin holds the same multiset of outputs: eta and beta vanish exactly;
  // the KDE routes differ only through the n^(-1/5) bandwidth factor.
  const int per = 1000;
  Eigen::VectorXd x(2 * per), y(2 * per);
  for (int j = 0; j < per; ++j) {
    const double q = boost::math::quantile(boost::math::normal(), (j + 0.5) / per);
    x[j] = j, y[j] = q;
    x[per + j] = per + j, y[per + j] = q;
  }
  const Sample s = xy_sample(x, y);
  const Partition p = make_equiprobable_partition(s, 0, 2);
  const Grid g = output_grid(s, p);
  CHECK(std::abs(eta_star(s, p).value) < 1e-12);
  CHECK(beta_diamond(s, p).value == 0.0);
  CHECK(delta_star(s, p, g).value < 0.02);
  CHECK(delta_diamond(s, p, g).value < 0.02);
}

TEST_CASE("delta: bins below two members are rejected") {
  const Sample s = xy_sample(vec({1, 2, 3, 4}), vec({1, 5, 2, 3}));
  const Partition p = make_equiprobable_partition(s, 0, 3);
  CHECK_THROWS_CODE(delta_star(s, p, output_grid(s, make_equiprobable_partition(s, 0, 2))),
                    ErrorCode::PartitionTooFine);
}

TEST_CASE("gamma-ratio-2 at n=900, M=9") {
  const Sample s = generate_sample(gamma_ratio_2(), 900, 1);
  const Partition p = make_equiprobable_partition(s, 0, 9);
  const Grid g = output_grid(s, p);
  const double e = eta_star(s, p).value, ds = delta_star(s, p, g).value,
               dd = delta_diamond(s, p, g).value, b = beta_diamond(s, p).value;
  CHECK(e >= 0.40);
  CHECK(e <= 0.60);
  CHECK(std::abs(eta_diamond(s, p).value - e) < 0.02);
  CHECK(ds >= 0.25);
  CHECK(ds <= 0.40);
  CHECK(dd >= 0.25);
  CHECK(dd <= 0.40);
  CHECK(std::abs(dd - ds) < 0.02);
  CHECK(b >= 0.22);
  CHECK(b <= 0.36);
}

TEST_CASE("property: permuting rows leaves every estimate unchanged") {
  const Sample s = generate_sample(gamma_ratio_2(), 300, 4);
  std::vector<Eigen::Index> perm(300);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  const Sample r = s.select_rows(perm);
  const Partition ps = make_equiprobable_partition(s, 1, 6), pr = make_equiprobable_partition(r, 1, 6);
  CHECK(eta_star(s, ps).value == doctest::Approx(eta_star(r, pr).value).epsilon(1e-12));
  CHECK(beta_diamond(s, ps).value == doctest::Approx(beta_diamond(r, pr).value).epsilon(1e-12));
  CHECK(delta_star(s, ps, output_grid(s, ps)).value ==
        doctest::Approx(delta_star(r, pr, output_grid(r, pr)).value).epsilon(1e-9));
}

TEST_CASE("shuffled pairing stays below the noise floor") {
  int failures = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Sample s = shuffled(generate_sample(gamma_ratio_2(), 900, seed), 100 + seed);
    const Partition p = make_equiprobable_partition(s, 0, 9);
    const Grid g = output_grid(s, p);
    for (double v : {eta_star(s, p).value, delta_star(s, p, g).value, delta_diamond(s, p, g).value,
                     beta_diamond(s, p).value})
      failures += v >= 0.15;
  }
  CHECK(failures == 0);
}

TEST_CASE("larger samples with finer partitions land closer to the table") {
  const MeasureTriple truth = oracle_values(gamma_ratio_2())[0];
  double err_small = 0.0, err_large = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (auto [n, m, err] : {std::tuple{300, 3, &err_small}, std::tuple{900, 9, &err_large}}) {
      const Sample s = generate_sample(gamma_ratio_2(), n, seed, Sequence::PseudoRandom);
      const Partition p = make_equiprobable_partition(s, 0, m);
      const Grid g = output_grid(s, p);
      *err += std::abs(eta_star(s, p).value - truth.eta) +
              std::abs(delta_star(s, p, g).value - truth.delta) +
              std::abs(beta_diamond(s, p).value - truth.beta);
    }
  }
  CHECK(err_large < err_small);
}

TEST_CASE("step cdf gap equals the difference of means") {
  CHECK(step_cdf_gap({1, 2, 3}, {2, 4}) == doctest::Approx(2.0 - 3.0));
  CHECK(step_cdf_gap({0.5}, {0.5}) == 0.0);
}

TEST_CASE("measure names round-trip") {
  for (MeasureKind m : {MeasureKind::Eta, MeasureKind::Delta, MeasureKind::Beta})
    CHECK(parse_measure(to_string(m)) == m);
  CHECK_THROWS_CODE(parse_measure("gamma"), ErrorCode::Config);
}

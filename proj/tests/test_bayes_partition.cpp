#include <doctest.h>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <variant>

#include "psens/bayes_partition.hpp"
#include "psens/frequentist.hpp"
#include "psens/simulators.hpp"
#include "test_support.hpp"

using namespace psens;
using testing::vec;
using testing::xy_sample;

namespace {

double variance_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double d : v) m += d;
  m /= double(v.size());
  double acc = 0.0;
  for (double d : v) acc += (d - m) * (d - m);
  return acc / double(v.size() - 1);
}

bool is_member(double v, const Eigen::VectorXd& bin) {
  return (bin.array() == v).any();
}

}  // namespace

TEST_CASE("default dp spec") {
  const Sample s300 = generate_sample(gamma_ratio_2(), 300, 1);
  CHECK(default_dp_spec(s300, 3).alpha == doctest::Approx(10.0));
  const Sample s900 = generate_sample(gamma_ratio_2(), 900, 1);
  const DpSpec d = default_dp_spec(s900, 9);
  CHECK(d.alpha == doctest::Approx(10.0));
  CHECK(std::holds_alternative<BetaBase>(d.base.law()));

  // Outputs in (0,1) with mean 0.5 and population variance 1/20.
  const double h = std::sqrt(0.05);
  const Sample b = xy_sample(vec({1, 2, 3, 4}), vec({0.5 - h, 0.5 + h, 0.5 - h, 0.5 + h}));
  const auto& law = std::get<BetaBase>(default_dp_spec(b, 2).base.law());
  CHECK(law.a == doctest::Approx(2.0));
  CHECK(law.b == doctest::Approx(2.0));

  const Sample l = generate_sample(correlated_linear_21(), 400, 1);
  const auto& nb = std::get<NormalBase>(default_dp_spec(l, 4).base.law());
  CHECK(nb.mean == doctest::Approx(l.y().mean()));
  CHECK(nb.sd == doctest::Approx(std::sqrt(population_variance(l.y()))));
}

TEST_CASE("base measure quantiles match Boost") {
  const BaseMeasure beta = BetaBase{2.5, 0.7};
  const boost::math::beta_distribution<> ref(2.5, 0.7);
  for (double p : {1e-9, 1e-4, 0.002, 0.1, 0.5, 0.93, 0.9995, 1 - 1e-9})
    CHECK(beta.quantile(p) == doctest::Approx(boost::math::quantile(ref, p)).epsilon(1e-12));
  const BaseMeasure normal = NormalBase{3.0, 2.0};
  CHECK(normal.quantile(0.975) == doctest::Approx(3.0 + 2.0 * 1.959963984540054));
  CHECK_THROWS_CODE(BaseMeasure(BetaBase{-1.0, 1.0}), ErrorCode::Domain);
  CHECK_THROWS_CODE(BaseMeasure(NormalBase{0.0, 0.0}), ErrorCode::Domain);
}

TEST_CASE("base measure draws follow the law") {
  const BaseMeasure beta = BetaBase{3.0, 3.0};
  const boost::math::beta_distribution<> ref(3.0, 3.0);
  Rng rng = make_rng(5, {1});
  std::vector<double> u;
  for (int i = 0; i < 20000; ++i) u.push_back(boost::math::cdf(ref, beta.draw(rng)));
  std::sort(u.begin(), u.end());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    d = std::max({d, std::abs(u[i] - double(i) / 20000.0), std::abs(u[i] - double(i + 1) / 20000.0)});
  // Kolmogorov 0.1% critical value: 1.95 / sqrt(n).
  CHECK(d < 1.95 / std::sqrt(20000.0));
}

TEST_CASE("bb augmentation: sizes and limits") {
  const Eigen::VectorXd bin = vec({0.2, 0.4, 0.6});
  DpSpec spec{1e-12, BetaBase{2, 2}};
  CHECK(bb_augment(bin, 3, spec, 1).size() == 0);
  const Eigen::VectorXd a = bb_augment(bin, 500, spec, 1);
  CHECK(a.size() == 497);
  for (double v : a) CHECK(is_member(v, bin));
  CHECK_THROWS_CODE(bb_augment(bin, 2, spec, 1), ErrorCode::Size);
  CHECK_THROWS_CODE(bb_augment(Eigen::VectorXd(), 2, spec, 1), ErrorCode::EmptySample);
  CHECK(bb_augment(bin, 50, spec, 9) == bb_augment(bin, 50, spec, 9));
}

TEST_CASE("bb augmentation: base-measure frequency equals alpha / (alpha + n_m)") {
  const Eigen::VectorXd bin = vec({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95});
  const DpSpec spec{10.0, BetaBase{2, 2}};
  Rng rng = make_rng(7, {});
  const Augmentation aug = bb_augment_traced(bin, 100010, spec, rng);
  const double frac = double(aug.base_draws) / 100000.0;
  CHECK(std::abs(frac - 0.5) < 0.01);
  // Draws from G almost surely miss the bin's atoms.
  Eigen::Index atoms = 0;
  for (double v : aug.values) atoms += is_member(v, bin);
  CHECK(atoms == aug.values.size() - aug.base_draws);
}

TEST_CASE("pu augmentation: limits") {
  DpSpec spec{1e-12, NormalBase{0, 1}};
  const Eigen::VectorXd single = pu_augment(vec({4.25}), 300, spec, 3);
  CHECK((single.array() == 4.25).all());
  const Eigen::VectorXd bin = vec({1, 2, 3});
  for (double v : pu_augment(bin, 200, spec, 4)) CHECK(is_member(v, bin));
  CHECK(pu_augment(bin, 3, spec, 1).size() == 0);
  CHECK_THROWS_CODE(pu_augment(bin, 1, spec, 1), ErrorCode::Size);
}

TEST_CASE("pu augmentation: urn weights use every value so far") {
  // With alpha = 1, after j values the base probability is 1/(1+j); the
  // expected number of base draws from a bin of 10 grown to 100 is
  // sum_{j=10}^{99} 1/(1+j).
  const Eigen::VectorXd bin = Eigen::VectorXd::LinSpaced(10, 0.05, 0.95);
  const DpSpec spec{1.0, BetaBase{2, 2}};
  double expected = 0.0;
  for (int j = 10; j < 100; ++j) expected += 1.0 / (1.0 + j);
  double total = 0.0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_rng(11, {std::uint64_t(r)});
    total += double(pu_augment_traced(bin, 100, spec, rng).base_draws);
  }
  CHECK(total / reps == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("pu augmentation clusters more than bb") {
  const Eigen::VectorXd bin = Eigen::VectorXd::LinSpaced(10, 0.05, 0.95);
  const DpSpec spec{1.0, BetaBase{2, 2}};
  std::vector<double> bb, pu;
  for (int r = 0; r < 1000; ++r) {
    auto grown_mean = [&](const Eigen::VectorXd& a) { return (bin.sum() + a.sum()) / 100.0; };
    bb.push_back(grown_mean(bb_augment(bin, 100, spec, 1000 + r)));
    pu.push_back(grown_mean(pu_augment(bin, 100, spec, 1000 + r)));
  }
  CHECK(variance_of(pu) > variance_of(bb));
}

TEST_CASE("trivial partition: delta and beta draws vanish") {
  const Sample s = generate_sample(gamma_ratio_2(), 200, 2);
  const Partition p = Partition::trivial(s, 0);
  const DpSpec spec = default_dp_spec(s, 1);
  for (Scheme sc : {Scheme::Bb, Scheme::Pu}) {
    for (MeasureKind m : {MeasureKind::Eta, MeasureKind::Delta, MeasureKind::Beta}) {
      const PosteriorDraws d = estimate_bayes_partition(s, p, spec, m, sc, 10, 1);
      CHECK(d.replicates() == 10);
      CHECK((d.draws.array().abs() < 1e-12).all());
    }
  }
}

TEST_CASE("coherence: single-bin Bb augmentation samples the DP posterior mean") {
  // Augmenting the whole sample to size 2n with Bb gives i.i.d. draws from
  // [alpha/(alpha+n)] G + [n/(alpha+n)] P_n; compare the mean.
  const Sample s = generate_sample(gamma_ratio_2(), 100, 3);
  const DpSpec spec{25.0, BetaBase{3, 3}};
  const double w = 25.0 / 125.0;
  const double target = w * 0.5 + (1 - w) * s.y().mean();
  double acc = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) acc += bb_augment(s.y(), 600, spec, 50 + r).mean();
  const double se = std::sqrt((w * (1.0 / 28.0) + (1 - w) * population_variance(s.y())) / (500.0 * reps));
  CHECK(std::abs(acc / reps - target) < 4 * se + 1e-3);
}

TEST_CASE("posterior draws: determinism and ranges") {
  const Sample s = generate_sample(gamma_ratio_2(), 300, 5);
  const Partition p = make_equiprobable_partition(s, 0, 6);
  const DpSpec spec = default_dp_spec(s, 6);
  for (MeasureKind m : {MeasureKind::Eta, MeasureKind::Delta, MeasureKind::Beta}) {
    const PosteriorDraws a = estimate_bayes_partition(s, p, spec, m, Scheme::Pu, 20, 77);
    const PosteriorDraws b = estimate_bayes_partition(s, p, spec, m, Scheme::Pu, 20, 77);
    CHECK(a.draws == b.draws);
    CHECK(a.bins == 6);
    CHECK(a.draws.minCoeff() >= 0.0);
    if (m != MeasureKind::Eta) CHECK(a.draws.maxCoeff() <= 1.0);
  }
  const PosteriorDraws pdf =
      estimate_bayes_partition(s, p, spec, MeasureKind::Delta, Scheme::Bb, 10, 1, Route::PdfBased);
  CHECK(pdf.route == Route::PdfBased);
  CHECK(pdf.draws.maxCoeff() <= 1.0);
}

TEST_CASE("gamma-ratio-2: Bb and Pu agree in mean; Pu intervals are wider") {
  int wider = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Sample s = generate_sample(gamma_ratio_2(), 900, seed);
    const Partition p = make_equiprobable_partition(s, 0, 9);
    const DpSpec spec = default_dp_spec(s, 9);
    const DrawSummary bb = estimate_bayes_partition(s, p, spec, MeasureKind::Eta, Scheme::Bb, 100, seed).summary();
    const DrawSummary pu = estimate_bayes_partition(s, p, spec, MeasureKind::Eta, Scheme::Pu, 100, seed).summary();
    CHECK(std::abs(bb.mean - pu.mean) < 0.03);
    wider += (pu.hi95 - pu.lo95) >= (bb.hi95 - bb.lo95);
  }
  CHECK(wider >= 18);
}

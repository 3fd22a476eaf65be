#include "psens/bnc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "psens/error.hpp"
#include "psens/rng.hpp"

namespace psens {

namespace {

constexpr Eigen::Index kGeometricCap = 100000;

struct Scaling {
  double x_mean, x_sd, y_mean, y_sd;
};

Scaling scaling_of(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double sx = std::sqrt(population_variance(x));
  const double sy = std::sqrt(population_variance(y));
  if (!(sx > 0.0) || !(sy > 0.0))
    throw Error(ErrorCode::DegenerateSample, "input or output has zero variance");
  return {x.mean(), sx, y.mean(), sy};
}

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; counter-clockwise, no repeated first vertex.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  if (pts.size() < 3) return pts;
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double draw_gamma(Rng& rng, double shape, double rate) {
  return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

double draw_beta(Rng& rng, double a, double b) {
  const double x = draw_gamma(rng, a, 1.0);
  const double y = draw_gamma(rng, b, 1.0);
  return x / (x + y);
}

// Univariate slice sampler with stepping out.
template <typename LogDensity>
double slice_step(Rng& rng, double x0, double width, LogDensity&& logf) {
  const double level = logf(x0) + std::log(uniform_open(rng));
  double lo = x0 - width * uniform_open(rng);
  double hi = lo + width;
  for (int steps = 0; steps < 50 && logf(lo) > level; ++steps) lo -= width;
  for (int steps = 0; steps < 50 && logf(hi) > level; ++steps) hi += width;
  for (int tries = 0; tries < 200; ++tries) {
    const double x = lo + (hi - lo) * uniform_open(rng);
    if (logf(x) > level) return x;
    (x < x0 ? lo : hi) = x;
  }
  return x0;
}

// log(1 - exp(-u)) for u >= 0.
double log1m_exp_neg(double u) { return u > 0.0 ? std::log(-std::expm1(-u)) : -std::numeric_limits<double>::infinity(); }

}  // namespace

BncPrior default_bnc_prior(const Sample& sample, Eigen::Index input_index) {
  if (input_index < 0 || input_index >= sample.k())
    throw Error(ErrorCode::Dimension, "input index out of range");
  const Eigen::VectorXd x = sample.column(input_index);
  const Scaling sc = scaling_of(x, sample.y());
  const Eigen::Index n = sample.n();
  std::vector<Eigen::Vector2d> pts(static_cast<std::size_t>(n));
  double sxy = 0.0, sxx = 0.0, xbar = 0.0, ybar = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    pts[std::size_t(i)] = {(x[i] - sc.x_mean) / sc.x_sd, (sample.y()[i] - sc.y_mean) / sc.y_sd};
    xbar += pts[std::size_t(i)][0] / double(n);
    ybar += pts[std::size_t(i)][1] / double(n);
  }
  for (const auto& p : pts) {
    sxy += (p[0] - xbar) * (p[1] - ybar);
    sxx += (p[0] - xbar) * (p[0] - xbar);
  }
  BncPrior prior;
  const double slope = sxy / sxx;
  prior.b0 = {ybar - slope * xbar, slope};

  const auto hull = convex_hull(pts);
  double xmin = pts[0][0], xmax = pts[0][0];
  for (const auto& p : pts) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
  }
  double ca = 1.0, cb = 1.0;
  for (std::size_t e = 0; e < hull.size(); ++e) {
    const auto& p = hull[e];
    const auto& q = hull[(e + 1) % hull.size()];
    const double dx = q[0] - p[0];
    if (std::abs(dx) < 0.1 * (xmax - xmin)) continue;
    const double s = (q[1] - p[1]) / dx;
    const double t = p[1] - s * p[0];
    ca = std::max(ca, std::abs(t - prior.b0[0]));
    cb = std::max(cb, std::abs(s - prior.b0[1]));
  }
  prior.c_inv = {ca * ca, cb * cb};
  prior.mu0 = 0.0;
  return prior;
}

Eigen::VectorXd BncDraw::weights_at(double x) const {
  const auto k = Eigen::Index(components.size());
  Eigen::VectorXd w(k);
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index l = 0; l < k; ++l) {
    const auto& c = components[std::size_t(l)];
    const double d = x - c.mu;
    w[l] = std::log(c.omega) - 0.5 * tau * d * d;
    top = std::max(top, w[l]);
  }
  w = (w.array() - top).exp();
  return w / w.sum();
}

std::vector<BncDraw> fit_bnc(const Sample& sample, Eigen::Index input_index,
                             const BncPrior& prior, Eigen::Index burn_in, Eigen::Index draws,
                             std::uint64_t seed, BncDiagnostics* diagnostics) {
  const Eigen::Index n = sample.n();
  if (n < 10) throw Error(ErrorCode::Size, "the regression mixture needs at least 10 observations");
  if (input_index < 0 || input_index >= sample.k())
    throw Error(ErrorCode::Dimension, "input index out of range");
  if (burn_in < 0 || draws < 1) throw Error(ErrorCode::Size, "need burn_in >= 0 and draws >= 1");
  if (!(prior.alpha > 0.0) || !(prior.c_inv.minCoeff() > 0.0) || !(prior.mu_scale > 0.0) ||
      !(prior.tau_shape > 0.0) || !(prior.tau_rate > 0.0) || !(prior.sigma_shape > 0.0) ||
      !(prior.sigma_rate > 0.0) || prior.truncation < 2)
    throw Error(ErrorCode::Domain, "invalid regression-mixture prior");

  const Eigen::VectorXd x_raw = sample.column(input_index);
  const Scaling sc = scaling_of(x_raw, sample.y());
  const Eigen::VectorXd x = (x_raw.array() - sc.x_mean) / sc.x_sd;
  const Eigen::VectorXd y = (sample.y().array() - sc.y_mean) / sc.y_sd;
  const int L = prior.truncation;
  const Eigen::Matrix2d c_mat = prior.c_inv.cwiseInverse().asDiagonal();

  Rng rng = make_rng(seed, {0xB7C});
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd a = Eigen::VectorXd::Constant(L, prior.b0[0]);
  Eigen::VectorXd b = Eigen::VectorXd::Constant(L, prior.b0[1]);
  Eigen::VectorXd sigma = Eigen::VectorXd::Ones(L);
  Eigen::VectorXd mu(L), omega(L);
  double tau = 1.0;

  // Start from ten kernels at input deciles, points on the nearest one.
  std::vector<double> xs(x.data(), x.data() + n);
  std::sort(xs.begin(), xs.end());
  const int seeded = std::min(L, 10);
  for (int l = 0; l < L; ++l)
    mu[l] = l < seeded ? xs[std::size_t((double(l) + 0.5) / seeded * double(n))]
                       : prior.mu0 + std::sqrt(prior.mu_scale / tau) * normal(rng);
  omega.setConstant(1.0 / L);
  std::vector<int> z(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    for (int l = 1; l < seeded; ++l)
      if (std::abs(x[i] - mu[l]) < std::abs(x[i] - mu[best])) best = l;
    z[std::size_t(i)] = best;
  }

  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(L));
  std::vector<std::vector<std::pair<Eigen::Index, Eigen::Index>>> secondary(static_cast<std::size_t>(L));
  Eigen::VectorXd logp(L), kern(L);
  Eigen::Index capped = 0;
  std::vector<BncDraw> out;
  out.reserve(std::size_t(draws));
  if (diagnostics) diagnostics->occupied.clear();

  auto regression_update = [&] {
    for (int l = 0; l < L; ++l) {
      Eigen::Matrix2d xtx = Eigen::Matrix2d::Zero();
      Eigen::Vector2d xty = Eigen::Vector2d::Zero();
      double yty = 0.0;
      for (Eigen::Index i : members[std::size_t(l)]) {
        const Eigen::Vector2d row(1.0, x[i]);
        xtx += row * row.transpose();
        xty += row * y[i];
        yty += y[i] * y[i];
      }
      const Eigen::Matrix2d lambda = c_mat + xtx;
      const Eigen::Matrix2d lambda_inv = lambda.inverse();
      const Eigen::Vector2d beta_n = lambda_inv * (c_mat * prior.b0 + xty);
      const double shape = prior.sigma_shape + 0.5 * double(members[std::size_t(l)].size());
      const double rate = prior.sigma_rate + 0.5 * std::max(0.0, yty + prior.b0.dot(c_mat * prior.b0) -
                                                                  beta_n.dot(lambda * beta_n));
      sigma[l] = 1.0 / draw_gamma(rng, shape, rate);
      const Eigen::Matrix2d chol = (sigma[l] * lambda_inv).llt().matrixL();
      const Eigen::Vector2d ab = beta_n + chol * Eigen::Vector2d(normal(rng), normal(rng));
      a[l] = ab[0];
      b[l] = ab[1];
    }
  };
  for (auto& m : members) m.clear();
  for (Eigen::Index i = 0; i < n; ++i) members[std::size_t(z[std::size_t(i)])].push_back(i);
  regression_update();

  const Eigen::Index sweeps = burn_in + draws;
  for (Eigen::Index sweep = 0; sweep < sweeps; ++sweep) {
    // Primary allocations, then latent counts and secondary allocations.
    for (auto& m : members) m.clear();
    for (auto& s : secondary) s.clear();
    const Eigen::ArrayXd log_omega = omega.array().log();
    const Eigen::ArrayXd log_norm = -0.5 * (sigma.array().log() + std::log(2.0 * std::numbers::pi));
    for (Eigen::Index i = 0; i < n; ++i) {
      double top = -std::numeric_limits<double>::infinity();
      double denom = 0.0;
      for (int l = 0; l < L; ++l) {
        const double dx = x[i] - mu[l];
        const double r = y[i] - a[l] - b[l] * x[i];
        kern[l] = std::exp(-0.5 * tau * dx * dx);
        denom += omega[l] * kern[l];
        logp[l] = log_omega[l] - 0.5 * tau * dx * dx + log_norm[l] - 0.5 * r * r / sigma[l];
        top = std::max(top, logp[l]);
      }
      double total = 0.0;
      for (int l = 0; l < L; ++l) total += (logp[l] = std::exp(logp[l] - top));
      double u = uniform_open(rng) * total;
      int pick = 0;
      while (pick < L - 1 && (u -= logp[pick]) > 0.0) ++pick;
      z[std::size_t(i)] = pick;
      members[std::size_t(pick)].push_back(i);

      // 1 / D_i = sum_k (1 - D_i)^k: k_i ~ Geometric(D_i) extra allocations,
      // each to component l with probability proportional to omega_l (1 - K_l(x_i)).
      if (!(denom < 1.0)) continue;
      Eigen::Index k = 0;
      if (denom <= 0.0) {
        k = kGeometricCap;
      } else {
        const double g = std::floor(std::log(uniform_open(rng)) / std::log1p(-denom));
        k = g >= double(kGeometricCap) ? kGeometricCap : Eigen::Index(g);
      }
      if (k == kGeometricCap) ++capped;
      if (k == 0) continue;
      double rest = 0.0;
      for (int l = 0; l < L; ++l) rest += (logp[l] = omega[l] * (1.0 - kern[l]));
      Eigen::Index remaining = k;
      for (int l = 0; l < L && remaining > 0; ++l) {
        Eigen::Index c = remaining;
        if (l < L - 1 && rest > 0.0) {
          const double p = std::clamp(logp[l] / rest, 0.0, 1.0);
          c = std::binomial_distribution<Eigen::Index>(remaining, p)(rng);
        }
        rest -= logp[l];
        if (c > 0) secondary[std::size_t(l)].emplace_back(i, c);
        remaining -= c;
      }
    }

    // Stick-breaking weights from primary plus secondary counts.
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(L);
    for (int l = 0; l < L; ++l) {
      counts[l] = double(members[std::size_t(l)].size());
      for (const auto& [i, c] : secondary[std::size_t(l)]) counts[l] += double(c);
    }
    double tail = counts.sum();
    double left = 1.0;
    for (int l = 0; l < L; ++l) {
      tail -= counts[l];
      const double v = l == L - 1 ? 1.0 : draw_beta(rng, 1.0 + counts[l], prior.alpha + tail);
      omega[l] = left * v;
      left *= 1.0 - v;
    }
    omega = omega.cwiseMax(1e-300);

    regression_update();

    // Kernel locations.
    for (int l = 0; l < L; ++l) {
      const auto& mem = members[std::size_t(l)];
      const auto& sec = secondary[std::size_t(l)];
      if (mem.empty() && sec.empty()) {
        mu[l] = prior.mu0 + std::sqrt(prior.mu_scale / tau) * normal(rng);
        continue;
      }
      auto logf = [&](double m) {
        double v = -0.5 * tau / prior.mu_scale * (m - prior.mu0) * (m - prior.mu0);
        for (Eigen::Index i : mem) v -= 0.5 * tau * (x[i] - m) * (x[i] - m);
        for (const auto& [i, c] : sec) v += double(c) * log1m_exp_neg(0.5 * tau * (x[i] - m) * (x[i] - m));
        return v;
      };
      mu[l] = slice_step(rng, mu[l], std::max(0.1, 1.0 / std::sqrt(tau)), logf);
    }

    // Shared kernel precision, on the log scale.
    auto log_tau_density = [&](double t) {
      const double tv = std::exp(t);
      double v = prior.tau_shape * t - prior.tau_rate * tv;
      for (int l = 0; l < L; ++l) {
        v += 0.5 * t - 0.5 * tv / prior.mu_scale * (mu[l] - prior.mu0) * (mu[l] - prior.mu0);
        for (Eigen::Index i : members[std::size_t(l)]) v -= 0.5 * tv * (x[i] - mu[l]) * (x[i] - mu[l]);
        for (const auto& [i, c] : secondary[std::size_t(l)])
          v += double(c) * log1m_exp_neg(0.5 * tv * (x[i] - mu[l]) * (x[i] - mu[l]));
      }
      return v;
    };
    tau = std::exp(slice_step(rng, std::log(tau), 1.0, log_tau_density));

    if (sweep < burn_in) continue;

    BncDraw draw;
    draw.tau = tau / (sc.x_sd * sc.x_sd);
    double wsum = 0.0;
    for (int l = 0; l < L; ++l) {
      if (members[std::size_t(l)].empty()) continue;
      BncComponent c;
      c.omega = omega[l];
      c.b = sc.y_sd * b[l] / sc.x_sd;
      c.a = sc.y_mean + sc.y_sd * a[l] - c.b * sc.x_mean;
      c.sigma = sc.y_sd * sc.y_sd * sigma[l];
      c.mu = sc.x_mean + sc.x_sd * mu[l];
      wsum += c.omega;
      draw.components.push_back(c);
    }
    for (auto& c : draw.components) c.omega /= wsum;
    if (diagnostics) diagnostics->occupied.push_back(draw.J());
    out.push_back(std::move(draw));
  }
  if (diagnostics) diagnostics->capped_geometric = capped;
  return out;
}

Eigen::VectorXd bnc_conditional_density(const BncDraw& draw, double x, const Grid& grid) {
  if (draw.components.empty()) throw Error(ErrorCode::Domain, "draw has no components");
  const Eigen::VectorXd w = draw.weights_at(x);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.size());
  for (std::size_t l = 0; l < draw.components.size(); ++l) {
    const auto& c = draw.components[l];
    if (w[Eigen::Index(l)] > 0.0)
      add_normal_density(w[Eigen::Index(l)], c.a + c.b * x, std::sqrt(c.sigma), grid, out);
  }
  return out;
}

std::optional<BncDrawMeasures> bnc_draw_measures(const BncDraw& draw,
                                                 const InputQuadrature& quad) {
  const auto k = Eigen::Index(draw.components.size());
  if (k == 0) return std::nullopt;
  const Eigen::Index nx = quad.grid.size();

  Eigen::MatrixXd w(nx, k), m(nx, k);
  Eigen::VectorXd sd(k);
  for (Eigen::Index l = 0; l < k; ++l) sd[l] = std::sqrt(draw.components[std::size_t(l)].sigma);
  for (Eigen::Index j = 0; j < nx; ++j) {
    w.row(j) = draw.weights_at(quad.grid[j]).transpose();
    for (Eigen::Index l = 0; l < k; ++l) {
      const auto& c = draw.components[std::size_t(l)];
      m(j, l) = c.a + c.b * quad.grid[j];
    }
  }
  if (!w.allFinite() || !m.allFinite() || !sd.allFinite()) return std::nullopt;

  // Output grid over every conditional component that matters somewhere.
  std::vector<double> gm, gs, gw;
  for (Eigen::Index l = 0; l < k; ++l) {
    if (!(w.col(l).maxCoeff() > 1e-6)) continue;
    for (Eigen::Index j : {Eigen::Index(0), nx - 1}) {
      gm.push_back(m(j, l));
      gs.push_back(sd[l]);
      gw.push_back(1.0);
    }
  }
  const Grid grid = normal_mixture_grid(Eigen::Map<Eigen::VectorXd>(gm.data(), Eigen::Index(gm.size())),
                                        Eigen::Map<Eigen::VectorXd>(gs.data(), Eigen::Index(gs.size())),
                                        Eigen::Map<Eigen::VectorXd>(gw.data(), Eigen::Index(gw.size())));

  Eigen::MatrixXd cond = Eigen::MatrixXd::Zero(grid.size(), nx);
  Eigen::VectorXd mu_x(nx), second(nx);
  for (Eigen::Index j = 0; j < nx; ++j) {
    double m1 = 0.0, m2 = 0.0;
    for (Eigen::Index l = 0; l < k; ++l) {
      const double wl = w(j, l);
      if (wl == 0.0) continue;
      m1 += wl * m(j, l);
      m2 += wl * (sd[l] * sd[l] + m(j, l) * m(j, l));
      add_normal_density(wl, m(j, l), sd[l], grid, cond.col(j));
    }
    mu_x[j] = m1;
    second[j] = m2;
  }
  const Eigen::VectorXd f_y = cond * quad.weights;
  const Eigen::VectorXd cdf_y = cumulative_cdf(f_y, grid);

  BncDrawMeasures r;
  r.mean_by_regression = quad.weights.dot(mu_x);
  r.output_variance = quad.weights.dot(second) - r.mean_by_regression * r.mean_by_regression;
  r.marginal_mass = trapezoid(f_y, grid);
  r.mean_by_density = trapezoid(grid.points().cwiseProduct(f_y), grid);
  if (!std::isfinite(r.output_variance) || !(r.output_variance > 0.0)) return std::nullopt;

  double eta_num = 0.0, delta_acc = 0.0, beta_acc = 0.0;
  for (Eigen::Index j = 0; j < nx; ++j) {
    const double d = mu_x[j] - r.mean_by_regression;
    eta_num += quad.weights[j] * d * d;
    delta_acc += quad.weights[j] * trapezoid((cond.col(j) - f_y).cwiseAbs(), grid);
    beta_acc += quad.weights[j] * (cumulative_cdf(cond.col(j), grid) - cdf_y).cwiseAbs().maxCoeff();
  }
  r.measures = {eta_num / r.output_variance, std::clamp(0.5 * delta_acc, 0.0, 1.0),
                std::clamp(beta_acc, 0.0, 1.0)};
  if (!std::isfinite(r.measures.eta)) return std::nullopt;
  return r;
}

MeasureDrawSet bnc_measures(const std::vector<BncDraw>& draws, const Marginal& input_law) {
  if (draws.empty()) throw Error(ErrorCode::Size, "no posterior draws");
  const InputQuadrature quad = input_quadrature(input_law);
  std::vector<MeasureTriple> kept;
  MeasureDrawSet out;
  for (std::size_t s = 0; s < draws.size(); ++s) {
    if (auto m = bnc_draw_measures(draws[s], quad)) {
      kept.push_back(m->measures);
    } else {
      std::ostringstream msg;
      msg << "draw " << s << ": degenerate output variance, skipped";
      out.skipped.push_back(msg.str());
    }
  }
  if (kept.empty()) throw Error(ErrorCode::DegenerateSample, "every posterior draw was degenerate");
  const auto len = Eigen::Index(kept.size());
  out.eta.resize(len);
  out.delta.resize(len);
  out.beta.resize(len);
  for (Eigen::Index s = 0; s < len; ++s) {
    out.eta[s] = kept[std::size_t(s)].eta;
    out.delta[s] = kept[std::size_t(s)].delta;
    out.beta[s] = kept[std::size_t(s)].beta;
  }
  return out;
}

}  // namespace psens

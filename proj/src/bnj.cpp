#include "psens/bnj.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "psens/error.hpp"
#include "psens/rng.hpp"

namespace psens {

BnjPrior default_bnj_prior(const Sample& sample, Eigen::Index input_index) {
  if (input_index < 0 || input_index >= sample.k())
    throw Error(ErrorCode::Dimension, "input index out of range");
  const Eigen::VectorXd x = sample.column(input_index);
  BnjPrior prior;
  prior.m2 = {x.mean(), sample.y().mean()};
  const double vx = population_variance(x);
  const double vy = population_variance(sample.y());
  if (!(vx > 0.0) || !(vy > 0.0))
    throw Error(ErrorCode::DegenerateSample, "input or output has zero variance");
  prior.s2 = Eigen::Vector2d(vx, vy).asDiagonal();
  return prior;
}

namespace {

constexpr double kLogPi = 1.14472988584940017414;

// Symmetrizes and, if needed, adds diagonal jitter until the matrix is
// positive definite. Returns whether jitter was applied.
bool repair_pd(Eigen::Matrix2d& m) {
  m = 0.5 * (m + m.transpose()).eval();
  auto is_pd = [&] { return m(0, 0) > 0.0 && m(1, 1) > 0.0 && m.determinant() > 0.0; };
  if (is_pd()) return false;
  double eps = 1e-10 * std::max({std::abs(m(0, 0)), std::abs(m(1, 1)), 1e-300});
  for (int attempt = 0; attempt < 60 && !is_pd(); ++attempt, eps *= 10.0)
    m += eps * Eigen::Matrix2d::Identity();
  if (!is_pd()) throw Error(ErrorCode::Matrix, "could not repair a covariance matrix");
  return true;
}

double draw_gamma(Rng& rng, double shape, double rate) {
  return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

double draw_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

// Bartlett decomposition.
Eigen::Matrix2d draw_wishart(Rng& rng, double df, const Eigen::Matrix2d& scale) {
  const Eigen::Matrix2d l = scale.llt().matrixL();
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  a(0, 0) = std::sqrt(2.0 * draw_gamma(rng, 0.5 * df, 1.0));
  a(1, 1) = std::sqrt(2.0 * draw_gamma(rng, 0.5 * (df - 1.0), 1.0));
  a(1, 0) = draw_normal(rng);
  const Eigen::Matrix2d la = l * a;
  return la * la.transpose();
}

Eigen::Vector2d draw_mvn(Rng& rng, const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov) {
  const Eigen::Matrix2d l = cov.llt().matrixL();
  return mean + l * Eigen::Vector2d(draw_normal(rng), draw_normal(rng));
}

struct Hyper {
  Eigen::Vector2d m1;
  double gamma;
  Eigen::Matrix2d psi;
};

struct Cluster {
  Eigen::Index n = 0;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  Eigen::Matrix2d outer = Eigen::Matrix2d::Zero();  // sum of z z'

  // Cached Student-t posterior predictive.
  Eigen::Vector2d loc;
  Eigen::Matrix2d inv_scale;
  double df = 0.0;
  double log_const = 0.0;

  void add(const Eigen::Vector2d& z) {
    ++n;
    sum += z;
    outer += z * z.transpose();
  }
  void remove(const Eigen::Vector2d& z) {
    --n;
    sum -= z;
    outer -= z * z.transpose();
  }
};

struct NiwPosterior {
  Eigen::Vector2d mean;
  double gamma;
  double nu;
  Eigen::Matrix2d psi;
};

NiwPosterior niw_posterior(const Cluster& c, const Hyper& h, double nu) {
  NiwPosterior p;
  p.gamma = h.gamma + double(c.n);
  p.nu = nu + double(c.n);
  p.mean = (h.gamma * h.m1 + c.sum) / p.gamma;
  p.psi = h.psi;
  if (c.n > 0) {
    const Eigen::Vector2d xbar = c.sum / double(c.n);
    const Eigen::Matrix2d scatter = c.outer - double(c.n) * xbar * xbar.transpose();
    const Eigen::Vector2d d = xbar - h.m1;
    p.psi += scatter + (h.gamma * double(c.n) / p.gamma) * d * d.transpose();
  }
  return p;
}

void refresh_predictive(Cluster& c, const Hyper& h, double nu, Eigen::Index& jitter) {
  const NiwPosterior p = niw_posterior(c, h, nu);
  c.df = p.nu - 1.0;
  Eigen::Matrix2d scale = p.psi * ((p.gamma + 1.0) / (p.gamma * c.df));
  if (repair_pd(scale)) ++jitter;
  c.loc = p.mean;
  c.inv_scale = scale.inverse();
  c.log_const = std::lgamma(0.5 * (c.df + 2.0)) - std::lgamma(0.5 * c.df) - std::log(c.df) -
                kLogPi - 0.5 * std::log(scale.determinant());
}

double log_predictive(const Cluster& c, const Eigen::Vector2d& z) {
  const Eigen::Vector2d d = z - c.loc;
  const double q = d.dot(c.inv_scale * d);
  return c.log_const - 0.5 * (c.df + 2.0) * std::log1p(q / c.df);
}

}  // namespace

std::vector<BnjDraw> fit_bnj(const Sample& sample, Eigen::Index input_index,
                             const BnjPrior& prior, Eigen::Index burn_in, Eigen::Index draws,
                             std::uint64_t seed, ChainDiagnostics* diagnostics) {
  const Eigen::Index n = sample.n();
  if (n < 10) throw Error(ErrorCode::Size, "the joint mixture needs at least 10 observations");
  if (input_index < 0 || input_index >= sample.k())
    throw Error(ErrorCode::Dimension, "input index out of range");
  if (burn_in < 0 || draws < 1) throw Error(ErrorCode::Size, "need burn_in >= 0 and draws >= 1");
  if (!(prior.alpha > 0.0) || !(prior.nu > 3.0) || !(prior.scale_df > 1.0) ||
      !(prior.gamma_shape > 0.0) || !(prior.gamma_rate > 0.0) || prior.max_components < 1)
    throw Error(ErrorCode::Domain, "invalid joint-mixture prior");
  const Eigen::Matrix2d s2_inv = prior.s2.inverse();
  if (!(prior.s2.determinant() > 0.0))
    throw Error(ErrorCode::Matrix, "prior scale s2 must be positive definite");

  std::vector<Eigen::Vector2d> z(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) z[std::size_t(i)] = {sample.x()(i, input_index), sample.y()[i]};

  Rng rng = make_rng(seed, {0xB71});
  Eigen::Index jitter = 0;
  Hyper hyper{prior.m2, 1.0, prior.s2};

  std::vector<Cluster> clusters(1);
  std::vector<Eigen::Index> alloc(std::size_t(n), 0);
  for (const auto& zi : z) clusters[0].add(zi);
  Cluster empty;

  auto refresh_all = [&] {
    for (auto& c : clusters) refresh_predictive(c, hyper, prior.nu, jitter);
    refresh_predictive(empty, hyper, prior.nu, jitter);
  };
  refresh_all();

  std::vector<double> logp;
  std::vector<BnjDraw> out;
  out.reserve(std::size_t(draws));
  if (diagnostics) diagnostics->occupied.clear();

  const Eigen::Index sweeps = burn_in + draws;
  for (Eigen::Index sweep = 0; sweep < sweeps; ++sweep) {
    // Allocations, component parameters integrated out.
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& zi = z[std::size_t(i)];
      const Eigen::Index c = alloc[std::size_t(i)];
      clusters[std::size_t(c)].remove(zi);
      if (clusters[std::size_t(c)].n == 0) {
        const Eigen::Index last = Eigen::Index(clusters.size()) - 1;
        if (c != last) {
          clusters[std::size_t(c)] = clusters[std::size_t(last)];
          for (auto& a : alloc)
            if (a == last) a = c;
        }
        clusters.pop_back();
      } else {
        refresh_predictive(clusters[std::size_t(c)], hyper, prior.nu, jitter);
      }

      const std::size_t k = clusters.size();
      logp.resize(k + 1);
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        logp[j] = std::log(double(clusters[j].n)) + log_predictive(clusters[j], zi);
        top = std::max(top, logp[j]);
      }
      logp[k] = std::log(prior.alpha) + log_predictive(empty, zi);
      top = std::max(top, logp[k]);
      double total = 0.0;
      for (auto& v : logp) total += (v = std::exp(v - top));
      double u = uniform_open(rng) * total;
      std::size_t pick = 0;
      while (pick < k && (u -= logp[pick]) > 0.0) ++pick;

      if (pick == k) clusters.emplace_back();
      clusters[pick].add(zi);
      alloc[std::size_t(i)] = Eigen::Index(pick);
      refresh_predictive(clusters[pick], hyper, prior.nu, jitter);
    }

    // Component parameters given the allocation.
    const std::size_t k = clusters.size();
    std::vector<Eigen::Vector2d> mus(k);
    std::vector<Eigen::Matrix2d> sigmas(k), sigma_invs(k);
    for (std::size_t j = 0; j < k; ++j) {
      const NiwPosterior p = niw_posterior(clusters[j], hyper, prior.nu);
      Eigen::Matrix2d psi_inv = p.psi.inverse();
      if (repair_pd(psi_inv)) ++jitter;
      sigma_invs[j] = draw_wishart(rng, p.nu, psi_inv);
      if (repair_pd(sigma_invs[j])) ++jitter;
      sigmas[j] = sigma_invs[j].inverse();
      if (repair_pd(sigmas[j])) ++jitter;
      mus[j] = draw_mvn(rng, p.mean, sigmas[j] / p.gamma);
    }

    // Hyperparameters given the component parameters.
    double q = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const Eigen::Vector2d d = mus[j] - hyper.m1;
      q += d.dot(sigma_invs[j] * d);
    }
    hyper.gamma = draw_gamma(rng, prior.gamma_shape + double(k), prior.gamma_rate + 0.5 * q);

    Eigen::Matrix2d precision = s2_inv;
    Eigen::Vector2d shift = s2_inv * prior.m2;
    Eigen::Matrix2d inv_sum = Eigen::Matrix2d::Zero();
    for (std::size_t j = 0; j < k; ++j) {
      precision += hyper.gamma * sigma_invs[j];
      shift += hyper.gamma * sigma_invs[j] * mus[j];
      inv_sum += sigma_invs[j];
    }
    Eigen::Matrix2d m1_cov = precision.inverse();
    if (repair_pd(m1_cov)) ++jitter;
    hyper.m1 = draw_mvn(rng, m1_cov * shift, m1_cov);

    Eigen::Matrix2d psi_scale = (prior.scale_df * s2_inv + inv_sum).inverse();
    if (repair_pd(psi_scale)) ++jitter;
    hyper.psi = draw_wishart(rng, prior.scale_df + double(k) * prior.nu, psi_scale);
    if (repair_pd(hyper.psi)) ++jitter;
    refresh_all();

    if (sweep < burn_in) continue;

    // Weights: Dirichlet(n_1, ..., n_k), truncated to the largest components.
    BnjDraw draw;
    draw.components.resize(k);
    for (std::size_t j = 0; j < k; ++j)
      draw.components[j] = {draw_gamma(rng, double(clusters[j].n), 1.0), mus[j], sigmas[j]};
    std::sort(draw.components.begin(), draw.components.end(),
              [](const BnjComponent& a, const BnjComponent& b) { return a.weight > b.weight; });
    if (draw.components.size() > std::size_t(prior.max_components))
      draw.components.resize(std::size_t(prior.max_components));
    double wsum = 0.0;
    for (const auto& c : draw.components) wsum += c.weight;
    for (auto& c : draw.components) c.weight /= wsum;
    out.push_back(std::move(draw));
    if (diagnostics) diagnostics->occupied.push_back(Eigen::Index(k));
  }
  if (diagnostics) diagnostics->jitter_events = jitter;
  return out;
}

Eigen::VectorXd bnj_conditional_density(const BnjDraw& draw, double x, const Grid& grid) {
  const std::size_t k = draw.components.size();
  if (k == 0) throw Error(ErrorCode::Domain, "draw has no components");
  std::vector<double> logw(k);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < k; ++l) {
    const auto& c = draw.components[l];
    const double s1 = c.cov(0, 0);
    const double d = x - c.mean[0];
    logw[l] = std::log(c.weight) - 0.5 * std::log(s1) - 0.5 * d * d / s1;
    top = std::max(top, logw[l]);
  }
  double total = 0.0;
  for (auto& v : logw) total += (v = std::exp(v - top));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.size());
  for (std::size_t l = 0; l < k; ++l) {
    if (logw[l] == 0.0) continue;
    const auto& c = draw.components[l];
    const double s1 = c.cov(0, 0), s2 = c.cov(1, 1), s3 = c.cov(0, 1);
    add_normal_density(logw[l] / total, c.mean[1] + s3 * (x - c.mean[0]) / s1,
                       std::sqrt(s2 - s3 * s3 / s1), grid, out);
  }
  return out;
}

double bnj_output_mean(const BnjDraw& draw) {
  double m = 0.0;
  for (const auto& c : draw.components) m += c.weight * c.mean[1];
  return m;
}

double bnj_output_variance(const BnjDraw& draw) {
  const double m = bnj_output_mean(draw);
  double v = 0.0;
  for (const auto& c : draw.components) {
    const double d = m - c.mean[1];
    v += c.weight * (c.cov(1, 1) + d * d);
  }
  return v;
}

std::optional<MeasureTriple> bnj_draw_measures(const BnjDraw& draw,
                                               const InputQuadrature& quad) {
  const std::size_t k = draw.components.size();
  if (k == 0) return std::nullopt;
  const double mu_y = bnj_output_mean(draw);
  const double var_y = bnj_output_variance(draw);
  if (!std::isfinite(mu_y) || !std::isfinite(var_y) || !(var_y > 0.0)) return std::nullopt;

  Eigen::VectorXd means(k), sds(k), weights(k);
  for (std::size_t l = 0; l < k; ++l) {
    const auto& c = draw.components[l];
    means[Eigen::Index(l)] = c.mean[1];
    sds[Eigen::Index(l)] = std::sqrt(c.cov(1, 1));
    weights[Eigen::Index(l)] = c.weight;
  }
  const Grid grid = normal_mixture_grid(means, sds, weights);
  Eigen::VectorXd f_y = Eigen::VectorXd::Zero(grid.size());
  for (std::size_t l = 0; l < k; ++l)
    add_normal_density(weights[Eigen::Index(l)], means[Eigen::Index(l)], sds[Eigen::Index(l)], grid, f_y);
  const Eigen::VectorXd cdf_y = cumulative_cdf(f_y, grid);

  double eta_num = 0.0, delta_acc = 0.0, beta_acc = 0.0;
  Eigen::VectorXd f_cond(grid.size());
  std::vector<double> lw(k);
  for (Eigen::Index j = 0; j < quad.grid.size(); ++j) {
    const double x = quad.grid[j];
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < k; ++l) {
      const auto& c = draw.components[l];
      const double d = x - c.mean[0];
      lw[l] = std::log(c.weight) - 0.5 * std::log(2.0 * std::numbers::pi * c.cov(0, 0)) -
              0.5 * d * d / c.cov(0, 0);
      top = std::max(top, lw[l]);
    }
    double total = 0.0;
    for (auto& v : lw) total += (v = std::exp(v - top));
    const double f_x_model = std::exp(top) * total;

    f_cond.setZero();
    double mu_x = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
      const double lambda = lw[l] / total;
      if (lambda == 0.0) continue;
      const auto& c = draw.components[l];
      const double s1 = c.cov(0, 0), s2 = c.cov(1, 1), s3 = c.cov(0, 1);
      const double nu = c.mean[1] + s3 * (x - c.mean[0]) / s1;
      mu_x += lambda * nu;
      add_normal_density(lambda, nu, std::sqrt(s2 - s3 * s3 / s1), grid, f_cond);
    }
    eta_num += quad.weights[j] * (mu_x - mu_y) * (mu_x - mu_y);
    delta_acc += quad.trapezoid[j] *
                 trapezoid((f_x_model * f_cond - quad.density[j] * f_y).cwiseAbs(), grid);
    beta_acc += quad.weights[j] * (cumulative_cdf(f_cond, grid) - cdf_y).cwiseAbs().maxCoeff();
  }
  MeasureTriple m{eta_num / var_y, std::clamp(0.5 * delta_acc, 0.0, 1.0),
                  std::clamp(beta_acc, 0.0, 1.0)};
  if (!std::isfinite(m.eta) || !std::isfinite(m.delta) || !std::isfinite(m.beta))
    return std::nullopt;
  return m;
}

MeasureDrawSet bnj_measures(const std::vector<BnjDraw>& draws, const Marginal& input_law) {
  if (draws.empty()) throw Error(ErrorCode::Size, "no posterior draws");
  const InputQuadrature quad = input_quadrature(input_law);
  std::vector<MeasureTriple> kept;
  MeasureDrawSet out;
  for (std::size_t s = 0; s < draws.size(); ++s) {
    if (auto m = bnj_draw_measures(draws[s], quad)) {
      kept.push_back(*m);
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

#include "psens/distributions.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <sstream>

#include "psens/error.hpp"

namespace psens {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

boost::math::gamma_distribution<> as_boost(const GammaMarginal& g) {
  return boost::math::gamma_distribution<>(g.shape, 1.0 / g.rate);
}

double empirical_mean(const EmpiricalMarginal& e) {
  double s = 0.0;
  for (double c : e.density.centers()) s += c;
  return s / double(e.density.centers().size());
}

}  // namespace

Marginal::Marginal(Law law) : law_(std::move(law)) {
  std::visit(overloaded{
                 [](const NormalMarginal& m) {
                   if (!(m.sd > 0.0)) throw Error(ErrorCode::Domain, "normal marginal needs sd > 0");
                 },
                 [](const GammaMarginal& m) {
                   if (!(m.shape > 0.0 && m.rate > 0.0))
                     throw Error(ErrorCode::Domain, "gamma marginal needs positive shape and rate");
                 },
                 [](const UniformMarginal& m) {
                   if (!(m.hi > m.lo)) throw Error(ErrorCode::Domain, "uniform marginal needs lo < hi");
                 },
                 [](const LogUniformMarginal& m) {
                   if (!(m.lo > 0.0 && m.hi > m.lo))
                     throw Error(ErrorCode::Domain, "log-uniform marginal needs 0 < lo < hi");
                 },
                 [](const EmpiricalMarginal&) {},
             },
             law_);
}

double Marginal::pdf(double x) const {
  return std::visit(
      overloaded{
          [x](const NormalMarginal& m) { return normal_pdf(x, m.mean, m.sd); },
          [x](const GammaMarginal& m) { return x <= 0.0 ? 0.0 : boost::math::pdf(as_boost(m), x); },
          [x](const UniformMarginal& m) { return (x < m.lo || x > m.hi) ? 0.0 : 1.0 / (m.hi - m.lo); },
          [x](const LogUniformMarginal& m) {
            return (x < m.lo || x > m.hi) ? 0.0 : 1.0 / (x * std::log(m.hi / m.lo));
          },
          [x](const EmpiricalMarginal& m) { return m.density.density(x); },
      },
      law_);
}

double Marginal::cdf(double x) const {
  return std::visit(
      overloaded{
          [x](const NormalMarginal& m) { return normal_cdf(x, m.mean, m.sd); },
          [x](const GammaMarginal& m) { return x <= 0.0 ? 0.0 : boost::math::cdf(as_boost(m), x); },
          [x](const UniformMarginal& m) {
            return std::clamp((x - m.lo) / (m.hi - m.lo), 0.0, 1.0);
          },
          [x](const LogUniformMarginal& m) {
            if (x <= m.lo) return 0.0;
            return std::min(1.0, std::log(x / m.lo) / std::log(m.hi / m.lo));
          },
          [x](const EmpiricalMarginal& m) { return m.density.cdf(x); },
      },
      law_);
}

double Marginal::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::Domain, "marginal quantile needs p in (0,1)");
  return std::visit(
      overloaded{
          [p](const NormalMarginal& m) {
            return boost::math::quantile(boost::math::normal_distribution<>(m.mean, m.sd), p);
          },
          [p](const GammaMarginal& m) { return boost::math::quantile(as_boost(m), p); },
          [p](const UniformMarginal& m) { return m.lo + p * (m.hi - m.lo); },
          [p](const LogUniformMarginal& m) { return m.lo * std::pow(m.hi / m.lo, p); },
          [p, this](const EmpiricalMarginal& m) {
            const auto& c = m.density.centers();
            const double h = m.density.bandwidth();
            double lo = c.front() - 12.0 * h, hi = c.back() + 12.0 * h;
            for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::abs(lo)); ++it) {
              const double mid = 0.5 * (lo + hi);
              (cdf(mid) < p ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
          },
      },
      law_);
}

double Marginal::mean() const {
  return std::visit(overloaded{
                        [](const NormalMarginal& m) { return m.mean; },
                        [](const GammaMarginal& m) { return m.shape / m.rate; },
                        [](const UniformMarginal& m) { return 0.5 * (m.lo + m.hi); },
                        [](const LogUniformMarginal& m) {
                          return (m.hi - m.lo) / std::log(m.hi / m.lo);
                        },
                        [](const EmpiricalMarginal& m) { return empirical_mean(m); },
                    },
                    law_);
}

double Marginal::variance() const {
  return std::visit(
      overloaded{
          [](const NormalMarginal& m) { return m.sd * m.sd; },
          [](const GammaMarginal& m) { return m.shape / (m.rate * m.rate); },
          [](const UniformMarginal& m) { return (m.hi - m.lo) * (m.hi - m.lo) / 12.0; },
          [](const LogUniformMarginal& m) {
            const double l = std::log(m.hi / m.lo);
            const double ex2 = (m.hi * m.hi - m.lo * m.lo) / (2.0 * l);
            const double ex = (m.hi - m.lo) / l;
            return ex2 - ex * ex;
          },
          [](const EmpiricalMarginal& m) {
            const double mu = empirical_mean(m);
            double s = 0.0;
            for (double c : m.density.centers()) s += (c - mu) * (c - mu);
            const double h = m.density.bandwidth();
            return s / double(m.density.centers().size()) + h * h;
          },
      },
      law_);
}

std::string Marginal::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const NormalMarginal& m) { os << "Normal(" << m.mean << ", sd=" << m.sd << ")"; },
                 [&](const GammaMarginal& m) { os << "Gamma(shape=" << m.shape << ", rate=" << m.rate << ")"; },
                 [&](const UniformMarginal& m) { os << "U(" << m.lo << ", " << m.hi << ")"; },
                 [&](const LogUniformMarginal& m) { os << "LU(" << m.lo << ", " << m.hi << ")"; },
                 [&](const EmpiricalMarginal& m) {
                   os << "KDE(n=" << m.density.centers().size() << ", h=" << m.density.bandwidth() << ")";
                 },
             },
             law_);
  return os.str();
}

}  // namespace psens

#include "psens/kde.hpp"

#include <algorithm>
#include <cmath>

#include "psens/sample.hpp"

namespace psens {

namespace {
constexpr double kCutoff = 9.0;  // bandwidths
}

double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() < 2)
    throw Error(ErrorCode::DegenerateSample, "kde needs at least two values");
  const double sd = sample_sd(values);
  if (!(sd > 0.0)) throw Error(ErrorCode::DegenerateSample, "kde of zero-variance values");
  Eigen::VectorXd p(2);
  p << 0.25, 0.75;
  const auto q = empirical_quantiles(values, p);
  const double iqr = (q[1] - q[0]) / 1.34;
  const double spread = iqr > 0.0 ? std::min(sd, iqr) : sd;
  return 0.9 * spread * std::pow(double(values.size()), -0.2);
}

KernelDensity::KernelDensity(const Eigen::Ref<const Eigen::VectorXd>& values,
                             std::optional<double> bandwidth)
    : centers_(values.data(), values.data() + values.size()) {
  if (!values.allFinite()) throw Error(ErrorCode::InvalidSample, "kde: non-finite value");
  if (bandwidth) {
    if (!(*bandwidth > 0.0)) throw Error(ErrorCode::Domain, "kde bandwidth must be positive");
    if (centers_.empty()) throw Error(ErrorCode::EmptySample, "kde of empty vector");
    h_ = *bandwidth;
  } else {
    h_ = silverman_bandwidth(values);
  }
  std::sort(centers_.begin(), centers_.end());
}

double KernelDensity::density(double y) const {
  const auto lo = std::lower_bound(centers_.begin(), centers_.end(), y - kCutoff * h_);
  const auto hi = std::upper_bound(lo, centers_.end(), y + kCutoff * h_);
  double acc = 0.0;
  for (auto it = lo; it != hi; ++it) {
    const double z = (y - *it) / h_;
    acc += std::exp(-0.5 * z * z);
  }
  return acc * kInvSqrt2Pi / (h_ * double(centers_.size()));
}

double KernelDensity::cdf(double y) const {
  double acc = 0.0;
  for (double c : centers_) acc += normal_cdf(y, c, h_);
  return acc / double(centers_.size());
}

Eigen::VectorXd KernelDensity::evaluate(const Grid& grid) const {
  const auto& g = grid.points();
  const double* first = g.data();
  const double* last = g.data() + g.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(g.size());
  for (double c : centers_) {
    const double* lo = std::lower_bound(first, last, c - kCutoff * h_);
    const double* hi = std::upper_bound(lo, last, c + kCutoff * h_);
    for (const double* p = lo; p != hi; ++p) {
      const double z = (*p - c) / h_;
      out[p - first] += std::exp(-0.5 * z * z);
    }
  }
  return out * (kInvSqrt2Pi / (h_ * double(centers_.size())));
}

Eigen::VectorXd KernelDensity::evaluate_binned(const Grid& grid) const {
  if (!grid.is_uniform()) return evaluate(grid);
  const Eigen::Index gsize = grid.size();
  const double step = grid.step();
  const double origin = grid.front();

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(gsize);
  for (double c : centers_) {
    const double pos = (c - origin) / step;
    if (pos <= 0.0) {
      counts[0] += 1.0;
    } else if (pos >= double(gsize - 1)) {
      counts[gsize - 1] += 1.0;
    } else {
      const auto l = static_cast<Eigen::Index>(pos);
      const double frac = pos - double(l);
      counts[l] += 1.0 - frac;
      counts[l + 1] += frac;
    }
  }

  const Eigen::Index window =
      std::min<Eigen::Index>(gsize - 1, static_cast<Eigen::Index>(std::ceil(kCutoff * h_ / step)));
  Eigen::VectorXd kernel(window + 1);
  for (Eigen::Index d = 0; d <= window; ++d) {
    const double z = double(d) * step / h_;
    kernel[d] = std::exp(-0.5 * z * z);
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(gsize);
  for (Eigen::Index j = 0; j < gsize; ++j) {
    const double cj = counts[j];
    if (cj == 0.0) continue;
    const Eigen::Index lo = std::max<Eigen::Index>(0, j - window);
    const Eigen::Index hi = std::min<Eigen::Index>(gsize - 1, j + window);
    for (Eigen::Index i = lo; i <= hi; ++i) out[i] += cj * kernel[std::abs(i - j)];
  }
  return out * (kInvSqrt2Pi / (h_ * double(centers_.size())));
}

Grid KernelDensity::default_grid() const {
  return Grid::uniform(centers_.front() - 3.0 * h_, centers_.back() + 3.0 * h_,
                       kDefaultOutputGridSize);
}

}  // namespace psens

#include "psens/ecdf.hpp"

#include <algorithm>

#include "psens/error.hpp"

namespace psens {

EmpiricalCdf::EmpiricalCdf(const Eigen::Ref<const Eigen::VectorXd>& values)
    : sorted_(values.data(), values.data() + values.size()) {
  if (sorted_.empty()) throw Error(ErrorCode::EmptySample, "empirical cdf of empty vector");
  if (!values.allFinite()) throw Error(ErrorCode::InvalidSample, "empirical cdf: non-finite value");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double y) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), y);
  return double(it - sorted_.begin()) / double(sorted_.size());
}

Eigen::VectorXd EmpiricalCdf::evaluate(const Eigen::Ref<const Eigen::VectorXd>& ys) const {
  Eigen::VectorXd out(ys.size());
  for (Eigen::Index i = 0; i < ys.size(); ++i) out[i] = (*this)(ys[i]);
  return out;
}

}  // namespace psens

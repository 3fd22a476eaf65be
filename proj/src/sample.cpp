#include "psens/sample.hpp"

#include <cmath>
#include <string>

#include "psens/error.hpp"

namespace psens {

Sample::Sample(Eigen::MatrixXd x, Eigen::VectorXd y, std::vector<std::string> input_names)
    : x_(std::move(x)), y_(std::move(y)), names_(std::move(input_names)) {
  if (x_.rows() != y_.size())
    throw Error(ErrorCode::InvalidSample, "sample: " + std::to_string(x_.rows()) +
                                              " input rows but " +
                                              std::to_string(y_.size()) + " outputs");
  if (y_.size() < 2) throw Error(ErrorCode::InvalidSample, "sample: need n >= 2");
  if (x_.cols() < 1) throw Error(ErrorCode::InvalidSample, "sample: need k >= 1");
  if (!x_.allFinite() || !y_.allFinite())
    throw Error(ErrorCode::InvalidSample, "sample: non-finite entry");
  if (names_.empty()) {
    for (Eigen::Index i = 0; i < x_.cols(); ++i) names_.push_back("x" + std::to_string(i + 1));
  } else if (Eigen::Index(names_.size()) != x_.cols()) {
    throw Error(ErrorCode::InvalidSample, "sample: input name count differs from k");
  }
}

Sample Sample::select_rows(const std::vector<Eigen::Index>& rows) const {
  Eigen::MatrixXd x(Eigen::Index(rows.size()), k());
  Eigen::VectorXd y(Eigen::Index(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    x.row(Eigen::Index(r)) = x_.row(rows[r]);
    y[Eigen::Index(r)] = y_[rows[r]];
  }
  return Sample(std::move(x), std::move(y), names_);
}

double mean(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() == 0) throw Error(ErrorCode::EmptySample, "mean of empty vector");
  return v.mean();
}

double population_variance(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = mean(v);
  return (v.array() - m).square().mean();
}

double sample_sd(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() < 2) throw Error(ErrorCode::EmptySample, "sd needs at least two values");
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / double(v.size() - 1));
}

}  // namespace psens

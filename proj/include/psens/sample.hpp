#ifndef PSENS_SAMPLE_HPP
#define PSENS_SAMPLE_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace psens {

// A given-data sample: n input rows with k columns and the n simulator outputs.
// Immutable after construction; the constructor validates shape and finiteness.
class Sample {
 public:
  Sample(Eigen::MatrixXd x, Eigen::VectorXd y,
         std::vector<std::string> input_names = {});

  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  const std::vector<std::string>& input_names() const { return names_; }

  Eigen::Index n() const { return y_.size(); }
  Eigen::Index k() const { return x_.cols(); }
  auto column(Eigen::Index i) const { return x_.col(i); }

  // Rows picked by index, in the given order (duplicates allowed).
  Sample select_rows(const std::vector<Eigen::Index>& rows) const;

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  std::vector<std::string> names_;
};

double mean(const Eigen::Ref<const Eigen::VectorXd>& v);
// Population variance (denominator n).
double population_variance(const Eigen::Ref<const Eigen::VectorXd>& v);
// Unbiased sample standard deviation (denominator n - 1).
double sample_sd(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace psens

#endif  // PSENS_SAMPLE_HPP

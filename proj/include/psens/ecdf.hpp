#ifndef PSENS_ECDF_HPP
#define PSENS_ECDF_HPP

#include <Eigen/Dense>

#include <vector>

namespace psens {

// Right-continuous empirical cdf, F(y) = #{values <= y} / n.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(const Eigen::Ref<const Eigen::VectorXd>& values);

  double operator()(double y) const;
  double evaluate(double y) const { return (*this)(y); }
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& ys) const;

  const std::vector<double>& sorted_values() const { return sorted_; }
  Eigen::Index size() const { return Eigen::Index(sorted_.size()); }

 private:
  std::vector<double> sorted_;
};

inline EmpiricalCdf empirical_cdf(const Eigen::Ref<const Eigen::VectorXd>& values) {
  return EmpiricalCdf(values);
}

}  // namespace psens

#endif  // PSENS_ECDF_HPP

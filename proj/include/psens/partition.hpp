#ifndef PSENS_PARTITION_HPP
#define PSENS_PARTITION_HPP

#include <Eigen/Dense>

#include <vector>

#include "psens/sample.hpp"

namespace psens {

// Equiprobable binning of one input's realizations. Bins are ordered by the
// input value (ties broken by sample index); the first n % M bins carry one
// extra member.
class Partition {
 public:
  Partition(Eigen::Index input_index, std::vector<std::vector<Eigen::Index>> bins);

  // Single bin holding every observation. Only estimators that accept M = 1
  // (the Bayesian coherence checks) are meant to consume it.
  static Partition trivial(const Sample& sample, Eigen::Index input_index);

  Eigen::Index input_index() const { return input_; }
  Eigen::Index bin_count() const { return Eigen::Index(bins_.size()); }
  const std::vector<Eigen::Index>& members(Eigen::Index m) const { return bins_[m]; }
  Eigen::Index count(Eigen::Index m) const { return Eigen::Index(bins_[m].size()); }
  Eigen::Index total() const;

  // Output values of the bin members, in member order.
  Eigen::VectorXd bin_outputs(const Sample& sample, Eigen::Index m) const;

 private:
  Eigen::Index input_;
  std::vector<std::vector<Eigen::Index>> bins_;
};

Partition make_equiprobable_partition(const Sample& sample, Eigen::Index input_index,
                                      Eigen::Index bins);

}  // namespace psens

#endif  // PSENS_PARTITION_HPP

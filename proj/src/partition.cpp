#include "psens/partition.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "psens/error.hpp"

namespace psens {

Partition::Partition(Eigen::Index input_index, std::vector<std::vector<Eigen::Index>> bins)
    : input_(input_index), bins_(std::move(bins)) {
  if (bins_.empty()) throw Error(ErrorCode::InvalidPartition, "partition has no bins");
}

Partition Partition::trivial(const Sample& sample, Eigen::Index input_index) {
  if (input_index < 0 || input_index >= sample.k())
    throw Error(ErrorCode::InvalidPartition, "input index out of range");
  std::vector<Eigen::Index> all(static_cast<std::size_t>(sample.n()));
  std::iota(all.begin(), all.end(), Eigen::Index(0));
  return Partition(input_index, {std::move(all)});
}

Eigen::Index Partition::total() const {
  Eigen::Index t = 0;
  for (const auto& b : bins_) t += Eigen::Index(b.size());
  return t;
}

Eigen::VectorXd Partition::bin_outputs(const Sample& sample, Eigen::Index m) const {
  const auto& idx = bins_[m];
  Eigen::VectorXd out(Eigen::Index(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out[Eigen::Index(j)] = sample.y()[idx[j]];
  return out;
}

Partition make_equiprobable_partition(const Sample& sample, Eigen::Index input_index,
                                      Eigen::Index bins) {
  if (input_index < 0 || input_index >= sample.k())
    throw Error(ErrorCode::InvalidPartition,
                "input index " + std::to_string(input_index) + " out of range");
  const Eigen::Index n = sample.n();
  if (bins < 2)
    throw Error(ErrorCode::InvalidPartition, "partition size M must be at least 2");
  if (bins > n)
    throw Error(ErrorCode::InvalidPartition,
                "partition size M=" + std::to_string(bins) + " exceeds n=" + std::to_string(n));

  const auto col = sample.column(input_index);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return col[a] < col[b] || (col[a] == col[b] && a < b);
  });

  const Eigen::Index base = n / bins;
  const Eigen::Index surplus = n % bins;
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(bins));
  auto it = order.begin();
  for (Eigen::Index m = 0; m < bins; ++m) {
    const Eigen::Index size = base + (m < surplus ? 1 : 0);
    members[std::size_t(m)].assign(it, it + size);
    it += size;
  }
  return Partition(input_index, std::move(members));
}

}  // namespace psens

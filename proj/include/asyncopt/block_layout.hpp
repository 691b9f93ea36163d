#pragma once

#include <Eigen/Core>

#include <limits>
#include <vector>

namespace asyncopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Norm order selecting the max-abs norm for a block.
inline constexpr double kInfOrder = std::numeric_limits<double>::infinity();

/// One block of the ensemble vector: dimension, the p-norm order it is
/// measured in, and the normalization weight it is divided by.
struct Block {
  Eigen::Index dim = 1;
  double order = 2.0;   // p in [1, inf]; kInfOrder is the max-abs norm
  double weight = 1.0;  // w >= 1
};

/// Contiguous partition of [0, n) into per-agent blocks.
///
/// Offsets are derived from the block dimensions, so the blocks always cover
/// the ensemble index range exactly once.
class BlockLayout {
 public:
  BlockLayout() = default;
  explicit BlockLayout(std::vector<Block> blocks);

  /// `count` identical blocks.
  static BlockLayout uniform(int count, Eigen::Index dim, double order = 2.0,
                             double weight = 1.0);
  /// One scalar block per entry of `orders`/`weights`.
  static BlockLayout scalar(const Vector& orders, const Vector& weights);

  int block_count() const { return static_cast<int>(blocks_.size()); }
  Eigen::Index dim() const { return dim_; }
  const Block& block(int i) const;
  Eigen::Index offset(int i) const;

  double min_order() const { return min_order_; }
  double min_weight() const { return min_weight_; }

 private:
  std::vector<Block> blocks_;
  std::vector<Eigen::Index> offsets_;
  Eigen::Index dim_ = 0;
  double min_order_ = kInfOrder;
  double min_weight_ = std::numeric_limits<double>::infinity();
};

/// Block i of an ensemble vector as an Eigen segment expression.
template <typename Derived>
auto block_of(const Eigen::MatrixBase<Derived>& x, const BlockLayout& layout,
              int i) {
  return x.segment(layout.offset(i), layout.block(i).dim);
}

template <typename Derived>
auto block_of(Eigen::MatrixBase<Derived>& x, const BlockLayout& layout,
              int i) {
  return x.segment(layout.offset(i), layout.block(i).dim);
}

}  // namespace asyncopt

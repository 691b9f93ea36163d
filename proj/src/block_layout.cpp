#include "asyncopt/block_layout.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace asyncopt {

BlockLayout::BlockLayout(std::vector<Block> blocks)
    : blocks_(std::move(blocks)) {
  if (blocks_.empty()) {
    throw std::invalid_argument("BlockLayout: at least one block required");
  }
  offsets_.reserve(blocks_.size());
  for (const Block& b : blocks_) {
    if (b.dim < 1) {
      throw std::invalid_argument("BlockLayout: block dimension must be >= 1");
    }
    if (!(b.weight >= 1.0) || !std::isfinite(b.weight)) {
      throw std::invalid_argument("BlockLayout: block weight must be >= 1");
    }
    if (!(b.order >= 1.0)) {  // kInfOrder passes
      throw std::invalid_argument("BlockLayout: norm order must be in [1, inf]");
    }
    offsets_.push_back(dim_);
    dim_ += b.dim;
    min_order_ = std::min(min_order_, b.order);
    min_weight_ = std::min(min_weight_, b.weight);
  }
}

BlockLayout BlockLayout::uniform(int count, Eigen::Index dim, double order,
                                 double weight) {
  if (count < 1) {
    throw std::invalid_argument("BlockLayout::uniform: count must be >= 1");
  }
  return BlockLayout(std::vector<Block>(count, Block{dim, order, weight}));
}

BlockLayout BlockLayout::scalar(const Vector& orders, const Vector& weights) {
  if (orders.size() != weights.size()) {
    throw std::invalid_argument("BlockLayout::scalar: size mismatch");
  }
  std::vector<Block> blocks(orders.size());
  for (Eigen::Index i = 0; i < orders.size(); ++i) {
    blocks[i] = Block{1, orders[i], weights[i]};
  }
  return BlockLayout(std::move(blocks));
}

const Block& BlockLayout::block(int i) const {
  if (i < 0 || i >= block_count()) {
    throw std::out_of_range("BlockLayout::block: index out of range");
  }
  return blocks_[i];
}

Eigen::Index BlockLayout::offset(int i) const {
  if (i < 0 || i >= block_count()) {
    throw std::out_of_range("BlockLayout::offset: index out of range");
  }
  return offsets_[i];
}

}  // namespace asyncopt

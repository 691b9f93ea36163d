#include "asyncopt/block_norm.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

#include "asyncopt/rng.hpp"

namespace asyncopt {

double p_norm(const Eigen::Ref<const Vector>& v, double order) {
  if (!(order >= 1.0)) {
    throw std::invalid_argument("p_norm: order must be in [1, inf]");
  }
  if (v.size() == 0) return 0.0;
  if (std::isinf(order)) return v.cwiseAbs().maxCoeff();
  if (order == 1.0) return v.cwiseAbs().sum();
  if (order == 2.0) return v.norm();
  const double m = v.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  const double s = (v.cwiseAbs() / m).array().pow(order).sum();
  return m * std::pow(s, 1.0 / order);
}

double block_max_norm(const Eigen::Ref<const Vector>& x,
                      const BlockLayout& layout) {
  if (layout.block_count() == 0) {
    throw std::invalid_argument("block_max_norm: empty layout");
  }
  if (x.size() != layout.dim()) {
    throw std::invalid_argument("block_max_norm: vector/layout size mismatch");
  }
  if (x.hasNaN()) {
    throw std::invalid_argument("block_max_norm: NaN in input");
  }
  double out = 0.0;
  for (int i = 0; i < layout.block_count(); ++i) {
    const Block& b = layout.block(i);
    const double bn = p_norm(x.segment(layout.offset(i), b.dim), b.order);
    out = std::max(out, bn / b.weight);
  }
  return out;
}

double spectral_norm(const Eigen::Ref<const Matrix>& B) {
  if (B.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(B);
  return svd.singularValues()(0);
}

double induced_norm_upper_bound(const Eigen::Ref<const Matrix>& B,
                    const BlockLayout& layout) {
  if (B.rows() != B.cols()) {
    throw std::invalid_argument("induced_norm_upper_bound: matrix must be square");
  }
  if (B.rows() != layout.dim()) {
    throw std::invalid_argument("induced_norm_upper_bound: matrix/layout size mismatch");
  }
  const double s2 = spectral_norm(B);
  const double p_min = layout.min_order();
  const double w_min = layout.min_weight();
  if (p_min < 2.0) {
    const double n = static_cast<double>(B.rows());
    return std::pow(n, 1.0 / p_min - 0.5) * s2 / w_min;
  }
  return s2 / w_min;
}

double brute_force_induced_norm(const Eigen::Ref<const Matrix>& B,
                                const BlockLayout& layout, int trials,
                                std::uint64_t seed) {
  if (trials <= 0) {
    throw std::invalid_argument("brute_force_induced_norm: trials must be > 0");
  }
  if (B.rows() != B.cols() || B.rows() != layout.dim()) {
    throw std::invalid_argument("brute_force_induced_norm: size mismatch");
  }
  Rng rng(seed);
  const Eigen::Index n = B.rows();
  Vector x(n);
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    for (Eigen::Index k = 0; k < n; ++k) x[k] = rng.normal();
    const double nx = block_max_norm(x, layout);
    if (nx == 0.0) continue;
    x /= nx;
    best = std::max(best, block_max_norm(B * x, layout));
  }
  return best;
}

}  // namespace asyncopt

#pragma once

#include <Eigen/Core>

#include <cstdint>

#include "asyncopt/block_layout.hpp"

namespace asyncopt {

/// p-norm of a vector for a runtime order p in [1, inf].
///
/// Finite orders are evaluated with max-abs scaling so large orders (the
/// routing layout uses p up to 90) do not overflow. p = kInfOrder takes the
/// exact max-abs branch.
double p_norm(const Eigen::Ref<const Vector>& v, double order);

/// Weighted block-maximum norm: max_i ||x_i||_{p_i} / w_i.
///
/// Throws if the layout is empty, if x does not match the layout dimension,
/// or if x contains NaN.
double block_max_norm(const Eigen::Ref<const Vector>& x,
                      const BlockLayout& layout);

/// Largest singular value, accurate to well below 1e-10 relative error.
double spectral_norm(const Eigen::Ref<const Matrix>& B);

/// Upper bound on the block-maximum matrix norm in terms of the spectral
/// norm: n^(1/p_min - 1/2) * ||B||_2 / w_min when p_min < 2, otherwise
/// ||B||_2 / w_min. Throws on non-square B or dimension mismatch.
double induced_norm_upper_bound(const Eigen::Ref<const Matrix>& B,
                    const BlockLayout& layout);

/// Monte-Carlo lower bound on the induced block-maximum norm of B:
/// the max of block_max_norm(B*x) over `trials` random vectors x drawn
/// gaussian and rescaled to unit block-maximum norm.
double brute_force_induced_norm(const Eigen::Ref<const Matrix>& B,
                                const BlockLayout& layout, int trials,
                                std::uint64_t seed = 0x9e3779b97f4a7c15ull);

}  // namespace asyncopt

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "asyncopt/block_layout.hpp"
#include "asyncopt/rng.hpp"

namespace asyncopt {

using LocalCostFn = std::function<double(const Eigen::Ref<const Vector>&)>;
using LocalGradFn = std::function<Vector(const Eigen::Ref<const Vector>&)>;
using CouplingCostFn = std::function<double(const Eigen::Ref<const Vector>&)>;
using CouplingGradFn = std::function<Vector(const Eigen::Ref<const Vector>&)>;

/// Optimization problem shared by all agents: per-agent local costs f_i over
/// the agent's block, a coupling cost c over the ensemble, and per-coordinate
/// box constraints. Gradients are supplied analytically by the instance
/// builder; finite differences live in the tests only.
///
/// Immutable after construction; all evaluators must be pure.
struct Problem {
  int agent_count = 0;
  BlockLayout layout;

  std::vector<LocalCostFn> local_cost;   // f_i(x_i)
  std::vector<LocalGradFn> local_grad;   // grad f_i(x_i)
  CouplingCostFn coupling_cost;          // c(x); empty means c == 0
  CouplingGradFn coupling_grad;          // grad c(x); empty means 0

  Vector box_lo;  // length n
  Vector box_hi;  // length n

  /// Per-block Lipschitz constants of grad_i f (without regularization).
  /// When present these take precedence over sampled estimates.
  std::optional<Vector> analytic_grad_lipschitz;
  /// Lipschitz constant of the full grad f, when known analytically.
  std::optional<double> grad_f_lipschitz;
};

/// Per-agent Tikhonov parameters and the shared stepsize.
struct Regularization {
  Vector alphas;  // one alpha per agent, alpha_i > 0 (0 allowed for the
                  // unregularized reference solve)
  double gamma = 0.0;
};

/// Aggregate Lipschitz metadata for grad f_A under a given regularization.
struct LipschitzData {
  Vector block;      // L_i for grad_i f_A
  double max = 0.0;  // L_max
  double aggregate = 0.0;  // sqrt(sum L_i^2), Lipschitz bound for grad f_A
};

/// Structural validation: sizes consistent, boxes non-empty and bounded.
void validate(const Problem& problem);

/// Validates alphas/gamma against the problem: all alpha_i >= 0 (strictly
/// positive when `require_positive_alphas`), gamma in (0, 2/L_max).
void validate(const Problem& problem, const Regularization& reg,
              bool require_positive_alphas = true);

/// f(x) = c(x) + sum_i f_i(x_i).
double eval_f(const Problem& problem, const Eigen::Ref<const Vector>& x);

/// f_A(x) = f(x) + 1/2 sum_i alpha_i ||x_i||^2.
double eval_f_A(const Problem& problem, const Regularization& reg,
                const Eigen::Ref<const Vector>& x);

/// grad_i f_A(x) = grad_i c(x) + grad f_i(x_i) + alpha_i x_i.
/// Throws on index out of range or non-finite values in x.
Vector grad_f_A_block(const Problem& problem, const Regularization& reg,
                      const Eigen::Ref<const Vector>& x, int i);

/// Full gradient of f_A, blocks concatenated.
Vector grad_f_A(const Problem& problem, const Regularization& reg,
                const Eigen::Ref<const Vector>& x);

/// Upper estimate of the Lipschitz constant of grad_i f_A. Returns the
/// analytic value (plus alpha_i) when the problem supplies one; otherwise the
/// largest sampled difference quotient over `samples` random feasible pairs,
/// inflated by a 1.1 safety factor. samples == 0 is an error.
double estimate_block_lipschitz(const Problem& problem,
                                const Regularization& reg, int i, int samples,
                                std::uint64_t seed = 0x5deece66dull);

/// All per-block constants plus the derived aggregates.
LipschitzData lipschitz_data(const Problem& problem, const Regularization& reg,
                             int samples = 200,
                             std::uint64_t seed = 0x5deece66dull);

/// Componentwise projection onto the box.
Vector clamp_to_box(const Problem& problem, const Eigen::Ref<const Vector>& x);

bool inside_box(const Problem& problem, const Eigen::Ref<const Vector>& x);

/// Uniform sample from the feasible box.
Vector uniform_feasible_point(const Problem& problem, Rng& rng);

}  // namespace asyncopt

#include "asyncopt/problem.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace asyncopt {

void validate(const Problem& problem) {
  if (problem.agent_count < 1) {
    throw std::invalid_argument("Problem: agent_count must be >= 1");
  }
  if (problem.layout.block_count() != problem.agent_count) {
    throw std::invalid_argument("Problem: layout must have one block per agent");
  }
  const Eigen::Index n = problem.layout.dim();
  if (problem.box_lo.size() != n || problem.box_hi.size() != n) {
    throw std::invalid_argument("Problem: box bounds must have length n");
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!std::isfinite(problem.box_lo[k]) || !std::isfinite(problem.box_hi[k]) ||
        problem.box_lo[k] > problem.box_hi[k]) {
      throw std::invalid_argument("Problem: boxes must be non-empty and bounded");
    }
  }
  if (static_cast<int>(problem.local_cost.size()) != problem.agent_count ||
      static_cast<int>(problem.local_grad.size()) != problem.agent_count) {
    throw std::invalid_argument("Problem: one local cost/gradient per agent");
  }
  if (problem.analytic_grad_lipschitz &&
      problem.analytic_grad_lipschitz->size() != problem.agent_count) {
    throw std::invalid_argument("Problem: analytic Lipschitz size mismatch");
  }
}

void validate(const Problem& problem, const Regularization& reg,
              bool require_positive_alphas) {
  if (reg.alphas.size() != problem.agent_count) {
    throw std::invalid_argument("Regularization: one alpha per agent");
  }
  for (Eigen::Index i = 0; i < reg.alphas.size(); ++i) {
    const double a = reg.alphas[i];
    if (!std::isfinite(a) || a < 0.0 || (require_positive_alphas && a == 0.0)) {
      throw std::invalid_argument("Regularization: alpha_" +
                                  std::to_string(i + 1) + " out of range");
    }
  }
  if (!(reg.gamma > 0.0) || !std::isfinite(reg.gamma)) {
    throw std::invalid_argument("Regularization: gamma must be positive");
  }
  const LipschitzData lip = lipschitz_data(problem, reg);
  if (!(reg.gamma < 2.0 / lip.max)) {
    throw std::invalid_argument("Regularization: gamma must be < 2/L_max");
  }
}

double eval_f(const Problem& problem, const Eigen::Ref<const Vector>& x) {
  if (x.size() != problem.layout.dim()) {
    throw std::invalid_argument("eval_f: dimension mismatch");
  }
  double out = problem.coupling_cost ? problem.coupling_cost(x) : 0.0;
  for (int i = 0; i < problem.agent_count; ++i) {
    out += problem.local_cost[i](block_of(x, problem.layout, i));
  }
  return out;
}

double eval_f_A(const Problem& problem, const Regularization& reg,
                const Eigen::Ref<const Vector>& x) {
  double out = eval_f(problem, x);
  for (int i = 0; i < problem.agent_count; ++i) {
    out += 0.5 * reg.alphas[i] *
           block_of(x, problem.layout, i).squaredNorm();
  }
  return out;
}

Vector grad_f_A_block(const Problem& problem, const Regularization& reg,
                      const Eigen::Ref<const Vector>& x, int i) {
  if (i < 0 || i >= problem.agent_count) {
    throw std::out_of_range("grad_f_A_block: agent index out of range");
  }
  if (x.size() != problem.layout.dim()) {
    throw std::invalid_argument("grad_f_A_block: dimension mismatch");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("grad_f_A_block: non-finite input");
  }
  const auto xi = block_of(x, problem.layout, i);
  Vector g = problem.local_grad[i](xi);
  if (g.size() != problem.layout.block(i).dim) {
    throw std::runtime_error("grad_f_A_block: local gradient size mismatch");
  }
  if (problem.coupling_grad) {
    const Vector gc = problem.coupling_grad(x);
    g += block_of(gc, problem.layout, i);
  }
  g += reg.alphas[i] * xi;
  return g;
}

Vector grad_f_A(const Problem& problem, const Regularization& reg,
                const Eigen::Ref<const Vector>& x) {
  if (x.size() != problem.layout.dim()) {
    throw std::invalid_argument("grad_f_A: dimension mismatch");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("grad_f_A: non-finite input");
  }
  Vector g = problem.coupling_grad ? problem.coupling_grad(x)
                                   : Vector(Vector::Zero(x.size()));
  for (int i = 0; i < problem.agent_count; ++i) {
    const auto xi = block_of(x, problem.layout, i);
    block_of(g, problem.layout, i) += problem.local_grad[i](xi);
    block_of(g, problem.layout, i) += reg.alphas[i] * xi;
  }
  return g;
}

double estimate_block_lipschitz(const Problem& problem,
                                const Regularization& reg, int i, int samples,
                                std::uint64_t seed) {
  if (i < 0 || i >= problem.agent_count) {
    throw std::out_of_range("estimate_block_lipschitz: agent index out of range");
  }
  if (problem.analytic_grad_lipschitz) {
    return (*problem.analytic_grad_lipschitz)[i] + reg.alphas[i];
  }
  if (samples <= 0) {
    throw std::invalid_argument("estimate_block_lipschitz: samples must be > 0");
  }
  Rng rng(seed + static_cast<std::uint64_t>(i));
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector x = uniform_feasible_point(problem, rng);
    const Vector y = uniform_feasible_point(problem, rng);
    const double d = (x - y).norm();
    if (d == 0.0) continue;
    const double gd =
        (grad_f_A_block(problem, reg, x, i) - grad_f_A_block(problem, reg, y, i))
            .norm();
    worst = std::max(worst, gd / d);
  }
  return 1.1 * worst;
}

LipschitzData lipschitz_data(const Problem& problem, const Regularization& reg,
                             int samples, std::uint64_t seed) {
  LipschitzData out;
  out.block.resize(problem.agent_count);
  for (int i = 0; i < problem.agent_count; ++i) {
    out.block[i] = estimate_block_lipschitz(problem, reg, i, samples, seed);
  }
  out.max = out.block.maxCoeff();
  out.aggregate = out.block.norm();
  return out;
}

Vector clamp_to_box(const Problem& problem, const Eigen::Ref<const Vector>& x) {
  return x.cwiseMax(problem.box_lo).cwiseMin(problem.box_hi);
}

bool inside_box(const Problem& problem, const Eigen::Ref<const Vector>& x) {
  return (x.array() >= problem.box_lo.array()).all() &&
         (x.array() <= problem.box_hi.array()).all();
}

Vector uniform_feasible_point(const Problem& problem, Rng& rng) {
  const Eigen::Index n = problem.layout.dim();
  Vector x(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    x[k] = rng.uniform(problem.box_lo[k], problem.box_hi[k]);
  }
  return x;
}

}  // namespace asyncopt

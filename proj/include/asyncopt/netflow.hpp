#pragma once

#include <string>
#include <vector>

#include "asyncopt/engine.hpp"
#include "asyncopt/problem.hpp"

namespace asyncopt {
namespace netflow {

/// Edge lists per agent, 1-based edge indices.
using Routes = std::vector<std::vector<int>>;

/// 0/1 connection matrix: C(k, i) = 1 iff flow i traverses edge k.
/// Throws on edge indices outside [1, num_edges].
Matrix build_connection_matrix(const Routes& routes, int num_edges);

/// Routing problem over a binary connection matrix:
///   f_i(x_i) = -scale_local * log(1 + x_i)
///   c(x)     = scale_coupling * x^T C^T C x
/// Scalar blocks, boxes [box_lo, box_hi] per coordinate, analytic per-block
/// Lipschitz constants scale_local + 2 * scale_coupling * lambda_max(C^T C).
Problem build_problem(const Matrix& C, double scale_local = 100.0,
                      double scale_coupling = 1.0 / 20.0, double box_lo = 0.0,
                      double box_hi = 10.0);

enum class RegPreset { kA1, kA2, kA3 };

/// Table 1 edge lists for the eight flows.
const Routes& benchmark_routes();
/// Normalization weights w = [12, 8, 6, 7, 6, 10, 9, 10].
Vector benchmark_weights();
/// Norm orders p = [inf, 20, 3, 90, 6, 12, 2, 9].
Vector benchmark_orders();
/// Regularization diagonal for the chosen run.
Vector preset_alphas(RegPreset choice);
/// Max diagonal entry, the label used in the published error table.
double preset_reg_norm(RegPreset choice);

/// Scalar-block layout with the published weights and orders.
BlockLayout benchmark_layout();

/// Upper box bound for the bundled instance, chosen so the regularized and
/// unregularized minimizers are strictly interior (verified by tests).
inline constexpr double kBenchmarkBoxHi = 15.0;

/// The full routing problem of the simulation study (box [0, kBenchmarkBoxHi]).
Problem benchmark_problem();

/// Stepsize 1/L_max and the chosen alphas for the bundled problem.
Regularization benchmark_regularization(RegPreset choice);

/// Fully configured simulation world of the published study: routing problem,
/// published layout and alphas, gamma = 1/L_max, x0 = 0, a 10% update and
/// communication chance per tick, instant delivery.
World benchmark_instance(RegPreset choice, std::uint64_t seed);

/// Parse a plain tabular routes file: one line per agent,
/// "<agent id> <edge> <edge> ...", '#' starts a comment line.
Routes parse_routes_file(const std::string& path);

}  // namespace netflow
}  // namespace asyncopt

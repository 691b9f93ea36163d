#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "asyncopt/engine.hpp"
#include "asyncopt/problem.hpp"

namespace asyncopt {

/// Everything needed to evaluate the geometric per-cycle error bound:
/// contraction factor q, the initial worst-block error D_o, and the
/// regularized minimizer the errors are measured against.
struct RateData {
  double q = 0.0;
  double d0 = 0.0;
  Vector x_hat_A;
  double gamma = 0.0;
  Vector alphas;
  Vector block_lipschitz;
};

struct CertificateRow {
  std::int64_t tick = 0;
  std::int64_t cycles = 0;
  double bound = 0.0;
  double observed = 0.0;
  bool pass = true;
};

/// Per-snapshot comparison of the observed worst-agent block-maximum error
/// against q^c(k) * D_o. Violations are data, not errors.
struct Certificate {
  std::vector<CertificateRow> rows;
  std::int64_t total_cycles = 0;
  int violations = 0;
  double max_violation = 0.0;  // largest observed - bound among failing rows
  double tol = 0.0;
};

/// q = max( max_i |1 - gamma a_i|, max_i |1 - gamma L_i| ).
double compute_q(double gamma, const Vector& alphas, const Vector& lipschitz);

struct ReferenceSolveError : std::runtime_error {
  ReferenceSolveError(const std::string& what, double residual_)
      : std::runtime_error(what), residual(residual_) {}
  double residual = 0.0;
};

/// Minimizer of f_A over the box via synchronous projected gradient descent
/// with stepsize 1/L_max (or `stepsize` when positive), run until the
/// successive-iterate max-norm drops below tol. Iteration cap 1e7; on hitting
/// the cap throws ReferenceSolveError carrying the residual. Zero alphas are
/// allowed (unregularized reference point).
Vector solve_reference(const Problem& problem, const Regularization& reg,
                       double tol = 1e-12, double stepsize = 0.0);

/// Worst initial distance: max_i block_max_norm(views[i] - x_hat).
double compute_D0(const std::vector<Vector>& initial_views,
                  const Vector& x_hat_A, const BlockLayout& layout);

/// Per-tick completed-cycle count c(k), k = 0..final_tick. A cycle spanning
/// ticks (t0, t] completes at the first t where every agent has updated at
/// some u_i in the window and every ordered pair (j -> i) has delivered a
/// block computed at or after u_j; the window then restarts after t.
std::vector<std::int64_t> count_cycles(const std::vector<Event>& events,
                                       int agent_count,
                                       std::int64_t final_tick);

double default_tol_cert(const RateData& rate);

/// Checks every snapshot of the trace against the per-cycle bound
/// q^c(k) * D_o. tol_cert < 0 selects the default 1e-9 * (1 + D_o).
Certificate check_cycle_bound(const Trace& trace, const RateData& rate,
                           const BlockLayout& layout, double tol_cert = -1.0);

/// True iff the unprojected update map theta_i(y) = y_i - gamma grad_i f_A(y)
/// lands every block inside the next nested level set:
/// ||theta_i(y) - x_hat_A,i||_{p_i} / w_i <= q^{s+1} D_o + tol for all i.
/// Requires y inside X(s); throws a precondition error otherwise.
bool check_level_contraction(const Problem& problem, const Regularization& reg,
                            const Vector& y, int s, const RateData& rate,
                            double tol_cert = -1.0);

/// Solves the reference problem and assembles q, D_o and the Lipschitz data
/// for the given initial views.
RateData make_rate_data(const Problem& problem, const Regularization& reg,
                        const std::vector<Vector>& initial_views,
                        double tol = 1e-12);

/// Tabular records "tick,cycles,bound,observed,pass" with a header row.
void write_certificate(const Certificate& cert, const std::string& path);

}  // namespace asyncopt

#include "asyncopt/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "asyncopt/block_norm.hpp"

namespace asyncopt {

double compute_q(double gamma, const Vector& alphas, const Vector& lipschitz) {
  if (alphas.size() == 0 || lipschitz.size() == 0) {
    throw std::invalid_argument("compute_q: empty agent list");
  }
  if (alphas.size() != lipschitz.size()) {
    throw std::invalid_argument("compute_q: alphas/lipschitz size mismatch");
  }
  double q = 0.0;
  for (Eigen::Index i = 0; i < alphas.size(); ++i) {
    q = std::max(q, std::abs(1.0 - gamma * alphas[i]));
    q = std::max(q, std::abs(1.0 - gamma * lipschitz[i]));
  }
  return q;
}

Vector solve_reference(const Problem& problem, const Regularization& reg,
                       double tol, double stepsize) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("solve_reference: tol must be positive");
  }
  validate(problem);
  validate(problem, reg, /*require_positive_alphas=*/false);
  double step = stepsize;
  if (step <= 0.0) {
    const LipschitzData lip = lipschitz_data(problem, reg);
    if (lip.max <= 0.0) {
      // Gradient of f_A is identically zero; any feasible point is optimal.
      return clamp_to_box(problem, Vector::Zero(problem.layout.dim()));
    }
    step = 1.0 / lip.max;
  }

  constexpr std::int64_t kIterationCap = 10'000'000;
  Vector x = clamp_to_box(problem, Vector::Zero(problem.layout.dim()));
  double residual = std::numeric_limits<double>::infinity();
  for (std::int64_t it = 0; it < kIterationCap; ++it) {
    const Vector next =
        clamp_to_box(problem, x - step * grad_f_A(problem, reg, x));
    residual = (next - x).cwiseAbs().maxCoeff();
    x = next;
    if (residual < tol) return x;
  }
  throw ReferenceSolveError(
      "solve_reference: iteration cap reached, residual " +
          std::to_string(residual),
      residual);
}

double compute_D0(const std::vector<Vector>& initial_views,
                  const Vector& x_hat_A, const BlockLayout& layout) {
  double d0 = 0.0;
  for (const Vector& v : initial_views) {
    d0 = std::max(d0, block_max_norm(v - x_hat_A, layout));
  }
  return d0;
}

std::vector<std::int64_t> count_cycles(const std::vector<Event>& events,
                                       int agent_count,
                                       std::int64_t final_tick) {
  if (agent_count < 1) {
    throw std::invalid_argument("count_cycles: agent_count must be >= 1");
  }
  if (final_tick < 0) {
    throw std::invalid_argument("count_cycles: final_tick must be >= 0");
  }
  std::vector<std::int64_t> cycles(final_tick + 1, 0);
  std::vector<std::int64_t> first_update(agent_count, -1);
  std::vector<char> pair_done(
      static_cast<std::size_t>(agent_count) * agent_count, 0);
  std::int64_t count = 0;
  std::size_t idx = 0;

  for (std::int64_t t = 0; t <= final_tick; ++t) {
    while (idx < events.size() && events[idx].tick == t) {
      const Event& e = events[idx++];
      if (e.agent < 0 || e.agent >= agent_count) {
        throw std::runtime_error("count_cycles: agent id out of range");
      }
      if (e.kind == Event::Kind::kUpdate) {
        if (first_update[e.agent] < 0) first_update[e.agent] = t;
      } else {
        if (e.source < 0 || e.source >= agent_count || e.source == e.agent) {
          throw std::runtime_error("count_cycles: malformed delivery event");
        }
        if (e.tau > t) {
          throw std::runtime_error("count_cycles: delivery from the future");
        }
        if (first_update[e.source] >= 0 && e.tau >= first_update[e.source]) {
          pair_done[static_cast<std::size_t>(e.source) * agent_count +
                    e.agent] = 1;
        }
      }
    }
    if (idx < events.size() && events[idx].tick < t) {
      throw std::runtime_error("count_cycles: event log not ordered by tick");
    }

    bool complete = true;
    for (int i = 0; complete && i < agent_count; ++i) {
      complete = first_update[i] >= 0;
    }
    for (int j = 0; complete && j < agent_count; ++j) {
      for (int i = 0; complete && i < agent_count; ++i) {
        if (i != j) {
          complete =
              pair_done[static_cast<std::size_t>(j) * agent_count + i] != 0;
        }
      }
    }
    if (complete) {
      ++count;
      std::fill(first_update.begin(), first_update.end(), -1);
      std::fill(pair_done.begin(), pair_done.end(), 0);
    }
    cycles[t] = count;
  }
  if (idx < events.size()) {
    throw std::runtime_error("count_cycles: events beyond final_tick");
  }
  return cycles;
}

double default_tol_cert(const RateData& rate) {
  return 1e-9 * (1.0 + rate.d0);
}

Certificate check_cycle_bound(const Trace& trace, const RateData& rate,
                           const BlockLayout& layout, double tol_cert) {
  Certificate cert;
  cert.tol = tol_cert < 0.0 ? default_tol_cert(rate) : tol_cert;
  const std::vector<std::int64_t> cycles =
      count_cycles(trace.events, trace.agent_count, trace.final_tick);
  cert.total_cycles = cycles.empty() ? 0 : cycles.back();
  cert.rows.reserve(trace.snapshots.size());
  for (const Snapshot& snap : trace.snapshots) {
    CertificateRow row;
    row.tick = snap.tick;
    row.cycles = cycles.at(snap.tick);
    row.bound = std::pow(rate.q, static_cast<double>(row.cycles)) * rate.d0;
    row.observed = 0.0;
    for (const Vector& view : snap.views) {
      row.observed =
          std::max(row.observed, block_max_norm(view - rate.x_hat_A, layout));
    }
    row.pass = row.observed <= row.bound + cert.tol;
    if (!row.pass) {
      ++cert.violations;
      cert.max_violation =
          std::max(cert.max_violation, row.observed - row.bound);
    }
    cert.rows.push_back(row);
  }
  return cert;
}

bool check_level_contraction(const Problem& problem, const Regularization& reg,
                            const Vector& y, int s, const RateData& rate,
                            double tol_cert) {
  if (s < 0) {
    throw std::invalid_argument("check_level_contraction: s must be >= 0");
  }
  const double tol = tol_cert < 0.0 ? default_tol_cert(rate) : tol_cert;
  const double radius = std::pow(rate.q, static_cast<double>(s)) * rate.d0;
  if (!inside_box(problem, y) ||
      block_max_norm(y - rate.x_hat_A, problem.layout) > radius + tol) {
    throw std::invalid_argument(
        "check_level_contraction: y outside the level set X(s)");
  }
  const double next_radius = rate.q * radius;
  for (int i = 0; i < problem.agent_count; ++i) {
    const auto yi = block_of(y, problem.layout, i);
    const Vector theta =
        yi - rate.gamma * grad_f_A_block(problem, reg, y, i);
    const Block& b = problem.layout.block(i);
    const double dist =
        p_norm(theta - block_of(rate.x_hat_A, problem.layout, i), b.order) /
        b.weight;
    if (dist > next_radius + tol) return false;
  }
  return true;
}

RateData make_rate_data(const Problem& problem, const Regularization& reg,
                        const std::vector<Vector>& initial_views, double tol) {
  RateData rate;
  rate.gamma = reg.gamma;
  rate.alphas = reg.alphas;
  const LipschitzData lip = lipschitz_data(problem, reg);
  rate.block_lipschitz = lip.block;
  rate.q = compute_q(reg.gamma, reg.alphas, lip.block);
  rate.x_hat_A = solve_reference(problem, reg, tol);
  rate.d0 = compute_D0(initial_views, rate.x_hat_A, problem.layout);
  return rate;
}

void write_certificate(const Certificate& cert, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_certificate: cannot open " + path);
  std::fputs("tick,cycles,bound,observed,pass\n", f);
  for (const CertificateRow& row : cert.rows) {
    std::fprintf(f, "%lld,%lld,%.17g,%.17g,%d\n",
                 static_cast<long long>(row.tick),
                 static_cast<long long>(row.cycles), row.bound, row.observed,
                 row.pass ? 1 : 0);
  }
  std::fclose(f);
}

}  // namespace asyncopt

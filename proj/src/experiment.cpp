#include "asyncopt/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "asyncopt/block_norm.hpp"

namespace asyncopt {

namespace {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + tmp.string());
  const std::size_t written =
      std::fwrite(contents.data(), 1, contents.size(), f);
  std::fclose(f);
  if (written != contents.size()) {
    throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string render_certificate(const Certificate& cert) {
  std::string out = "tick,cycles,bound,observed,pass\n";
  char buf[160];
  for (const CertificateRow& row : cert.rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%lld,%.17g,%.17g,%d\n",
                  static_cast<long long>(row.tick),
                  static_cast<long long>(row.cycles), row.bound, row.observed,
                  row.pass ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& config) {
  World world = make_world(config);
  std::vector<Vector> initial_views;
  initial_views.reserve(world.views.size());
  for (const AgentView& v : world.views) initial_views.push_back(v.x);

  const Problem problem = world.problem;
  const Regularization reg = world.reg;

  Trace trace = run(world, config.ticks, config.snapshot_stride);
  trace.config_json = serialize_config(config);

  RateData rate = make_rate_data(problem, reg, initial_views);
  Certificate cert = check_cycle_bound(trace, rate, problem.layout);

  Regularization unreg;
  unreg.alphas = Vector::Zero(problem.agent_count);
  unreg.gamma = reg.gamma;
  const Vector x_hat = solve_reference(problem, unreg);

  // Error curves for agent 1's local view, one row per snapshot.
  const std::vector<std::int64_t> cycles =
      count_cycles(trace.events, trace.agent_count, trace.final_tick);
  std::string curves =
      "tick,cycles,regularized_error,unregularized_error,bound\n";
  char buf[200];
  for (const Snapshot& snap : trace.snapshots) {
    const Vector& view = snap.views.front();
    const std::int64_t c = cycles.at(snap.tick);
    const double reg_err = block_max_norm(view - rate.x_hat_A, problem.layout);
    const double unreg_err = block_max_norm(view - x_hat, problem.layout);
    const double bound = std::pow(rate.q, static_cast<double>(c)) * rate.d0;
    std::snprintf(buf, sizeof(buf), "%lld,%lld,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(snap.tick), static_cast<long long>(c),
                  reg_err, unreg_err, bound);
    curves += buf;
  }

  fs::create_directories(config.output_dir);
  RunArtifacts out;
  out.trace_path = fs::path(config.output_dir) / "trace.log";
  out.certificate_path = fs::path(config.output_dir) / "certificate.csv";
  out.errors_path = fs::path(config.output_dir) / "errors.csv";

  const fs::path trace_tmp = out.trace_path.string() + ".tmp";
  write_trace(trace, trace_tmp.string());
  fs::rename(trace_tmp, out.trace_path);
  atomic_write(out.certificate_path, render_certificate(cert));
  atomic_write(out.errors_path, curves);

  out.trace = std::move(trace);
  out.rate = std::move(rate);
  out.certificate = std::move(cert);
  return out;
}

Report emit_report(const std::vector<Trace>& traces) {
  if (traces.empty()) {
    throw std::invalid_argument("emit_report: no completed runs given");
  }
  Report report;
  for (const Trace& trace : traces) {
    if (trace.config_json.empty()) {
      throw std::runtime_error("emit_report: trace lacks an embedded config");
    }
    if (trace.snapshots.empty()) {
      throw std::runtime_error("emit_report: trace has no snapshots");
    }
    const ExperimentConfig cfg = parse_config(trace.config_json);
    const BuiltInstance built = build_instance(cfg);
    const std::vector<Vector> initial_views(trace.agent_count, trace.x0);
    const RateData rate =
        make_rate_data(built.problem, built.reg, initial_views);
    Regularization unreg;
    unreg.alphas = Vector::Zero(built.problem.agent_count);
    unreg.gamma = built.reg.gamma;
    const Vector x_hat = solve_reference(built.problem, unreg);

    const Vector& final_view = trace.snapshots.back().views.front();
    Report::Row row;
    row.a_norm = built.reg.alphas.maxCoeff();
    row.final_regularized =
        block_max_norm(final_view - rate.x_hat_A, built.problem.layout);
    row.final_unregularized =
        block_max_norm(final_view - x_hat, built.problem.layout);
    report.rows.push_back(row);
  }
  for (std::size_t r = 1; r < report.rows.size(); ++r) {
    if (!(report.rows[r].final_unregularized >
          report.rows[r - 1].final_unregularized)) {
      char msg[256];
      std::snprintf(msg, sizeof(msg),
                    "emit_report: final unregularized errors are not strictly "
                    "increasing (row %zu: %.6g, row %zu: %.6g)",
                    r, report.rows[r - 1].final_unregularized, r + 1,
                    report.rows[r].final_unregularized);
      throw std::runtime_error(msg);
    }
  }
  return report;
}

std::string format_report(const Report& report) {
  std::string out =
      "# final errors measure agent 1's full local view in the block-maximum "
      "norm\n"
      "a_norm,final_regularized_error,final_unregularized_error\n";
  char buf[160];
  for (const Report::Row& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", row.a_norm,
                  row.final_regularized, row.final_unregularized);
    out += buf;
  }
  return out;
}

void write_report(const Report& report, const std::string& path) {
  atomic_write(path, format_report(report));
}

}  // namespace asyncopt

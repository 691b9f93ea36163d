#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asyncopt/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitViolations = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunFlags {
  std::string config_path;
  std::string preset;
  std::string routes_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> ticks;
  std::optional<std::int64_t> stride;
  std::optional<double> p_update;
  std::optional<double> p_comm;
  std::string delay;
  std::optional<int> max_latency;
  std::optional<double> gamma;
  std::string out_dir;
};

asyncopt::ExperimentConfig assemble_config(const RunFlags& flags) {
  using asyncopt::ConfigError;
  asyncopt::ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = asyncopt::parse_config(read_file(flags.config_path));
  }
  if (!flags.preset.empty()) {
    if (flags.preset == "A1") {
      cfg.preset = asyncopt::netflow::RegPreset::kA1;
    } else if (flags.preset == "A2") {
      cfg.preset = asyncopt::netflow::RegPreset::kA2;
    } else if (flags.preset == "A3") {
      cfg.preset = asyncopt::netflow::RegPreset::kA3;
    } else {
      throw ConfigError("--instance must be A1, A2 or A3");
    }
    cfg.custom.reset();
  }
  if (!flags.routes_file.empty()) {
    throw ConfigError(
        "custom instances need a config file (routes_file plus alphas); "
        "pass --config");
  }
  if (!cfg.preset && !cfg.custom) {
    throw ConfigError("no instance selected; pass --instance or --config");
  }
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.ticks) cfg.ticks = *flags.ticks;
  if (flags.stride) cfg.snapshot_stride = *flags.stride;
  if (flags.p_update) cfg.p_update = *flags.p_update;
  if (flags.p_comm) cfg.p_comm = *flags.p_comm;
  if (!flags.delay.empty()) {
    if (flags.delay == "instant") {
      cfg.delay = {asyncopt::DelayMode::kInstant, 0};
    } else if (flags.delay == "queued") {
      cfg.delay.mode = asyncopt::DelayMode::kQueued;
    } else {
      throw ConfigError("--delay must be instant or queued");
    }
  }
  if (flags.max_latency) cfg.delay.max_latency = *flags.max_latency;
  if (flags.gamma) cfg.gamma_override = *flags.gamma;
  if (!flags.out_dir.empty()) cfg.output_dir = flags.out_dir;
  // re-validate the assembled configuration through the parser
  return asyncopt::parse_config(asyncopt::serialize_config(cfg));
}

int cmd_run(const RunFlags& flags) {
  asyncopt::ExperimentConfig cfg;
  try {
    cfg = assemble_config(flags);
  } catch (const asyncopt::ConfigError& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return kExitBadInput;
  }
  const asyncopt::RunArtifacts artifacts = asyncopt::run_experiment(cfg);
  std::printf("trace:       %s\n", artifacts.trace_path.c_str());
  std::printf("certificate: %s\n", artifacts.certificate_path.c_str());
  std::printf("errors:      %s\n", artifacts.errors_path.c_str());
  std::printf(
      "ticks=%lld cycles=%lld q=%.12g D0=%.12g violations=%d clamp_events=%lld\n",
      static_cast<long long>(artifacts.trace.final_tick),
      static_cast<long long>(artifacts.certificate.total_cycles),
      artifacts.rate.q, artifacts.rate.d0, artifacts.certificate.violations,
      static_cast<long long>(artifacts.trace.clamp_events));
  if (artifacts.certificate.violations > 0) {
    std::fprintf(stderr, "certificate violations: %d (max magnitude %.6g)\n",
                 artifacts.certificate.violations,
                 artifacts.certificate.max_violation);
    return kExitViolations;
  }
  return kExitOk;
}

int cmd_certify(const std::string& trace_path, const std::string& out_path) {
  asyncopt::Trace trace;
  asyncopt::ExperimentConfig cfg;
  try {
    trace = asyncopt::read_trace(trace_path);
    if (trace.config_json.empty()) {
      throw asyncopt::ConfigError("trace lacks an embedded config");
    }
    cfg = asyncopt::parse_config(trace.config_json);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cannot load trace: %s\n", e.what());
    return kExitBadInput;
  }

  const asyncopt::BuiltInstance built = asyncopt::build_instance(cfg);

  // Integrity first: the log must reproduce the recorded final state.
  const std::vector<asyncopt::Vector> replayed = asyncopt::replay_views(
      built.problem, built.reg, trace.x0, trace.events);
  for (std::size_t a = 0; a < replayed.size(); ++a) {
    if (replayed[a] != trace.final_views[a]) {
      std::fprintf(stderr, "trace integrity check failed for agent %zu\n",
                   a + 1);
      return kExitBadInput;
    }
  }

  const std::vector<asyncopt::Vector> initial_views(trace.agent_count,
                                                    trace.x0);
  const asyncopt::RateData rate =
      asyncopt::make_rate_data(built.problem, built.reg, initial_views);
  const asyncopt::Certificate cert =
      asyncopt::check_cycle_bound(trace, rate, built.problem.layout);
  if (!out_path.empty()) {
    asyncopt::write_certificate(cert, out_path);
    std::printf("certificate: %s\n", out_path.c_str());
  }
  std::printf("snapshots=%zu cycles=%lld violations=%d\n", cert.rows.size(),
              static_cast<long long>(cert.total_cycles), cert.violations);
  return cert.violations == 0 ? kExitOk : kExitViolations;
}

int cmd_report(const std::vector<std::string>& trace_paths,
               const std::string& out_path) {
  std::vector<asyncopt::Trace> traces;
  try {
    for (const std::string& path : trace_paths) {
      traces.push_back(asyncopt::read_trace(path));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cannot load traces: %s\n", e.what());
    return kExitBadInput;
  }
  const asyncopt::Report report = asyncopt::emit_report(traces);
  const std::string text = asyncopt::format_report(report);
  std::fputs(text.c_str(), stdout);
  if (!out_path.empty()) {
    asyncopt::write_report(report, out_path);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asynchronous block-gradient simulator and rate certifier"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run an experiment");
  run->add_option("--config", run_flags.config_path, "JSON config file");
  run->add_option("--instance", run_flags.preset, "bundled instance preset: A1, A2 or A3");
  run->add_option("--routes-file", run_flags.routes_file,
                  "tabular routes file (custom instances)");
  run->add_option("--seed", run_flags.seed, "rng seed");
  run->add_option("--ticks", run_flags.ticks, "number of ticks");
  run->add_option("--stride", run_flags.stride, "snapshot stride");
  run->add_option("--p-update", run_flags.p_update,
                  "per-agent update probability");
  run->add_option("--p-comm", run_flags.p_comm,
                  "per-ordered-pair communication probability");
  run->add_option("--delay", run_flags.delay, "instant or queued");
  run->add_option("--max-latency", run_flags.max_latency,
                  "queued mode latency bound");
  run->add_option("--gamma", run_flags.gamma, "stepsize override");
  run->add_option("--out", run_flags.out_dir, "output directory");

  std::string certify_trace, certify_out;
  CLI::App* certify =
      app.add_subcommand("certify", "re-check an existing trace");
  certify->add_option("--trace", certify_trace, "trace file")->required();
  certify->add_option("--out", certify_out, "certificate output file");

  std::vector<std::string> report_traces;
  std::string report_out;
  CLI::App* report =
      app.add_subcommand("report", "final-error comparison across runs");
  report->add_option("--trace", report_traces,
                     "trace files in increasing regularization norm")
      ->expected(1, -1)
      ->required();
  report->add_option("--out", report_out, "report output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (certify->parsed()) return cmd_certify(certify_trace, certify_out);
    if (report->parsed()) return cmd_report(report_traces, report_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}

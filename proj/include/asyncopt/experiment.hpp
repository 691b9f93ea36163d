#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "asyncopt/certify.hpp"
#include "asyncopt/config.hpp"

namespace asyncopt {

/// Output bundle of one experiment run.
struct RunArtifacts {
  std::filesystem::path trace_path;
  std::filesystem::path certificate_path;
  std::filesystem::path errors_path;
  Trace trace;
  RateData rate;
  Certificate certificate;
};

/// Runs the configured simulation and writes the trace, the certificate
/// table, and the error curves (tick, cycles, regularized and unregularized
/// error of agent 1's view in the block-maximum norm, certified bound) into
/// the config's output directory. Files are written atomically.
RunArtifacts run_experiment(const ExperimentConfig& config);

struct Report {
  struct Row {
    double a_norm = 0.0;  // largest regularization entry
    double final_regularized = 0.0;
    double final_unregularized = 0.0;
  };
  std::vector<Row> rows;
};

/// Final-error comparison across completed runs (in the order given, expected
/// in increasing regularization norm). Each trace must embed its experiment
/// config. Throws if the final unregularized errors are not strictly
/// increasing.
Report emit_report(const std::vector<Trace>& traces);

/// "a_norm,final_regularized_error,final_unregularized_error" rows.
void write_report(const Report& report, const std::string& path);

std::string format_report(const Report& report);

}  // namespace asyncopt

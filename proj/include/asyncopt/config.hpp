#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "asyncopt/engine.hpp"
#include "asyncopt/netflow.hpp"

namespace asyncopt {

/// Routing instance described declaratively (routes + cost scales + norms).
struct CustomInstance {
  netflow::Routes routes;
  int num_edges = 0;
  Vector weights;  // one per agent
  Vector orders;
  Vector alphas;
  double scale_local = 100.0;
  double scale_coupling = 1.0 / 20.0;
  double box_lo = 0.0;
  double box_hi = 10.0;
};

/// Declarative experiment description, parsed from JSON. Exactly one of
/// `preset` / `custom` is set.
struct ExperimentConfig {
  std::optional<netflow::RegPreset> preset;
  std::optional<CustomInstance> custom;
  std::uint64_t seed = 1;
  std::int64_t ticks = 20000;
  std::int64_t snapshot_stride = 50;
  double p_update = 0.1;
  double p_comm = 0.1;
  DelayModel delay;
  std::optional<double> gamma_override;
  std::string output_dir = "out";
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses and validates a JSON config. Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& json_text);

/// Canonical JSON form; serialize(parse(text)) is idempotent.
std::string serialize_config(const ExperimentConfig& config);

struct BuiltInstance {
  Problem problem;
  Regularization reg;
};

/// Problem and regularization for the configured instance. The stepsize
/// defaults to 1/L_max unless the config overrides it.
BuiltInstance build_instance(const ExperimentConfig& config);

/// World for the configured instance, started from the origin projected onto
/// the feasible box.
World make_world(const ExperimentConfig& config);

}  // namespace asyncopt

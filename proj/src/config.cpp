#include "asyncopt/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

namespace asyncopt {

namespace {

using Json = nlohmann::ordered_json;

void reject_unknown_keys(const Json& obj, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

Vector parse_number_array(const Json& arr, const std::string& where,
                          bool allow_inf = false) {
  if (!arr.is_array()) throw ConfigError(where + " must be an array");
  Vector out(arr.size());
  Eigen::Index k = 0;
  for (const auto& v : arr) {
    if (v.is_number()) {
      out[k++] = v.get<double>();
    } else if (allow_inf && v.is_string() && v.get<std::string>() == "inf") {
      out[k++] = kInfOrder;
    } else {
      throw ConfigError("bad entry in " + where);
    }
  }
  return out;
}

CustomInstance parse_custom(const Json& obj) {
  reject_unknown_keys(obj,
                      {"routes", "routes_file", "num_edges", "weights",
                       "orders", "alphas", "scale_local", "scale_coupling",
                       "box_lo", "box_hi"},
                      "instance");
  CustomInstance inst;
  if (obj.contains("routes") == obj.contains("routes_file")) {
    throw ConfigError("instance needs exactly one of routes / routes_file");
  }
  if (obj.contains("routes_file")) {
    inst.routes = netflow::parse_routes_file(obj.at("routes_file"));
  } else {
    const Json& routes = obj.at("routes");
    if (!routes.is_array() || routes.empty()) {
      throw ConfigError("routes must be a non-empty array of edge lists");
    }
    for (const auto& r : routes) {
      if (!r.is_array()) throw ConfigError("each route must be an edge list");
      inst.routes.push_back(r.get<std::vector<int>>());
    }
  }
  if (!obj.contains("num_edges")) throw ConfigError("instance needs num_edges");
  inst.num_edges = obj.at("num_edges").get<int>();

  const int agents = static_cast<int>(inst.routes.size());
  inst.weights = obj.contains("weights")
                     ? parse_number_array(obj.at("weights"), "weights")
                     : Vector(Vector::Ones(agents));
  inst.orders = obj.contains("orders")
                    ? parse_number_array(obj.at("orders"), "orders", true)
                    : Vector(Vector::Constant(agents, 2.0));
  if (!obj.contains("alphas")) throw ConfigError("instance needs alphas");
  inst.alphas = parse_number_array(obj.at("alphas"), "alphas");
  if (obj.contains("scale_local")) inst.scale_local = obj.at("scale_local");
  if (obj.contains("scale_coupling")) {
    inst.scale_coupling = obj.at("scale_coupling");
  }
  if (obj.contains("box_lo")) inst.box_lo = obj.at("box_lo");
  if (obj.contains("box_hi")) inst.box_hi = obj.at("box_hi");

  if (inst.weights.size() != agents || inst.orders.size() != agents ||
      inst.alphas.size() != agents) {
    throw ConfigError("weights/orders/alphas must have one entry per agent");
  }
  return inst;
}

Json custom_to_json(const CustomInstance& inst) {
  Json obj;
  Json routes = Json::array();
  for (const auto& r : inst.routes) routes.push_back(r);
  obj["routes"] = std::move(routes);
  obj["num_edges"] = inst.num_edges;
  Json weights = Json::array();
  for (Eigen::Index i = 0; i < inst.weights.size(); ++i) {
    weights.push_back(inst.weights[i]);
  }
  obj["weights"] = std::move(weights);
  Json orders = Json::array();
  for (Eigen::Index i = 0; i < inst.orders.size(); ++i) {
    if (std::isinf(inst.orders[i])) {
      orders.push_back("inf");
    } else {
      orders.push_back(inst.orders[i]);
    }
  }
  obj["orders"] = std::move(orders);
  Json alphas = Json::array();
  for (Eigen::Index i = 0; i < inst.alphas.size(); ++i) {
    alphas.push_back(inst.alphas[i]);
  }
  obj["alphas"] = std::move(alphas);
  obj["scale_local"] = inst.scale_local;
  obj["scale_coupling"] = inst.scale_coupling;
  obj["box_lo"] = inst.box_lo;
  obj["box_hi"] = inst.box_hi;
  return obj;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(root,
                      {"instance", "seed", "ticks", "snapshot_stride",
                       "p_update", "p_comm", "delay", "gamma", "output_dir"},
                      "config");

  ExperimentConfig cfg;
  if (!root.contains("instance")) throw ConfigError("config needs an instance");
  const Json& inst = root.at("instance");
  if (inst.is_string()) {
    const std::string name = inst.get<std::string>();
    if (name == "A1") {
      cfg.preset = netflow::RegPreset::kA1;
    } else if (name == "A2") {
      cfg.preset = netflow::RegPreset::kA2;
    } else if (name == "A3") {
      cfg.preset = netflow::RegPreset::kA3;
    } else {
      throw ConfigError("unknown instance preset '" + name + "'");
    }
  } else if (inst.is_object()) {
    cfg.custom = parse_custom(inst);
  } else {
    throw ConfigError("instance must be \"A1\"|\"A2\"|\"A3\" or an object");
  }

  if (root.contains("seed")) cfg.seed = root.at("seed").get<std::uint64_t>();
  if (root.contains("ticks")) cfg.ticks = root.at("ticks").get<std::int64_t>();
  if (root.contains("snapshot_stride")) {
    cfg.snapshot_stride = root.at("snapshot_stride").get<std::int64_t>();
  }
  if (root.contains("p_update")) cfg.p_update = root.at("p_update");
  if (root.contains("p_comm")) cfg.p_comm = root.at("p_comm");
  if (root.contains("delay")) {
    const Json& delay = root.at("delay");
    reject_unknown_keys(delay, {"mode", "max_latency"}, "delay");
    const std::string mode = delay.at("mode").get<std::string>();
    if (mode == "instant") {
      cfg.delay = {DelayMode::kInstant, 0};
    } else if (mode == "queued") {
      cfg.delay.mode = DelayMode::kQueued;
      cfg.delay.max_latency = delay.value("max_latency", 0);
    } else {
      throw ConfigError("delay mode must be instant or queued");
    }
  }
  if (root.contains("gamma")) cfg.gamma_override = root.at("gamma").get<double>();
  if (root.contains("output_dir")) {
    cfg.output_dir = root.at("output_dir").get<std::string>();
  }

  if (cfg.ticks < 0) throw ConfigError("ticks must be >= 0");
  if (cfg.snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
  if (cfg.p_update < 0.0 || cfg.p_update > 1.0 || cfg.p_comm < 0.0 ||
      cfg.p_comm > 1.0) {
    throw ConfigError("schedule probabilities must be in [0, 1]");
  }
  if (cfg.delay.max_latency < 0) throw ConfigError("max_latency must be >= 0");
  if (cfg.gamma_override && !(*cfg.gamma_override > 0.0)) {
    throw ConfigError("gamma must be positive");
  }
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must be non-empty");
  return cfg;
}

std::string serialize_config(const ExperimentConfig& config) {
  Json root;
  if (config.preset) {
    switch (*config.preset) {
      case netflow::RegPreset::kA1: root["instance"] = "A1"; break;
      case netflow::RegPreset::kA2: root["instance"] = "A2"; break;
      case netflow::RegPreset::kA3: root["instance"] = "A3"; break;
    }
  } else if (config.custom) {
    root["instance"] = custom_to_json(*config.custom);
  } else {
    throw ConfigError("serialize_config: no instance set");
  }
  root["seed"] = config.seed;
  root["ticks"] = config.ticks;
  root["snapshot_stride"] = config.snapshot_stride;
  root["p_update"] = config.p_update;
  root["p_comm"] = config.p_comm;
  Json delay;
  delay["mode"] =
      config.delay.mode == DelayMode::kInstant ? "instant" : "queued";
  if (config.delay.mode == DelayMode::kQueued) {
    delay["max_latency"] = config.delay.max_latency;
  }
  root["delay"] = std::move(delay);
  if (config.gamma_override) root["gamma"] = *config.gamma_override;
  root["output_dir"] = config.output_dir;
  return root.dump();
}

BuiltInstance build_instance(const ExperimentConfig& config) {
  BuiltInstance out;
  if (config.preset) {
    out.problem = netflow::benchmark_problem();
    out.reg.alphas = netflow::preset_alphas(*config.preset);
  } else if (config.custom) {
    const CustomInstance& inst = *config.custom;
    const Matrix C =
        netflow::build_connection_matrix(inst.routes, inst.num_edges);
    out.problem = netflow::build_problem(C, inst.scale_local,
                                         inst.scale_coupling, inst.box_lo,
                                         inst.box_hi);
    out.problem.layout = BlockLayout::scalar(inst.orders, inst.weights);
    out.reg.alphas = inst.alphas;
  } else {
    throw ConfigError("build_instance: no instance set");
  }
  if (config.gamma_override) {
    out.reg.gamma = *config.gamma_override;
  } else {
    out.reg.gamma = 1.0;  // placeholder for the Lipschitz query
    out.reg.gamma = 1.0 / lipschitz_data(out.problem, out.reg).max;
  }
  return out;
}

World make_world(const ExperimentConfig& config) {
  BuiltInstance built = build_instance(config);
  const Vector x0 =
      clamp_to_box(built.problem, Vector::Zero(built.problem.layout.dim()));
  ScheduleConfig schedule;
  schedule.p_update = config.p_update;
  schedule.p_comm = config.p_comm;
  schedule.delay = config.delay;
  return init_world(built.problem, built.reg, x0, config.seed, schedule);
}

}  // namespace asyncopt

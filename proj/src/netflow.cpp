#include "asyncopt/netflow.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "asyncopt/engine.hpp"

namespace asyncopt {
namespace netflow {

Matrix build_connection_matrix(const Routes& routes, int num_edges) {
  if (num_edges < 1) {
    throw std::invalid_argument("build_connection_matrix: num_edges must be >= 1");
  }
  const int agents = static_cast<int>(routes.size());
  Matrix C = Matrix::Zero(num_edges, agents);
  for (int i = 0; i < agents; ++i) {
    for (int e : routes[i]) {
      if (e < 1 || e > num_edges) {
        throw std::invalid_argument("build_connection_matrix: edge index out of range");
      }
      C(e - 1, i) = 1.0;
    }
  }
  return C;
}

Problem build_problem(const Matrix& C, double scale_local,
                      double scale_coupling, double box_lo, double box_hi) {
  if (((C.array() != 0.0) && (C.array() != 1.0)).any()) {
    throw std::invalid_argument("build_problem: connection matrix must be binary");
  }
  const int agents = static_cast<int>(C.cols());
  if (agents < 1) {
    throw std::invalid_argument("build_problem: at least one agent");
  }
  if (box_lo <= -1.0) {
    throw std::invalid_argument("build_problem: box must keep 1 + x_i positive");
  }

  Problem p;
  p.agent_count = agents;
  p.layout = BlockLayout::uniform(agents, 1);
  const Matrix gram = C.transpose() * C;

  p.local_cost.reserve(agents);
  p.local_grad.reserve(agents);
  for (int i = 0; i < agents; ++i) {
    p.local_cost.push_back([scale_local](const Eigen::Ref<const Vector>& xi) {
      return -scale_local * std::log1p(xi[0]);
    });
    p.local_grad.push_back([scale_local](const Eigen::Ref<const Vector>& xi) {
      Vector g(1);
      g[0] = -scale_local / (1.0 + xi[0]);
      return g;
    });
  }
  p.coupling_cost = [gram, scale_coupling](const Eigen::Ref<const Vector>& x) {
    return scale_coupling * x.dot(gram * x);
  };
  p.coupling_grad = [gram, scale_coupling](const Eigen::Ref<const Vector>& x) {
    return Vector(2.0 * scale_coupling * (gram * x));
  };

  p.box_lo = Vector::Constant(agents, box_lo);
  p.box_hi = Vector::Constant(agents, box_hi);

  // d2/dx2 of the local cost is scale_local / (1+x)^2 <= scale_local on
  // x >= 0, and the coupling Hessian is 2 * scale_coupling * C^T C.
  const double lam_max =
      Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().maxCoeff();
  const double block_lip = scale_local + 2.0 * scale_coupling * lam_max;
  p.analytic_grad_lipschitz = Vector::Constant(agents, block_lip);
  p.grad_f_lipschitz = block_lip;
  return p;
}

const Routes& benchmark_routes() {
  static const Routes routes = {
      {1, 3, 6},        // 1 -> 7
      {4, 7, 8},        // 2 -> 8
      {2, 4, 7, 5},     // 3 -> 4
      {3, 4, 7},        // 5 -> 6
      {1, 3, 6, 7, 5},  // 1 -> 4
      {2, 4, 9},        // 3 -> 8
      {5, 8, 9, 6},     // 4 -> 5
      {7, 4},           // 6 -> 2
  };
  return routes;
}

Vector benchmark_weights() {
  Vector w(8);
  w << 12, 8, 6, 7, 6, 10, 9, 10;
  return w;
}

Vector benchmark_orders() {
  Vector p(8);
  p << kInfOrder, 20, 3, 90, 6, 12, 2, 9;
  return p;
}

Vector preset_alphas(RegPreset choice) {
  Vector a(8);
  switch (choice) {
    case RegPreset::kA1:
      a << 3e-4, 1e-4, 9e-4, 2e-4, 1e-3, 1e-3, 5e-4, 4e-4;
      break;
    case RegPreset::kA2:
      a << 0.01, 0.01, 0.003, 0.005, 0.002, 0.01, 0.005, 0.002;
      break;
    case RegPreset::kA3:
      a << 0.08, 0.1, 0.1, 0.09, 0.009, 0.1, 0.08, 0.04;
      break;
  }
  return a;
}

double preset_reg_norm(RegPreset choice) {
  return preset_alphas(choice).maxCoeff();
}

BlockLayout benchmark_layout() {
  return BlockLayout::scalar(benchmark_orders(), benchmark_weights());
}

Problem benchmark_problem() {
  const Matrix C = build_connection_matrix(benchmark_routes(), 9);
  Problem p = build_problem(C, 100.0, 1.0 / 20.0, 0.0, kBenchmarkBoxHi);
  p.layout = benchmark_layout();
  return p;
}

Regularization benchmark_regularization(RegPreset choice) {
  Problem p = benchmark_problem();
  Regularization reg;
  reg.alphas = preset_alphas(choice);
  reg.gamma = 1.0;  // placeholder until L_max is known
  const LipschitzData lip = lipschitz_data(p, reg);
  reg.gamma = 1.0 / lip.max;
  return reg;
}

World benchmark_instance(RegPreset choice, std::uint64_t seed) {
  ScheduleConfig schedule;
  schedule.p_update = 0.1;
  schedule.p_comm = 0.1;
  schedule.delay = {DelayMode::kInstant, 0};
  return init_world(benchmark_problem(), benchmark_regularization(choice),
                    Vector::Zero(8), seed, schedule);
}

Routes parse_routes_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("parse_routes_file: cannot open " + path);
  }
  std::vector<std::pair<int, std::vector<int>>> rows;
  std::string line;
  int max_agent = 0;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    int agent = 0;
    if (!(ss >> agent) || agent < 1) {
      throw std::runtime_error("parse_routes_file: bad agent id in '" + line + "'");
    }
    std::vector<int> edges;
    int e = 0;
    while (ss >> e) edges.push_back(e);
    if (!ss.eof()) {
      throw std::runtime_error("parse_routes_file: bad edge list in '" + line + "'");
    }
    rows.emplace_back(agent, std::move(edges));
    max_agent = std::max(max_agent, agent);
  }
  if (rows.empty()) {
    throw std::runtime_error("parse_routes_file: no routes in " + path);
  }
  Routes routes(max_agent);
  std::vector<bool> seen(max_agent, false);
  for (auto& [agent, edges] : rows) {
    if (seen[agent - 1]) {
      throw std::runtime_error("parse_routes_file: duplicate agent id " +
                               std::to_string(agent));
    }
    seen[agent - 1] = true;
    routes[agent - 1] = std::move(edges);
  }
  for (int i = 0; i < max_agent; ++i) {
    if (!seen[i]) {
      throw std::runtime_error("parse_routes_file: missing agent id " +
                               std::to_string(i + 1));
    }
  }
  return routes;
}

}  // namespace netflow
}  // namespace asyncopt

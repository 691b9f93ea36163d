#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <map>

#include "asyncopt/certify.hpp"
#include "asyncopt/engine.hpp"
#include "asyncopt/netflow.hpp"

using namespace asyncopt;

namespace {

Problem zero_problem(int agents, double box_lo = -100.0, double box_hi = 100.0) {
  Problem p;
  p.agent_count = agents;
  p.layout = BlockLayout::uniform(agents, 1);
  for (int i = 0; i < agents; ++i) {
    p.local_cost.push_back([](const Eigen::Ref<const Vector>&) { return 0.0; });
    p.local_grad.push_back(
        [](const Eigen::Ref<const Vector>&) { return Vector::Zero(1).eval(); });
  }
  p.box_lo = Vector::Constant(agents, box_lo);
  p.box_hi = Vector::Constant(agents, box_hi);
  return p;
}

World benchmark_world(netflow::RegPreset choice, std::uint64_t seed,
                  ScheduleConfig schedule) {
  const Problem problem = netflow::benchmark_problem();
  const Regularization reg = netflow::benchmark_regularization(choice);
  return init_world(problem, reg, Vector::Zero(8), seed, schedule);
}

bool views_equal(const std::vector<AgentView>& a,
                 const std::vector<AgentView>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i].x.array() != b[i].x.array()).any()) return false;
    if (a[i].tau != b[i].tau) return false;
  }
  return true;
}

bool events_equal(const std::vector<Event>& a, const std::vector<Event>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].tick != b[k].tick || a[k].kind != b[k].kind ||
        a[k].agent != b[k].agent || a[k].source != b[k].source ||
        a[k].tau != b[k].tau || a[k].clamped != b[k].clamped) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("init_world starts every agent at x0") {
  World w = benchmark_world(netflow::RegPreset::kA2, 42, {});
  CHECK(w.tick == 0);
  for (const AgentView& v : w.views) {
    CHECK(v.x.isZero(0.0));
    for (std::int64_t t : v.tau) CHECK(t == 0);
  }
}

TEST_CASE("init_world rejects infeasible starts") {
  // default routing box is [0, 10]
  const Matrix C = netflow::build_connection_matrix(netflow::benchmark_routes(), 9);
  const Problem p = netflow::build_problem(C);
  Regularization reg{netflow::preset_alphas(netflow::RegPreset::kA2), 0.009};
  Vector x0 = Vector::Zero(8);
  x0[2] = 11.0;
  CHECK_THROWS_AS(init_world(p, reg, x0, 1, {}), std::invalid_argument);
}

TEST_CASE("identical seeds give identical event streams") {
  World a = benchmark_world(netflow::RegPreset::kA1, 4242, {});
  World b = benchmark_world(netflow::RegPreset::kA1, 4242, {});
  for (int t = 0; t < 1000; ++t) {
    step_world(a);
    step_world(b);
  }
  CHECK(events_equal(a.event_log, b.event_log));
  CHECK(views_equal(a.views, b.views));
}

TEST_CASE("agent_compute with a pure regularizer") {
  const Problem p = zero_problem(3);
  Regularization reg{Vector::Constant(3, 1.0), 0.5};
  World w = init_world(p, reg, Vector::Constant(3, 4.0), 1, {});
  agent_compute(w, 1);
  CHECK(w.views[1].x[1] == doctest::Approx(2.0).epsilon(1e-15));
  // other agents and other blocks untouched
  CHECK(w.views[0].x[1] == 4.0);
  CHECK(w.views[1].x[0] == 4.0);
  CHECK(w.event_log.size() == 1);
  CHECK(w.event_log[0].kind == Event::Kind::kUpdate);
}

TEST_CASE("first update on the routing instance steps by 100 gamma") {
  World w = benchmark_world(netflow::RegPreset::kA1, 7, {});
  const double gamma = w.reg.gamma;
  agent_compute(w, 4);
  CHECK(w.views[4].x[4] == doctest::Approx(100.0 * gamma).epsilon(1e-14));
  CHECK(w.clamp_events == 0);
}

TEST_CASE("deliver propagates the latest block and its tick") {
  World w = benchmark_world(netflow::RegPreset::kA2, 9, {});
  // never-updated sender: x0 and tau = 0
  deliver(w, 2, 5);
  CHECK(w.views[5].x[2] == 0.0);
  CHECK(w.views[5].tau[2] == 0);

  // sender updates at tick 5, delivery happens at tick 9
  w.tick = 5;
  agent_compute(w, 2);
  const double computed = w.views[2].x[2];
  w.tick = 9;
  deliver(w, 2, 5);
  CHECK(w.views[5].x[2] == computed);
  CHECK(w.views[5].tau[2] == 5);

  CHECK_THROWS_AS(deliver(w, 3, 3), std::invalid_argument);
}

TEST_CASE("step_world without events only advances the tick") {
  ScheduleConfig schedule;
  schedule.p_update = 0.0;
  schedule.p_comm = 0.0;
  World w = benchmark_world(netflow::RegPreset::kA2, 3, schedule);
  const std::vector<AgentView> before = w.views;
  step_world(w);
  CHECK(w.tick == 1);
  CHECK(views_equal(before, w.views));
  CHECK(w.event_log.empty());
}

TEST_CASE("synchronous schedule reproduces projected gradient descent") {
  ScheduleConfig schedule;
  schedule.p_update = 1.0;
  schedule.p_comm = 1.0;
  World w = benchmark_world(netflow::RegPreset::kA2, 5, schedule);
  const Problem p = w.problem;
  const Regularization reg = w.reg;

  Vector x = Vector::Zero(8);
  for (int t = 0; t < 50; ++t) {
    step_world(w);
    Vector next(8);
    for (int i = 0; i < 8; ++i) {
      const Vector g = grad_f_A_block(p, reg, x, i);
      next[i] = std::min(std::max(x[i] - reg.gamma * g[0], p.box_lo[i]),
                         p.box_hi[i]);
    }
    x = next;
    // authoritative blocks: agent i's own coordinate
    for (int i = 0; i < 8; ++i) {
      CHECK(std::abs(w.views[i].x[i] - x[i]) <= 1e-12);
    }
  }
}

TEST_CASE("liveness under the default schedule") {
  World w = benchmark_world(netflow::RegPreset::kA2, 7, {});
  for (int t = 0; t < 10000; ++t) step_world(w);
  std::vector<int> updates(8, 0);
  std::vector<int> delivered(64, 0);
  for (const Event& e : w.event_log) {
    if (e.kind == Event::Kind::kUpdate) {
      ++updates[e.agent];
    } else {
      ++delivered[e.source * 8 + e.agent];
    }
  }
  for (int i = 0; i < 8; ++i) CHECK(updates[i] >= 1);
  for (int j = 0; j < 8; ++j) {
    for (int i = 0; i < 8; ++i) {
      if (i != j) CHECK(delivered[j * 8 + i] >= 1);
    }
  }
}

TEST_CASE("queued delivery is FIFO with bounded latency") {
  ScheduleConfig schedule;
  schedule.p_update = 0.2;
  schedule.p_comm = 1.0;  // a message on every pair at every tick
  schedule.delay = {DelayMode::kQueued, 4};
  World w = benchmark_world(netflow::RegPreset::kA2, 21, schedule);
  const int ticks = 200;
  for (int t = 0; t < ticks; ++t) step_world(w);

  std::map<std::pair<int, int>, std::int64_t> last_tick;
  std::map<std::pair<int, int>, std::int64_t> last_tau;
  std::map<std::pair<int, int>, int> count;
  for (const Event& e : w.event_log) {
    if (e.kind != Event::Kind::kDeliver) continue;
    const auto key = std::make_pair(e.source, e.agent);
    CHECK(e.tau <= e.tick);
    if (last_tick.contains(key)) {
      CHECK(e.tick >= last_tick[key]);  // FIFO order
      CHECK(e.tau >= last_tau[key]);    // computation ticks never regress
    }
    last_tick[key] = e.tick;
    last_tau[key] = e.tau;
    ++count[key];
  }
  // one send per tick per pair; at most max_latency messages still in flight
  for (int j = 0; j < 8; ++j) {
    for (int i = 0; i < 8; ++i) {
      if (i == j) continue;
      const int delivered = count[std::make_pair(j, i)];
      CHECK(delivered >= ticks - 4);
      CHECK(delivered <= ticks);
    }
  }
}

TEST_CASE("replay reproduces the live state exactly") {
  for (const DelayModel delay :
       {DelayModel{DelayMode::kInstant, 0}, DelayModel{DelayMode::kQueued, 4}}) {
    ScheduleConfig schedule;
    schedule.delay = delay;
    World w = benchmark_world(netflow::RegPreset::kA3, 1234, schedule);
    for (int t = 0; t < 1000; ++t) step_world(w);
    const std::vector<Vector> replayed =
        replay_views(w.problem, w.reg, w.x0, w.event_log);
    REQUIRE(replayed.size() == w.views.size());
    for (std::size_t i = 0; i < replayed.size(); ++i) {
      CHECK((replayed[i].array() == w.views[i].x.array()).all());
    }
  }
}

TEST_CASE("iterates stay inside the box") {
  World w = benchmark_world(netflow::RegPreset::kA1, 99, {});
  Trace trace = run(w, 2000, 100);
  for (const Snapshot& snap : trace.snapshots) {
    for (const Vector& view : snap.views) {
      CHECK(inside_box(w.problem, view));
    }
  }
}

TEST_CASE("run snapshots and determinism") {
  World w0 = benchmark_world(netflow::RegPreset::kA2, 10, {});
  const Trace empty = run(w0, 0, 100);
  CHECK(empty.snapshots.size() == 1);
  CHECK(empty.snapshots[0].tick == 0);
  CHECK(empty.final_tick == 0);

  World wa = benchmark_world(netflow::RegPreset::kA2, 10, {});
  World wb = benchmark_world(netflow::RegPreset::kA2, 10, {});
  const Trace ta = run(wa, 500, 50);
  const Trace tb = run(wb, 500, 50);
  const char* path_a = "trace_a.tmp.log";
  const char* path_b = "trace_b.tmp.log";
  write_trace(ta, path_a);
  write_trace(tb, path_b);
  auto slurp = [](const char* path) {
    std::FILE* f = std::fopen(path, "rb");
    REQUIRE(f != nullptr);
    std::string text;
    char chunk[4096];
    std::size_t got = 0;
    while ((got = std::fread(chunk, 1, sizeof(chunk), f)) > 0) {
      text.append(chunk, got);
    }
    std::fclose(f);
    return text;
  };
  CHECK(slurp(path_a) == slurp(path_b));
  std::remove(path_a);
  std::remove(path_b);
}

TEST_CASE("trace files round-trip") {
  ScheduleConfig schedule;
  schedule.delay = {DelayMode::kQueued, 3};
  World w = benchmark_world(netflow::RegPreset::kA1, 77, schedule);
  Trace trace = run(w, 300, 25);
  trace.config_json = "{\"instance\":\"A1\"}";
  const char* path = "trace_roundtrip.tmp.log";
  write_trace(trace, path);
  const Trace loaded = read_trace(path);
  std::remove(path);

  CHECK(loaded.seed == trace.seed);
  CHECK(loaded.final_tick == trace.final_tick);
  CHECK(loaded.schedule.delay.mode == DelayMode::kQueued);
  CHECK(loaded.schedule.delay.max_latency == 3);
  CHECK(loaded.config_json == trace.config_json);
  CHECK(events_equal(loaded.events, trace.events));
  REQUIRE(loaded.snapshots.size() == trace.snapshots.size());
  for (std::size_t s = 0; s < trace.snapshots.size(); ++s) {
    CHECK(loaded.snapshots[s].tick == trace.snapshots[s].tick);
    for (std::size_t a = 0; a < trace.snapshots[s].views.size(); ++a) {
      CHECK((loaded.snapshots[s].views[a].array() ==
             trace.snapshots[s].views[a].array())
                .all());
    }
  }
  // the log alone reproduces the recorded final state
  const std::vector<Vector> replayed =
      replay_views(w.problem, w.reg, loaded.x0, loaded.events);
  for (std::size_t i = 0; i < replayed.size(); ++i) {
    CHECK((replayed[i].array() == loaded.final_views[i].array()).all());
  }
}

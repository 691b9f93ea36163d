#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "asyncopt/problem.hpp"
#include "asyncopt/rng.hpp"

namespace asyncopt {

enum class DelayMode {
  kInstant,  // a communication event hands over the sender's latest block
  kQueued,   // messages carry a uniform random latency, FIFO per pair
};

struct DelayModel {
  DelayMode mode = DelayMode::kInstant;
  int max_latency = 0;  // Queued only: latency drawn uniformly from [0, max_latency]
};

struct ScheduleConfig {
  double p_update = 0.1;  // per agent per tick
  double p_comm = 0.1;    // per ordered pair per tick
  DelayModel delay;
};

struct Event {
  enum class Kind { kUpdate, kDeliver };
  std::int64_t tick = 0;
  Kind kind = Kind::kUpdate;
  int agent = 0;          // updating agent, or receiver of a delivery
  int source = -1;        // sender of a delivery
  std::int64_t tau = 0;   // tick at which the delivered block was computed
  bool clamped = false;   // update ran into the box
};

/// Agent i's local copy of the ensemble plus the computation ticks of every
/// block it holds. tau[j] is the tick at which the held copy of block j was
/// computed by agent j (tau[i] is the agent's own last update tick).
struct AgentView {
  Vector x;
  std::vector<std::int64_t> tau;
};

struct Snapshot {
  std::int64_t tick = 0;
  std::vector<Vector> views;  // one full copy per agent
};

/// Everything a run produces: periodic full-state snapshots, the complete
/// event log, and the final state. Deterministic in (seed, config, x0).
struct Trace {
  std::uint64_t seed = 0;
  ScheduleConfig schedule;
  std::int64_t ticks = 0;   // requested run length
  std::int64_t stride = 1;  // snapshot stride
  int agent_count = 0;
  Eigen::Index dim = 0;
  Vector x0;
  std::vector<Snapshot> snapshots;
  std::vector<Event> events;
  std::vector<Vector> final_views;
  std::int64_t final_tick = 0;
  std::int64_t clamp_events = 0;
  std::string config_json;  // experiment config echo, filled by the cli layer
};

struct Message {
  std::int64_t deliver_tick = 0;
  std::int64_t tau = 0;
  Vector value;
};

/// Simulation state. Owned by a single logical executor; the loop is
/// sequential. Independent worlds (distinct seeds) may run in parallel.
struct World {
  Problem problem;
  Regularization reg;
  ScheduleConfig schedule;
  std::uint64_t seed = 0;
  std::int64_t tick = 0;
  Vector x0;
  std::vector<AgentView> views;
  std::vector<Event> event_log;
  std::int64_t clamp_events = 0;
  Rng rng{0};
  std::vector<std::deque<Message>> queues;  // ordered pair (j, i) at j*N+i
};

/// Fresh world at tick 0 with every agent's view equal to x0 and all tau = 0.
/// Throws if x0 lies outside the feasible box or the configuration is invalid.
World init_world(const Problem& problem, const Regularization& reg,
                 const Vector& x0, std::uint64_t seed,
                 const ScheduleConfig& schedule);

/// One gradient update of agent i's own block at its current (possibly
/// stale) view, clamped to the box. Logs an update event.
void agent_compute(World& world, int i);

/// Hands agent j's latest block to agent i with tau = j's last update tick.
/// Throws if i == j.
void deliver(World& world, int j, int i);

/// Advances the world by one tick: draws per-agent update coins (agents
/// ascending) and per-ordered-pair communication coins (pairs lexicographic)
/// from the seeded generator, applies deliveries before computations, and
/// leaves everything else untouched.
void step_world(World& world);

/// Runs `ticks` further steps, snapshotting every `stride` ticks (the entry
/// state and the final state are always snapshotted).
Trace run(World& world, std::int64_t ticks, std::int64_t stride = 1);

/// Re-executes an event log from x0 and returns the resulting views. Delivery
/// events reproduce x_j^j(tau) exactly from the replayed update history, so
/// the result must match the live views bit for bit.
std::vector<Vector> replay_views(const Problem& problem,
                                 const Regularization& reg, const Vector& x0,
                                 const std::vector<Event>& events);

void write_trace(const Trace& trace, const std::string& path);
Trace read_trace(const std::string& path);

}  // namespace asyncopt

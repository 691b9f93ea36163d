#include "asyncopt/engine.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace asyncopt {

World init_world(const Problem& problem, const Regularization& reg,
                 const Vector& x0, std::uint64_t seed,
                 const ScheduleConfig& schedule) {
  validate(problem);
  validate(problem, reg);
  if (x0.size() != problem.layout.dim()) {
    throw std::invalid_argument("init_world: x0 dimension mismatch");
  }
  if (!inside_box(problem, x0)) {
    throw std::invalid_argument("init_world: x0 outside the feasible box");
  }
  if (schedule.p_update < 0.0 || schedule.p_update > 1.0 ||
      schedule.p_comm < 0.0 || schedule.p_comm > 1.0) {
    throw std::invalid_argument("init_world: probabilities must be in [0, 1]");
  }
  if (schedule.delay.mode == DelayMode::kQueued && schedule.delay.max_latency < 0) {
    throw std::invalid_argument("init_world: max_latency must be >= 0");
  }

  World w;
  w.problem = problem;
  w.reg = reg;
  w.schedule = schedule;
  w.seed = seed;
  w.x0 = x0;
  w.rng = Rng(seed);
  const int n_agents = problem.agent_count;
  w.views.resize(n_agents);
  for (AgentView& v : w.views) {
    v.x = x0;
    v.tau.assign(n_agents, 0);
  }
  w.queues.resize(static_cast<std::size_t>(n_agents) * n_agents);
  return w;
}

void agent_compute(World& world, int i) {
  const Problem& p = world.problem;
  if (i < 0 || i >= p.agent_count) {
    throw std::out_of_range("agent_compute: agent index out of range");
  }
  AgentView& view = world.views[i];
  const Vector g = grad_f_A_block(p, world.reg, view.x, i);
  const Eigen::Index off = p.layout.offset(i);
  const Eigen::Index dim = p.layout.block(i).dim;
  bool clamped = false;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double raw = view.x[off + k] - world.reg.gamma * g[k];
    const double clipped =
        std::min(std::max(raw, p.box_lo[off + k]), p.box_hi[off + k]);
    clamped = clamped || (clipped != raw);
    view.x[off + k] = clipped;
  }
  view.tau[i] = world.tick;
  if (clamped) ++world.clamp_events;
  world.event_log.push_back(
      {world.tick, Event::Kind::kUpdate, i, -1, world.tick, clamped});
}

namespace {

void apply_delivery(World& world, int j, int i, std::int64_t tau,
                    const Eigen::Ref<const Vector>& value) {
  const BlockLayout& layout = world.problem.layout;
  world.views[i].x.segment(layout.offset(j), layout.block(j).dim) = value;
  world.views[i].tau[j] = tau;
  world.event_log.push_back({world.tick, Event::Kind::kDeliver, i, j, tau, false});
}

}  // namespace

void deliver(World& world, int j, int i) {
  const int n_agents = world.problem.agent_count;
  if (i < 0 || i >= n_agents || j < 0 || j >= n_agents) {
    throw std::out_of_range("deliver: agent index out of range");
  }
  if (i == j) {
    throw std::invalid_argument("deliver: agents do not message themselves");
  }
  const BlockLayout& layout = world.problem.layout;
  apply_delivery(world, j, i, world.views[j].tau[j],
                 world.views[j].x.segment(layout.offset(j), layout.block(j).dim));
}

void step_world(World& world) {
  const int n_agents = world.problem.agent_count;
  const std::int64_t k = ++world.tick;

  // Coin draws in canonical order: agents ascending, then ordered pairs
  // (sender, receiver) lexicographic. The draw order is part of the
  // determinism contract.
  std::vector<char> update(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    update[i] = world.rng.uniform01() < world.schedule.p_update ? 1 : 0;
  }
  std::vector<char> comm(static_cast<std::size_t>(n_agents) * n_agents, 0);
  for (int j = 0; j < n_agents; ++j) {
    for (int i = 0; i < n_agents; ++i) {
      if (i == j) continue;
      comm[static_cast<std::size_t>(j) * n_agents + i] =
          world.rng.uniform01() < world.schedule.p_comm ? 1 : 0;
    }
  }

  if (world.schedule.delay.mode == DelayMode::kInstant) {
    for (int j = 0; j < n_agents; ++j) {
      for (int i = 0; i < n_agents; ++i) {
        if (comm[static_cast<std::size_t>(j) * n_agents + i]) deliver(world, j, i);
      }
    }
  } else {
    const BlockLayout& layout = world.problem.layout;
    for (int j = 0; j < n_agents; ++j) {
      for (int i = 0; i < n_agents; ++i) {
        if (!comm[static_cast<std::size_t>(j) * n_agents + i]) continue;
        const std::int64_t latency =
            static_cast<std::int64_t>(world.rng.uniform_int(
                static_cast<std::uint64_t>(world.schedule.delay.max_latency)));
        auto& queue = world.queues[static_cast<std::size_t>(j) * n_agents + i];
        std::int64_t due = k + latency;
        if (!queue.empty()) due = std::max(due, queue.back().deliver_tick);
        queue.push_back({due, world.views[j].tau[j],
                         world.views[j].x.segment(layout.offset(j),
                                                  layout.block(j).dim)});
      }
    }
    for (int j = 0; j < n_agents; ++j) {
      for (int i = 0; i < n_agents; ++i) {
        auto& queue = world.queues[static_cast<std::size_t>(j) * n_agents + i];
        while (!queue.empty() && queue.front().deliver_tick <= k) {
          apply_delivery(world, j, i, queue.front().tau, queue.front().value);
          queue.pop_front();
        }
      }
    }
  }

  for (int i = 0; i < n_agents; ++i) {
    if (update[i]) agent_compute(world, i);
  }
}

namespace {

Snapshot take_snapshot(const World& world) {
  Snapshot s;
  s.tick = world.tick;
  s.views.reserve(world.views.size());
  for (const AgentView& v : world.views) s.views.push_back(v.x);
  return s;
}

}  // namespace

Trace run(World& world, std::int64_t ticks, std::int64_t stride) {
  if (ticks < 0) throw std::invalid_argument("run: ticks must be >= 0");
  if (stride < 1) throw std::invalid_argument("run: stride must be >= 1");

  Trace trace;
  trace.seed = world.seed;
  trace.schedule = world.schedule;
  trace.ticks = ticks;
  trace.stride = stride;
  trace.agent_count = world.problem.agent_count;
  trace.dim = world.problem.layout.dim();
  trace.x0 = world.x0;

  trace.snapshots.push_back(take_snapshot(world));
  for (std::int64_t t = 0; t < ticks; ++t) {
    step_world(world);
    if (world.tick % stride == 0 || t + 1 == ticks) {
      trace.snapshots.push_back(take_snapshot(world));
    }
  }
  trace.events = world.event_log;
  trace.final_tick = world.tick;
  trace.clamp_events = world.clamp_events;
  trace.final_views.reserve(world.views.size());
  for (const AgentView& v : world.views) trace.final_views.push_back(v.x);
  return trace;
}

std::vector<Vector> replay_views(const Problem& problem,
                                 const Regularization& reg, const Vector& x0,
                                 const std::vector<Event>& events) {
  validate(problem);
  const int n_agents = problem.agent_count;
  const BlockLayout& layout = problem.layout;
  std::vector<Vector> views(n_agents, x0);
  // Own-block history per agent: value after the update at each tick.
  std::vector<std::map<std::int64_t, Vector>> history(n_agents);

  std::int64_t last_tick = 0;
  for (const Event& e : events) {
    if (e.tick < last_tick) {
      throw std::runtime_error("replay_views: event log not ordered by tick");
    }
    last_tick = e.tick;
    if (e.kind == Event::Kind::kUpdate) {
      const int i = e.agent;
      const Vector g = grad_f_A_block(problem, reg, views[i], i);
      const Eigen::Index off = layout.offset(i);
      const Eigen::Index dim = layout.block(i).dim;
      for (Eigen::Index c = 0; c < dim; ++c) {
        const double raw = views[i][off + c] - reg.gamma * g[c];
        views[i][off + c] =
            std::min(std::max(raw, problem.box_lo[off + c]), problem.box_hi[off + c]);
      }
      history[i][e.tick] = views[i].segment(off, dim);
    } else {
      const int j = e.source;
      const int i = e.agent;
      if (j < 0 || j >= n_agents || i < 0 || i >= n_agents || i == j) {
        throw std::runtime_error("replay_views: malformed delivery event");
      }
      Vector value;
      if (e.tau == 0) {
        value = x0.segment(layout.offset(j), layout.block(j).dim);
      } else {
        const auto it = history[j].find(e.tau);
        if (it == history[j].end()) {
          throw std::runtime_error("replay_views: delivery tau matches no update");
        }
        value = it->second;
      }
      views[i].segment(layout.offset(j), layout.block(j).dim) = value;
    }
  }
  return views;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_vector(std::string& out, const Vector& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    out += ' ';
    append_double(out, v[k]);
  }
}

}  // namespace

void write_trace(const Trace& trace, const std::string& path) {
  std::string out;
  out.reserve(trace.events.size() * 24 + trace.snapshots.size() * 200 + 512);
  out += "# asyncopt trace v1\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "meta seed=%" PRIu64 " ticks=%" PRId64 " stride=%" PRId64
                " agents=%d dim=%td final_tick=%" PRId64 " clamp_events=%" PRId64
                "\n",
                trace.seed, trace.ticks, trace.stride, trace.agent_count,
                static_cast<std::ptrdiff_t>(trace.dim), trace.final_tick,
                trace.clamp_events);
  out += buf;
  out += "sched p_update=";
  append_double(out, trace.schedule.p_update);
  out += " p_comm=";
  append_double(out, trace.schedule.p_comm);
  if (trace.schedule.delay.mode == DelayMode::kInstant) {
    out += " delay=instant\n";
  } else {
    std::snprintf(buf, sizeof(buf), " delay=queued:%d\n",
                  trace.schedule.delay.max_latency);
    out += buf;
  }
  if (!trace.config_json.empty()) {
    out += "config ";
    out += trace.config_json;
    out += '\n';
  }
  out += "x0";
  append_vector(out, trace.x0);
  out += '\n';
  for (const Event& e : trace.events) {
    if (e.kind == Event::Kind::kUpdate) {
      std::snprintf(buf, sizeof(buf), "E %" PRId64 " U %d %d\n", e.tick, e.agent,
                    e.clamped ? 1 : 0);
    } else {
      std::snprintf(buf, sizeof(buf), "E %" PRId64 " D %d %d %" PRId64 "\n",
                    e.tick, e.source, e.agent, e.tau);
    }
    out += buf;
  }
  for (const Snapshot& s : trace.snapshots) {
    for (std::size_t a = 0; a < s.views.size(); ++a) {
      std::snprintf(buf, sizeof(buf), "S %" PRId64 " %zu", s.tick, a);
      out += buf;
      append_vector(out, s.views[a]);
      out += '\n';
    }
  }

  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_trace: cannot open " + path);
  const std::size_t written = std::fwrite(out.data(), 1, out.size(), f);
  std::fclose(f);
  if (written != out.size()) {
    throw std::runtime_error("write_trace: short write to " + path);
  }
}

Trace read_trace(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("read_trace: cannot open " + path);
  std::string text;
  char chunk[1 << 16];
  std::size_t got = 0;
  while ((got = std::fread(chunk, 1, sizeof(chunk), f)) > 0) {
    text.append(chunk, got);
  }
  std::fclose(f);

  Trace trace;
  std::map<std::int64_t, Snapshot> snapshots;
  std::size_t pos = 0;
  bool have_meta = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty() || line[0] == '#') continue;

    if (line.rfind("meta ", 0) == 0) {
      std::ptrdiff_t dim = 0;
      if (std::sscanf(line.c_str(),
                      "meta seed=%" SCNu64 " ticks=%" SCNd64 " stride=%" SCNd64
                      " agents=%d dim=%td final_tick=%" SCNd64
                      " clamp_events=%" SCNd64,
                      &trace.seed, &trace.ticks, &trace.stride,
                      &trace.agent_count, &dim, &trace.final_tick,
                      &trace.clamp_events) != 7) {
        throw std::runtime_error("read_trace: bad meta line");
      }
      trace.dim = dim;
      have_meta = true;
    } else if (line.rfind("sched ", 0) == 0) {
      char delay[64] = {0};
      if (std::sscanf(line.c_str(), "sched p_update=%lf p_comm=%lf delay=%63s",
                      &trace.schedule.p_update, &trace.schedule.p_comm,
                      delay) != 3) {
        throw std::runtime_error("read_trace: bad sched line");
      }
      if (std::string(delay) == "instant") {
        trace.schedule.delay = {DelayMode::kInstant, 0};
      } else if (std::sscanf(delay, "queued:%d",
                             &trace.schedule.delay.max_latency) == 1) {
        trace.schedule.delay.mode = DelayMode::kQueued;
      } else {
        throw std::runtime_error("read_trace: bad delay spec");
      }
    } else if (line.rfind("config ", 0) == 0) {
      trace.config_json = line.substr(7);
    } else if (line.rfind("x0", 0) == 0) {
      if (!have_meta) throw std::runtime_error("read_trace: x0 before meta");
      trace.x0.resize(trace.dim);
      const char* s = line.c_str() + 2;
      char* next = nullptr;
      for (Eigen::Index k = 0; k < trace.dim; ++k) {
        trace.x0[k] = std::strtod(s, &next);
        if (next == s) throw std::runtime_error("read_trace: bad x0 line");
        s = next;
      }
    } else if (line[0] == 'E') {
      std::int64_t tick = 0;
      char kind = 0;
      int a = 0, b = 0;
      std::int64_t tau = 0;
      if (std::sscanf(line.c_str(), "E %" SCNd64 " %c %d %d %" SCNd64, &tick,
                      &kind, &a, &b, &tau) < 4) {
        throw std::runtime_error("read_trace: bad event line");
      }
      if (kind == 'U') {
        trace.events.push_back(
            {tick, Event::Kind::kUpdate, a, -1, tick, b != 0});
      } else if (kind == 'D') {
        trace.events.push_back({tick, Event::Kind::kDeliver, b, a, tau, false});
      } else {
        throw std::runtime_error("read_trace: unknown event kind");
      }
    } else if (line[0] == 'S') {
      if (!have_meta) throw std::runtime_error("read_trace: snapshot before meta");
      std::int64_t tick = 0;
      std::size_t agent = 0;
      int consumed = 0;
      if (std::sscanf(line.c_str(), "S %" SCNd64 " %zu%n", &tick, &agent,
                      &consumed) < 2) {
        throw std::runtime_error("read_trace: bad snapshot line");
      }
      Snapshot& snap = snapshots[tick];
      snap.tick = tick;
      if (snap.views.empty()) {
        snap.views.resize(trace.agent_count);
      }
      if (agent >= snap.views.size()) {
        throw std::runtime_error("read_trace: snapshot agent out of range");
      }
      Vector v(trace.dim);
      const char* s = line.c_str() + consumed;
      char* next = nullptr;
      for (Eigen::Index k = 0; k < trace.dim; ++k) {
        v[k] = std::strtod(s, &next);
        if (next == s) throw std::runtime_error("read_trace: bad snapshot line");
        s = next;
      }
      snap.views[agent] = v;
    } else {
      throw std::runtime_error("read_trace: unknown line '" + line + "'");
    }
  }
  if (!have_meta) throw std::runtime_error("read_trace: missing meta line");
  trace.snapshots.reserve(snapshots.size());
  for (auto& [tick, snap] : snapshots) {
    for (const Vector& v : snap.views) {
      if (v.size() != trace.dim) {
        throw std::runtime_error("read_trace: incomplete snapshot");
      }
    }
    trace.snapshots.push_back(std::move(snap));
  }
  if (!trace.snapshots.empty()) {
    trace.final_views = trace.snapshots.back().views;
  }
  return trace;
}

}  // namespace asyncopt

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <vector>

#include "calu/scheduler.hpp"

namespace calu::sched {

namespace {

struct SimEvent {
  double t = 0;
  int worker = 0;
  bool completion = false;  // false: the worker merely becomes available

  friend bool operator>(const SimEvent& a, const SimEvent& b) {
    if (a.t != b.t) return a.t > b.t;
    if (a.worker != b.worker) return a.worker > b.worker;
    return a.completion < b.completion;
  }
};

}  // namespace

RunReport simulate(dag::TaskGraph& g, const SchedulerConfig& cfg, const CostFn& cost) {
  cfg.validate();
  const ThreadGrid grid = cfg.resolved_grid();
  g.reset();
  Dispatcher disp(g, cfg, grid);
  disp.seed_ready();

  const int p = cfg.workers;
  std::vector<double> free_time(p, 0.0);
  for (std::size_t w = 0; w < cfg.noise.deltas.size(); ++w)
    free_time[w] = cfg.noise.deltas[w];

  std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<>> events;
  for (int w = 0; w < p; ++w) events.push({free_time[w], w, false});

  std::vector<char> busy(p, 0);
  std::vector<std::vector<int>> running(p);
  RunReport rep;
  rep.timeline.workers = p;
  rep.timeline.unit = trace::TimeUnit::Ticks;
  rep.tasks = g.size();

  // Serve every free worker in id order; repeat until no assignment sticks.
  auto assign = [&](double now) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (int w = 0; w < p; ++w) {
        if (busy[w] || free_time[w] > now) continue;
        std::vector<int> batch = disp.acquire(w);
        if (batch.empty()) continue;
        double t = now;
        for (int id : batch) {
          const dag::Task& task = g.task(id);
          const double c = cost(task);
          if (!(c >= 0)) throw std::invalid_argument("simulate: negative task cost");
          rep.timeline.events.push_back(
              {w, task.kind, task.k, task.i, task.j, task.section, t, t + c});
          t += c;
        }
        busy[w] = 1;
        free_time[w] = t;
        running[w] = std::move(batch);
        events.push({t, w, true});
        progress = true;
      }
    }
  };

  int completed = 0;
  while (!events.empty()) {
    const SimEvent ev = events.top();
    events.pop();
    if (ev.completion) {
      busy[ev.worker] = 0;
      for (int id : running[ev.worker]) {
        const auto [bi, bj] = g.task(id).writes();
        disp.note_write(ev.worker, bi, bj);
        for (int r : g.mark_done(id)) disp.push_ready(r);
        ++completed;
      }
      running[ev.worker].clear();
      rep.makespan = std::max(rep.makespan, ev.t);
    }
    assign(ev.t);
  }
  if (completed != g.size())
    throw std::logic_error("simulate: stalled with tasks remaining");

  rep.timeline.makespan = rep.makespan;
  std::sort(rep.timeline.events.begin(), rep.timeline.events.end(),
            [](const trace::TraceEvent& x, const trace::TraceEvent& y) {
              if (x.worker != y.worker) return x.worker < y.worker;
              return x.t_start < y.t_start;
            });
  rep.dynamic_issued = disp.dynamic_issued();
  rep.steals = disp.steals();
  return rep;
}

}  // namespace calu::sched

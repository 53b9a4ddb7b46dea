#include "calu/dag.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "calu/errors.hpp"

namespace calu::dag {

namespace {

std::uint64_t key_of(Kind kind, int k, int i, int j) {
  return (std::uint64_t(kind) << 60) | (std::uint64_t(k) << 40) | (std::uint64_t(i) << 20) |
         std::uint64_t(j);
}

Section section_of(int col, int n_static) {
  return col <= n_static ? Section::Static : Section::Dynamic;
}

std::tuple<int, int, int, int> tie_key(const Task& t) {
  return {t.k, t.j, t.i, int(t.kind)};
}

}  // namespace

std::string name_of(const Task& t) {
  switch (t.kind) {
    case Kind::P: return "P(" + std::to_string(t.k) + ")";
    case Kind::L: return "L(" + std::to_string(t.k) + "," + std::to_string(t.i) + ")";
    case Kind::U: return "U(" + std::to_string(t.k) + "," + std::to_string(t.j) + ")";
    case Kind::S:
      return "S(" + std::to_string(t.k) + "," + std::to_string(t.i) + "," +
             std::to_string(t.j) + ")";
  }
  return "?";
}

TaskGraph TaskGraph::build(const Partition& part, int n_static) {
  if (n_static < 0 || n_static > part.N)
    throw std::invalid_argument("dag: n_static out of range");
  TaskGraph g;
  g.n_static_ = n_static;
  g.columns_ = part.N;
  const int steps = part.steps();

  auto add = [&](Kind kind, int k, int i, int j) {
    Task t{kind, k, i, j, Section::Static};
    t.section = section_of(t.col(), n_static);
    g.index_.emplace(key_of(kind, k, i, j), int(g.tasks_.size()));
    g.tasks_.push_back(t);
    g.preds_list_.emplace_back();
    return int(g.tasks_.size()) - 1;
  };
  auto dep = [&](int id, Kind kind, int k, int i, int j) {
    g.preds_list_[id].push_back(g.index_.at(key_of(kind, k, i, j)));
  };

  // Emission order (K ascending; P, L, U, S within a step) is topological.
  for (int K = 1; K <= steps; ++K) {
    int p = add(Kind::P, K, 0, 0);
    if (K > 1)
      for (int I = K; I <= part.M; ++I) dep(p, Kind::S, K - 1, I, K);
    for (int I = K + 1; I <= part.M; ++I) {
      int l = add(Kind::L, K, I, 0);
      dep(l, Kind::P, K, 0, 0);
    }
    for (int J = K + 1; J <= part.N; ++J) {
      int u = add(Kind::U, K, 0, J);
      dep(u, Kind::P, K, 0, 0);
      if (K > 1)  // the right swap touches every block of the column
        for (int I = K; I <= part.M; ++I) dep(u, Kind::S, K - 1, I, J);
    }
    for (int J = K + 1; J <= part.N; ++J)
      for (int I = K + 1; I <= part.M; ++I) {
        int s = add(Kind::S, K, I, J);
        dep(s, Kind::L, K, I, 0);
        dep(s, Kind::U, K, 0, J);
        if (K > 1) dep(s, Kind::S, K - 1, I, J);
      }
  }
  g.finalize();
  return g;
}

TaskGraph TaskGraph::custom(std::vector<Task> tasks,
                            const std::vector<std::pair<int, int>>& edges, int columns) {
  TaskGraph g;
  g.tasks_ = std::move(tasks);
  g.columns_ = columns;
  for (int id = 0; id < g.size(); ++id) {
    const Task& t = g.tasks_[id];
    g.index_.emplace(key_of(t.kind, t.k, t.i, t.j), id);
  }
  g.preds_list_.resize(g.tasks_.size());
  for (auto [p, s] : edges) {
    if (p < 0 || s < 0 || p >= g.size() || s >= g.size())
      throw std::out_of_range("dag: edge index");
    g.preds_list_[s].push_back(p);
  }
  // Sections come from the caller; record the static column bound for stats.
  for (const Task& t : g.tasks_)
    if (t.section == Section::Static) g.n_static_ = std::max(g.n_static_, t.col());
  g.finalize();
  return g;
}

void TaskGraph::finalize() {
  const int n = size();
  succs_list_.assign(n, {});
  for (int t = 0; t < n; ++t)
    for (int p : preds_list_[t]) succs_list_[p].push_back(t);
  pending_ = std::make_unique<std::atomic<int>[]>(n);
  done_ = std::make_unique<std::atomic<std::uint8_t>[]>(n);
  reset();
  // Kahn pass to verify acyclicity.
  std::vector<int> deg(n), order;
  order.reserve(n);
  for (int t = 0; t < n; ++t) {
    deg[t] = int(preds_list_[t].size());
    if (deg[t] == 0) order.push_back(t);
  }
  for (std::size_t h = 0; h < order.size(); ++h)
    for (int s : succs_list_[order[h]])
      if (--deg[s] == 0) order.push_back(s);
  if (int(order.size()) != n) throw std::logic_error("dag: cycle detected");
}

void TaskGraph::reset() {
  const int n = size();
  for (int t = 0; t < n; ++t) {
    pending_[t].store(int(preds_list_[t].size()), std::memory_order_relaxed);
    done_[t].store(0, std::memory_order_relaxed);
  }
  remaining_.store(n, std::memory_order_relaxed);
}

std::span<const int> TaskGraph::preds(int id) const { return preds_list_[id]; }
std::span<const int> TaskGraph::succs(int id) const { return succs_list_[id]; }

int TaskGraph::find(Kind kind, int k, int i, int j) const {
  auto it = index_.find(key_of(kind, k, i, j));
  return it == index_.end() ? -1 : it->second;
}

bool TaskGraph::executable(int id) const {
  return pending_[id].load(std::memory_order_acquire) == 0 && !done(id);
}

std::vector<int> TaskGraph::initial_ready() const {
  std::vector<int> r;
  for (int t = 0; t < size(); ++t)
    if (preds_list_[t].empty()) r.push_back(t);
  return r;
}

std::vector<int> TaskGraph::mark_done(int id) {
  if (id < 0 || id >= size()) throw std::out_of_range("dag: task id");
  if (pending_[id].load(std::memory_order_acquire) != 0)
    throw DependencyViolation(id, "predecessors unfinished for " + name_of(tasks_[id]));
  if (done_[id].exchange(1, std::memory_order_acq_rel))
    throw DependencyViolation(id, name_of(tasks_[id]) + " completed twice");
  std::vector<int> ready;
  for (int s : succs_list_[id])
    if (pending_[s].fetch_sub(1, std::memory_order_acq_rel) == 1) ready.push_back(s);
  remaining_.fetch_sub(1, std::memory_order_acq_rel);
  return ready;
}

std::vector<int> critical_path(const TaskGraph& g, Section section) {
  const int n = g.size();
  // Tasks are stored topologically; longest distance to a sink per task.
  std::vector<int> len(n, 0);
  for (int t = n - 1; t >= 0; --t) {
    if (g.task(t).section != section) continue;
    len[t] = 1;
    for (int s : g.succs(t))
      if (g.task(s).section == section) len[t] = std::max(len[t], 1 + len[s]);
  }
  int start = -1;
  for (int t = 0; t < n; ++t) {
    if (g.task(t).section != section || len[t] == 0) continue;
    if (start == -1 || len[t] > len[start] ||
        (len[t] == len[start] && tie_key(g.task(t)) < tie_key(g.task(start))))
      start = t;
  }
  std::vector<int> path;
  for (int cur = start; cur != -1;) {
    path.push_back(cur);
    int next = -1;
    for (int s : g.succs(cur)) {
      if (g.task(s).section != section || len[s] != len[cur] - 1) continue;
      if (next == -1 || tie_key(g.task(s)) < tie_key(g.task(next))) next = s;
    }
    cur = next;
  }
  return path;
}

void write_dot(const TaskGraph& g, std::ostream& os) {
  os << "digraph tasks {\n  rankdir=TB;\n";
  for (int t = 0; t < g.size(); ++t) {
    const Task& task = g.task(t);
    os << "  t" << t << " [label=\"" << name_of(task) << "\""
       << (task.section == Section::Dynamic ? ", style=dashed" : "") << "];\n";
  }
  for (int t = 0; t < g.size(); ++t)
    for (int s : g.succs(t)) os << "  t" << t << " -> t" << s << ";\n";
  os << "}\n";
}

}  // namespace calu::dag

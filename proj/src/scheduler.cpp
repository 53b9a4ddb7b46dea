#include "calu/scheduler.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "calu/errors.hpp"
#include "calu/tslu.hpp"

namespace calu::sched {

const char* to_string(Policy p) {
  switch (p) {
    case Policy::Static: return "static";
    case Policy::Dynamic: return "dynamic";
    case Policy::Hybrid: return "hybrid";
    case Policy::BlockLocality: return "block-locality";
    case Policy::GuidedColumnLocality: return "guided-column";
  }
  return "?";
}

Policy parse_policy(std::string_view s) {
  if (s == "static") return Policy::Static;
  if (s == "dynamic") return Policy::Dynamic;
  if (s == "hybrid") return Policy::Hybrid;
  if (s == "block-locality") return Policy::BlockLocality;
  if (s == "guided-column") return Policy::GuidedColumnLocality;
  throw std::invalid_argument("unknown policy '" + std::string(s) + "'");
}

int n_static_panels(int columns, double d_ratio) {
  const int ns = int(std::floor(columns * (1.0 - d_ratio)));
  return std::clamp(ns, 0, columns);
}

int n_static_for(Policy policy, int columns, double d_ratio) {
  switch (policy) {
    case Policy::Static: return columns;
    case Policy::Hybrid: return n_static_panels(columns, d_ratio);
    case Policy::Dynamic:
    case Policy::BlockLocality:
    case Policy::GuidedColumnLocality: return 0;
  }
  return 0;
}

ThreadGrid SchedulerConfig::resolved_grid() const {
  return grid ? *grid : default_grid(workers);
}

void SchedulerConfig::validate() const {
  if (workers < 1) throw std::invalid_argument("scheduler: workers must be positive");
  if (d_ratio < 0.0 || d_ratio > 1.0)
    throw std::invalid_argument("scheduler: d_ratio must lie in [0, 1]");
  if (group < 1) throw std::invalid_argument("scheduler: group must be positive");
  if (tree_width < 0) throw std::invalid_argument("scheduler: tree width must be >= 0");
  if (cutoff < 1) throw std::invalid_argument("scheduler: cutoff must be positive");
  if (grid && grid->workers() != workers)
    throw std::invalid_argument("scheduler: grid size must match worker count");
  noise.validate();
  if (int(noise.deltas.size()) > workers)
    throw std::invalid_argument("scheduler: more noise entries than workers");
}

TaskKey key_of(const dag::Task& t, int id) {
  int rank = 0;
  switch (t.kind) {
    case dag::Kind::U: rank = 0; break;
    case dag::Kind::S: rank = 1; break;
    case dag::Kind::P: rank = 2; break;
    case dag::Kind::L: rank = 3; break;
  }
  return TaskKey{t.col(), t.k, rank, t.i, id};
}

namespace {
TaskKey column_floor(int col) {
  return TaskKey{col, INT_MIN, INT_MIN, INT_MIN, INT_MIN};
}
}  // namespace

Dispatcher::Dispatcher(dag::TaskGraph& g, const SchedulerConfig& cfg, ThreadGrid grid)
    : graph_(g), cfg_(cfg), grid_(grid), workers_(cfg.workers) {
  static_prog_.resize(workers_);
  static_head_.assign(workers_, 0);
  local_.resize(workers_);
  arrival_.resize(workers_);
  in_local_.assign(g.size(), 0);
  focus_.assign(workers_, -1);

  int max_i = 1, max_j = 1;
  for (int id = 0; id < g.size(); ++id) {
    auto [bi, bj] = g.task(id).writes();
    max_i = std::max(max_i, bi);
    max_j = std::max(max_j, bj);
    if (g.task(id).section == dag::Section::Static) {
      const int w = owner(bi, bj, grid_);
      static_prog_[w].push_back(id);
    }
  }
  toucher_stride_ = max_j + 1;
  last_toucher_.assign(std::size_t(max_i + 1) * toucher_stride_, -1);
  const std::size_t blocks = std::size_t(max_i) * max_j;
  local_cap_ = std::max<std::size_t>(4, 2 * ((blocks + workers_ - 1) / workers_));

  for (auto& prog : static_prog_)
    std::sort(prog.begin(), prog.end(), [&](int a, int b) {
      return key_of(graph_.task(a), a) < key_of(graph_.task(b), b);
    });
}

bool Dispatcher::locality_mode() const {
  return cfg_.policy == Policy::BlockLocality ||
         cfg_.policy == Policy::GuidedColumnLocality;
}

void Dispatcher::seed_ready() {
  for (int id : graph_.initial_ready()) route(id);
}

void Dispatcher::push_ready(int id) { route(id); }

void Dispatcher::route(int id) {
  const dag::Task& t = graph_.task(id);
  if (t.section == dag::Section::Static) return;  // waits in its owner's program
  if (!locality_mode()) {
    global_.insert(key_of(t, id));
    return;
  }
  auto [bi, bj] = t.writes();
  const int lt = last_toucher_[std::size_t(bi) * toucher_stride_ + bj];
  if (lt < 0) {
    global_.insert(key_of(t, id));
  } else {
    local_[lt].insert(key_of(t, id));
    arrival_[lt].push_back(id);
    in_local_[id] = 1;
    evict_overflow(lt);
  }
}

void Dispatcher::evict_overflow(int w) {
  while (local_[w].size() > local_cap_) {
    int victim = -1;
    while (!arrival_[w].empty()) {
      const int id = arrival_[w].front();
      arrival_[w].pop_front();
      if (in_local_[id]) {
        victim = id;
        break;
      }
    }
    if (victim < 0) return;
    local_[w].erase(key_of(graph_.task(victim), victim));
    in_local_[victim] = 0;
    global_.insert(key_of(graph_.task(victim), victim));
  }
}

void Dispatcher::note_write(int w, int block_i, int block_j) {
  const std::size_t idx = std::size_t(block_i) * toucher_stride_ + block_j;
  if (idx < last_toucher_.size()) last_toucher_[idx] = w;
}

void Dispatcher::issue(int id) {
  ++issued_;
  if (graph_.task(id).section == dag::Section::Dynamic) ++dynamic_issued_;
}

std::vector<int> Dispatcher::acquire(int w) {
  return locality_mode() ? acquire_locality(w) : acquire_static(w);
}

std::vector<int> Dispatcher::acquire_static(int w) {
  auto& prog = static_prog_[w];
  auto& head = static_head_[w];
  if (head < prog.size() && graph_.executable(prog[head])) {
    std::vector<int> batch{prog[head]};
    issue(prog[head]);
    ++head;
    const dag::Task& first = graph_.task(batch.front());
    if (first.kind == dag::Kind::S) {
      while (head < prog.size() && int(batch.size()) < cfg_.group) {
        const int id = prog[head];
        const dag::Task& t = graph_.task(id);
        if (t.kind != dag::Kind::S || t.k != first.k || t.j != first.j ||
            !graph_.executable(id))
          break;
        batch.push_back(id);
        issue(id);
        ++head;
      }
    }
    return batch;
  }
  if (!global_.empty()) {
    const int id = global_.begin()->id;
    global_.erase(global_.begin());
    issue(id);
    return {id};
  }
  return {};
}

std::optional<TaskKey> Dispatcher::take_focused(std::set<TaskKey>& q, int col) {
  auto it = q.lower_bound(column_floor(col));
  if (it == q.end() || it->col != col) return std::nullopt;
  TaskKey k = *it;
  q.erase(it);
  return k;
}

std::vector<int> Dispatcher::acquire_locality(int w) {
  auto finish = [&](TaskKey k, bool from_local, bool stolen) {
    if (from_local) in_local_[k.id] = 0;
    if (stolen) ++steals_;
    issue(k.id);
    focus_[w] = graph_.task(k.id).col();
    return std::vector<int>{k.id};
  };

  if (cfg_.policy == Policy::GuidedColumnLocality && focus_[w] >= 0) {
    const int col = focus_[w];
    if (auto k = take_focused(local_[w], col)) return finish(*k, true, false);
    if (auto k = take_focused(global_, col)) return finish(*k, false, false);
    for (int off = 1; off < workers_; ++off) {
      const int v = (w + off) % workers_;
      if (auto k = take_focused(local_[v], col)) return finish(*k, true, true);
    }
  }
  if (!local_[w].empty()) {
    TaskKey k = *local_[w].begin();
    local_[w].erase(local_[w].begin());
    return finish(k, true, false);
  }
  if (!global_.empty()) {
    TaskKey k = *global_.begin();
    global_.erase(global_.begin());
    return finish(k, false, false);
  }
  for (int off = 1; off < workers_; ++off) {
    const int v = (w + off) % workers_;
    if (!local_[v].empty()) {
      TaskKey k = *local_[v].begin();
      local_[v].erase(local_[v].begin());
      return finish(k, true, true);
    }
  }
  return {};
}

dag::TaskGraph build_graph(const Partition& part, const SchedulerConfig& cfg) {
  return dag::TaskGraph::build(part, n_static_for(cfg.policy, part.N, cfg.d_ratio));
}

CostFn default_costs(const Partition& part, ThreadGrid grid, int tree_width) {
  return [part, grid, tree_width](const dag::Task& t) -> double {
    if (t.kind != dag::Kind::P) return 1.0;
    const int rows = part.m - part.row0(t.k);
    const int piv = std::min(rows, part.block_cols(t.k));
    const int req = tree_width > 0 ? tree_width : tslu::default_tree_width(part, grid, t.k);
    return 1.0 + tslu::ReductionTree::shape(rows, piv, req).depth();
  };
}

namespace {

/// Numerical side of one factorization: the task bodies and the final left
/// swap pass. Shared data races are excluded by the task graph; pivot state
/// of step K is written by P(K) before any reader is released.
class Engine {
 public:
  Engine(LayoutMatrix& a, ThreadGrid grid, int tree_width, int cutoff)
      : a_(a), part_(a.part()), grid_(grid), tree_width_(tree_width), cutoff_(cutoff) {
    step_perm_.resize(part_.steps() + 1);
    npiv_.assign(part_.steps() + 1, 0);
    panel_full_.assign(part_.steps() + 1, 0);
    global_perm_ = PermutationVector::identity(part_.m);
  }

  void run(const dag::Task& t) {
    switch (t.kind) {
      case dag::Kind::P: run_p(t.k); break;
      case dag::Kind::L: run_l(t.k, t.i); break;
      case dag::Kind::U: run_u(t.k, t.j); break;
      case dag::Kind::S: run_s(t.k, t.i, t.j); break;
    }
  }

  void finish() {
    for (int k = 2; k <= part_.steps(); ++k)
      kernels::apply_swaps(a_, step_perm_[k], part_.row0(k), 0, part_.col0(k),
                           kernels::SwapSide::Left);
  }

  const PermutationVector& row_perm() const { return global_perm_; }

 private:
  ConstTileView head_u(int k) const {
    ConstTileView d = a_.tile(k, k);
    return {d.data, d.ld, npiv_[k], npiv_[k]};
  }

  void run_p(int k) {
    const int rows = part_.m - part_.row0(k);
    const int c = part_.block_cols(k);
    const int npiv = std::min(rows, c);
    std::vector<double> buf(std::size_t(rows) * c);
    for (int jc = 0; jc < c; ++jc)
      copy_column(a_, part_.col0(k) + jc, part_.row0(k), rows, buf.data() + std::size_t(jc) * rows);

    try {
      const int req =
          tree_width_ > 0 ? tree_width_ : tslu::default_tree_width(part_, grid_, k);
      TileView panel{buf.data(), rows, rows, c};
      PermutationVector perm;
      if (tslu::effective_tree_width(rows, npiv, req) == 1) {
        // Degenerate tree: the panel factorization covers the whole column,
        // the per-block solve tasks have nothing left to do.
        perm = kernels::gepp(panel, cutoff_);
        panel_full_[k] = 1;
      } else {
        const std::vector<int> piv = tslu::tournament_pivots(panel, req, cutoff_);
        std::vector<char> won(rows, 0);
        std::vector<int> pos(piv.begin(), piv.end());
        for (int r : piv) won[r] = 1;
        for (int r = 0; r < rows; ++r)
          if (!won[r]) pos.push_back(r);
        perm = PermutationVector(std::move(pos));

        std::vector<double> tmp(rows);
        for (int jc = 0; jc < c; ++jc) {
          double* col = buf.data() + std::size_t(jc) * rows;
          for (int r = 0; r < rows; ++r) tmp[r] = col[perm[r]];
          std::copy(tmp.begin(), tmp.end(), col);
        }

        tslu::factor_head({buf.data(), rows, npiv, c}, npiv);
        const int tile_rows = std::min(part_.block_rows(k), rows);
        if (tile_rows > npiv)
          kernels::compute_l({buf.data() + npiv, rows, tile_rows - npiv, npiv},
                             {buf.data(), rows, npiv, npiv});
      }

      for (int jc = 0; jc < c; ++jc)
        write_column(a_, part_.col0(k) + jc, part_.row0(k), rows,
                     buf.data() + std::size_t(jc) * rows);
      step_perm_[k] = std::move(perm);
      npiv_[k] = npiv;
      global_perm_.compose_tail(step_perm_[k], part_.row0(k));
    } catch (const Error& e) {
      throw SingularMatrixError(k, e.what());
    }
  }

  void run_l(int k, int i) {
    if (panel_full_[k]) return;  // done by the panel task
    TileView t = a_.tile(i, k);
    try {
      kernels::compute_l(t, head_u(k));
    } catch (const Error& e) {
      throw SingularMatrixError(k, e.what());
    }
  }

  void run_u(int k, int j) {
    kernels::apply_swaps(a_, step_perm_[k], part_.row0(k), part_.col0(j),
                         part_.col0(j) + part_.block_cols(j), kernels::SwapSide::Right);
    TileView t = a_.tile(k, j);
    ConstTileView head = a_.tile(k, k);
    kernels::compute_u({head.data, head.ld, npiv_[k], npiv_[k]},
                       {t.data, t.ld, npiv_[k], t.cols});
  }

  void run_s(int k, int i, int j) {
    TileView t = a_.tile(i, j);
    ConstTileView l = a_.tile(i, k);
    ConstTileView u = a_.tile(k, j);
    kernels::update(t, {l.data, l.ld, l.rows, npiv_[k]}, {u.data, u.ld, npiv_[k], u.cols});
  }

  LayoutMatrix& a_;
  Partition part_;
  ThreadGrid grid_;
  int tree_width_;
  int cutoff_;
  std::vector<PermutationVector> step_perm_;
  std::vector<int> npiv_;
  std::vector<char> panel_full_;
  PermutationVector global_perm_;
};

}  // namespace

RunReport factor(LayoutMatrix& a, const SchedulerConfig& cfg) {
  cfg.validate();
  const ThreadGrid grid = cfg.resolved_grid();
  dag::TaskGraph g = build_graph(a.part(), cfg);
  Dispatcher disp(g, cfg, grid);
  disp.seed_ready();
  Engine eng(a, grid, cfg.tree_width, cfg.cutoff);

  std::mutex mu;
  std::condition_variable cv;
  bool abort = false;
  std::exception_ptr err;
  std::vector<std::vector<trace::TraceEvent>> per_worker(cfg.workers);

  const auto t0 = std::chrono::steady_clock::now();
  auto now_ns = [&t0] {
    return double(std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count());
  };

  omp_set_dynamic(0);
#pragma omp parallel num_threads(cfg.workers)
  {
    const int w = omp_get_thread_num();
    std::unique_lock<std::mutex> lk(mu);
    if (omp_get_num_threads() != cfg.workers && !abort) {
      abort = true;
      err = std::make_exception_ptr(
          Error("could not start the requested number of workers"));
      cv.notify_all();
    }
    if (!abort && w < int(cfg.noise.deltas.size()) && cfg.noise.deltas[w] > 0) {
      lk.unlock();
      std::this_thread::sleep_for(
          std::chrono::duration<double, std::milli>(cfg.noise.deltas[w]));
      lk.lock();
    }
    while (!abort && !disp.all_issued()) {
      std::vector<int> batch = disp.acquire(w);
      if (batch.empty()) {
        cv.wait(lk);
        continue;
      }
      lk.unlock();
      std::vector<trace::TraceEvent> evs;
      evs.reserve(batch.size());
      bool failed = false;
      try {
        for (int id : batch) {
          const dag::Task& t = g.task(id);
          const double s = now_ns();
          eng.run(t);
          evs.push_back({w, t.kind, t.k, t.i, t.j, t.section, s, now_ns()});
        }
      } catch (...) {
        failed = true;
        lk.lock();
        if (!err) err = std::current_exception();
        abort = true;
        cv.notify_all();
      }
      if (failed) break;
      lk.lock();
      try {
        for (int id : batch) {
          const auto [bi, bj] = g.task(id).writes();
          disp.note_write(w, bi, bj);
          for (int r : g.mark_done(id)) disp.push_ready(r);
        }
      } catch (...) {
        if (!err) err = std::current_exception();
        abort = true;
      }
      per_worker[w].insert(per_worker[w].end(), evs.begin(), evs.end());
      cv.notify_all();
    }
    cv.notify_all();
  }
  if (err) std::rethrow_exception(err);

  eng.finish();

  RunReport rep;
  rep.timeline.workers = cfg.workers;
  rep.timeline.unit = trace::TimeUnit::Nanoseconds;
  for (auto& v : per_worker)
    rep.timeline.events.insert(rep.timeline.events.end(), v.begin(), v.end());
  std::sort(rep.timeline.events.begin(), rep.timeline.events.end(),
            [](const trace::TraceEvent& x, const trace::TraceEvent& y) {
              if (x.worker != y.worker) return x.worker < y.worker;
              return x.t_start < y.t_start;
            });
  for (const auto& e : rep.timeline.events) rep.makespan = std::max(rep.makespan, e.t_end);
  rep.timeline.makespan = rep.makespan;
  rep.tasks = g.size();
  rep.dynamic_issued = disp.dynamic_issued();
  rep.steals = disp.steals();
  rep.row_perm = eng.row_perm();
  return rep;
}

}  // namespace calu::sched

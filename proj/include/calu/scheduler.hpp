#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "calu/dag.hpp"
#include "calu/kernels.hpp"
#include "calu/layout.hpp"
#include "calu/model.hpp"
#include "calu/partition.hpp"
#include "calu/permutation.hpp"
#include "calu/trace.hpp"

namespace calu::sched {

enum class Policy {
  Static,               // every task bound to the owner of the block it writes
  Dynamic,              // one shared ready queue
  Hybrid,               // leading columns static, trailing columns dynamic
  BlockLocality,        // dynamic, ready tasks routed to the last toucher
  GuidedColumnLocality  // block locality plus a per-worker column focus
};

const char* to_string(Policy p);
Policy parse_policy(std::string_view s);

/// Columns scheduled statically for a dynamic ratio d: floor(N * (1 - d)),
/// clamped to [0, N].
int n_static_panels(int columns, double d_ratio);
/// Same, resolved per policy (Static pins everything, the dynamic and
/// locality policies nothing).
int n_static_for(Policy policy, int columns, double d_ratio);

struct SchedulerConfig {
  int workers = 1;
  Policy policy = Policy::Hybrid;
  double d_ratio = 0.1;
  int group = 3;       // max update tasks taken per static acquisition
  int tree_width = 0;  // panel reduction width; 0 = one leaf per owner row
  int cutoff = kernels::kDefaultCutoff;
  std::optional<ThreadGrid> grid;  // default: squarest grid for `workers`
  model::NoiseProfile noise;  // start delays: virtual ticks simulated, ms real

  ThreadGrid resolved_grid() const;
  void validate() const;
};

struct RunReport {
  trace::Timeline timeline;
  double makespan = 0;
  int tasks = 0;
  int dynamic_issued = 0;  // tasks run out of the dynamic section
  int steals = 0;
  PermutationVector row_perm;  // factor() only
};

/// Acquisition priority of ready tasks: leftmost column first, then oldest
/// step; within a step the swap+solve row precedes the updates, the panel
/// and its column solves come last.
struct TaskKey {
  int col = 0, step = 0, rank = 0, i = 0, id = 0;
  friend auto operator<=>(const TaskKey&, const TaskKey&) = default;
};
TaskKey key_of(const dag::Task& t, int id);

/// Work assignment shared by the parallel and the simulated executor: static
/// per-worker programs executed in order, a priority-ordered shared queue,
/// and per-worker locality queues with stealing for the locality policies.
/// Not thread-safe; callers serialize access.
class Dispatcher {
 public:
  Dispatcher(dag::TaskGraph& g, const SchedulerConfig& cfg, ThreadGrid grid);

  /// Routes every initially ready task.
  void seed_ready();
  /// Routes a task that just became ready.
  void push_ready(int id);
  /// Records which worker last wrote a block (locality routing).
  void note_write(int w, int block_i, int block_j);

  /// Next batch for worker w, best first; empty when nothing is available
  /// right now. Size exceeds one only for consecutive static updates of one
  /// column, capped by the group size.
  std::vector<int> acquire(int w);

  bool all_issued() const { return issued_ == graph_.size(); }
  int issued() const { return issued_; }
  int dynamic_issued() const { return dynamic_issued_; }
  int steals() const { return steals_; }

 private:
  bool locality_mode() const;
  std::vector<int> acquire_static(int w);
  std::vector<int> acquire_locality(int w);
  void route(int id);
  void evict_overflow(int w);
  std::optional<TaskKey> take_focused(std::set<TaskKey>& q, int col);
  void issue(int id);

  dag::TaskGraph& graph_;
  SchedulerConfig cfg_;
  ThreadGrid grid_;
  int workers_ = 1;

  std::vector<std::vector<int>> static_prog_;  // per worker, TaskKey order
  std::vector<size_t> static_head_;
  std::set<TaskKey> global_;
  std::vector<std::set<TaskKey>> local_;
  std::vector<std::deque<int>> arrival_;  // FIFO eviction order
  std::vector<char> in_local_;            // by task id
  std::vector<int> last_toucher_;         // by block, -1 = untouched
  std::size_t toucher_stride_ = 1;
  std::vector<int> focus_;                // per worker column, -1 = none
  size_t local_cap_ = 0;
  int issued_ = 0, dynamic_issued_ = 0, steals_ = 0;
};

/// Task graph of a factorization under the configured policy (section split
/// by column).
dag::TaskGraph build_graph(const Partition& part, const SchedulerConfig& cfg);

using CostFn = std::function<double(const dag::Task&)>;

/// Unit cost for solves and updates; a panel costs one tick per reduction
/// level plus one.
CostFn default_costs(const Partition& part, ThreadGrid grid, int tree_width);

/// Parallel in-place factorization (packed L\U tiles). Returns the row
/// permutation and the execution trace (nanosecond timestamps). Throws
/// SingularMatrixError when a panel has no usable pivot.
RunReport factor(LayoutMatrix& a, const SchedulerConfig& cfg);

/// Deterministic virtual-time execution of a task graph. Worker w becomes
/// available at noise.deltas[w] (zero when absent); at every completion
/// event, free workers are served in id order. The graph's run state is
/// consumed (reset first).
RunReport simulate(dag::TaskGraph& g, const SchedulerConfig& cfg, const CostFn& cost);

}  // namespace calu::sched

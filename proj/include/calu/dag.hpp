#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "calu/partition.hpp"

namespace calu::dag {

/// Task kinds of the factorization.
///   P(K)     panel K: tournament pivoting, row placement, diagonal block
///   L(K,I)   block (I,K) of the panel's lower factor
///   U(K,J)   right swap of block column J at step K plus the U block solve
///   S(K,I,J) trailing update of block (I,J) by step K
enum class Kind : std::uint8_t { P, L, U, S };

enum class Section : std::uint8_t { Static, Dynamic };

struct Task {
  Kind kind = Kind::P;
  int k = 0;  // panel step
  int i = 0;  // block row (L, S)
  int j = 0;  // block column (U, S)
  Section section = Section::Static;

  /// Column the task belongs to for scheduling purposes.
  int col() const { return kind == Kind::P || kind == Kind::L ? k : j; }
  /// Block written by the task.
  std::pair<int, int> writes() const {
    switch (kind) {
      case Kind::P: return {k, k};
      case Kind::L: return {i, k};
      case Kind::U: return {k, j};
      case Kind::S: return {i, j};
    }
    return {0, 0};
  }
};

std::string name_of(const Task& t);  // e.g. "S(1,2,4)"

/// Dependency graph over the block tasks of one factorization.
///
/// Edges (derived from block read/write footprints in the serial order):
///   P(K) -> L(K,I), U(K,J)
///   S(K-1,I,J) -> U(K,J) for all I   (column J must be fully updated
///                                     before step K swaps its rows)
///   L(K,I), U(K,J), S(K-1,I,J) -> S(K,I,J)
///   S(K-1,I,K) -> P(K) for all I
///
/// Construction orders tasks topologically and verifies acyclicity.
class TaskGraph {
 public:
  static TaskGraph build(const Partition& part, int n_static);
  /// Arbitrary graph (used for synthetic scheduling workloads). Edges are
  /// (pred, succ) index pairs into `tasks`.
  static TaskGraph custom(std::vector<Task> tasks,
                          const std::vector<std::pair<int, int>>& edges, int columns);

  int size() const { return int(tasks_.size()); }
  const Task& task(int id) const { return tasks_[id]; }
  std::span<const int> preds(int id) const;
  std::span<const int> succs(int id) const;
  int find(Kind kind, int k, int i, int j) const;  // -1 when absent

  int n_static() const { return n_static_; }
  int columns() const { return columns_; }
  int remaining() const { return remaining_.load(std::memory_order_relaxed); }
  bool done(int id) const { return done_[id].load(std::memory_order_acquire) != 0; }
  bool executable(int id) const;

  /// Marks a task finished and returns the tasks that became ready. Throws
  /// DependencyViolation if the task already ran or has unfinished
  /// predecessors. Safe to call concurrently for distinct tasks.
  std::vector<int> mark_done(int id);

  /// Tasks with no predecessors (the initial ready set).
  std::vector<int> initial_ready() const;

  /// Restores the not-yet-run state (used to replay a trace).
  void reset();

  TaskGraph(TaskGraph&& o) noexcept
      : tasks_(std::move(o.tasks_)),
        preds_list_(std::move(o.preds_list_)),
        succs_list_(std::move(o.succs_list_)),
        pending_(std::move(o.pending_)),
        done_(std::move(o.done_)),
        remaining_(o.remaining_.load()),
        index_(std::move(o.index_)),
        n_static_(o.n_static_),
        columns_(o.columns_) {}
  TaskGraph& operator=(TaskGraph&&) = delete;

 private:
  TaskGraph() = default;
  void finalize();  // build succs/pred counts, check acyclicity

  std::vector<Task> tasks_;
  std::vector<std::vector<int>> preds_list_, succs_list_;
  std::unique_ptr<std::atomic<int>[]> pending_;
  std::unique_ptr<std::atomic<std::uint8_t>[]> done_;
  std::atomic<int> remaining_{0};
  std::unordered_map<std::uint64_t, int> index_;
  int n_static_ = 0;
  int columns_ = 0;
};

/// Longest chain of tasks within one section (unit weights), ties broken by
/// lexicographic (K, J, I). Empty when the section has no tasks.
std::vector<int> critical_path(const TaskGraph& g, Section section);

void write_dot(const TaskGraph& g, std::ostream& os);

}  // namespace calu::dag

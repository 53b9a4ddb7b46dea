#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "calu/dag.hpp"

namespace calu::trace {

enum class TimeUnit { Ticks, Nanoseconds };

struct TraceEvent {
  int worker = 0;
  dag::Kind kind = dag::Kind::P;
  int k = 0, i = 0, j = 0;
  dag::Section section = dag::Section::Static;
  double t_start = 0;
  double t_end = 0;

  bool operator==(const TraceEvent&) const = default;
};

struct Timeline {
  int workers = 0;
  TimeUnit unit = TimeUnit::Ticks;
  double makespan = 0;
  std::vector<TraceEvent> events;  // sorted by (worker, t_start)
};

struct IdleStats {
  std::vector<double> idle_fraction;  // per worker
  double idle_max = 0;
  double idle_avg = 0;
  /// Fraction of the makespan after which 90% of workers have finished
  /// their last task.
  double t90_fraction = 0;
};

/// Throws std::invalid_argument on an empty trace.
IdleStats idle_stats(const Timeline& t);

struct Violation {
  std::string what;
  int event_index = -1;
};

struct ValidationResult {
  bool ok = true;
  std::optional<Violation> violation;
};

/// Replays the events through the graph: every task exactly once, no task
/// starting before its predecessors finished, per-worker events
/// non-overlapping. The graph's run state is consumed (it is reset first).
ValidationResult validate(const Timeline& t, dag::TaskGraph& g);

/// Chrome trace event format: one complete ("X") event per task, pid 0,
/// tid = worker, cat = task kind, timestamps in microseconds.
void export_chrome(const Timeline& t, std::ostream& os);
Timeline import_chrome(std::istream& is);

/// Gantt chart, one lane per worker. Panels red, updates green, solves
/// amber/pink; dynamic-section tasks in a lighter shade. Rects carry data
/// attributes so the chart can be parsed back.
void export_svg(const Timeline& t, std::ostream& os);
std::vector<TraceEvent> parse_svg_events(std::istream& is);

}  // namespace calu::trace

#pragma once

#include <vector>

namespace calu::model {

/// Per-core excess work over one run (same time unit as the cost model).
struct NoiseProfile {
  std::vector<double> deltas;

  void validate() const;
  double max_delta() const;
  double sum() const;
  /// Average over p cores; missing entries count as zero.
  double avg_delta(int p) const;
};

/// Inputs of the static-fraction bound. t1 is the total work; the three
/// overhead terms extend the per-core denominator t_p.
struct CostModel {
  double t1 = 0;
  int p = 1;
  double t_critical_path = 0;
  double t_migration = 0;
  double t_overhead = 0;

  void validate() const;
  double t_p() const { return t1 / p + t_critical_path + t_migration + t_overhead; }
};

/// Ideal time with perfectly balanced excess work: (T1 + sum(deltas)) / p.
double t_ideal(const CostModel& c, const NoiseProfile& n);

/// Worst-case time when a fraction f_s of the work is bound to its owner:
/// f_s * T1 / p + max(deltas).
double t_actual(const CostModel& c, const NoiseProfile& n, double f_s);

struct StaticBound {
  double f_s_max = 1.0;  // clamped to [0, 1]
  bool clamped = false;
};

/// Largest static fraction that still hides the imbalance:
/// f_s <= 1 - (max(delta) - avg(delta)) / t_p.
StaticBound max_static_fraction(const CostModel& c, const NoiseProfile& n);

}  // namespace calu::model

#include "calu/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace calu::model {

void NoiseProfile::validate() const {
  for (double d : deltas)
    if (d < 0) throw std::invalid_argument("noise: deltas must be non-negative");
}

double NoiseProfile::max_delta() const {
  double m = 0;
  for (double d : deltas) m = std::max(m, d);
  return m;
}

double NoiseProfile::sum() const {
  double s = 0;
  for (double d : deltas) s += d;
  return s;
}

double NoiseProfile::avg_delta(int p) const {
  if (p < 1) throw std::invalid_argument("noise: p must be positive");
  return sum() / p;
}

void CostModel::validate() const {
  if (t1 <= 0) throw std::invalid_argument("model: t1 must be positive");
  if (p < 1) throw std::invalid_argument("model: p must be positive");
  if (t_critical_path < 0 || t_migration < 0 || t_overhead < 0)
    throw std::invalid_argument("model: overhead terms must be non-negative");
}

double t_ideal(const CostModel& c, const NoiseProfile& n) {
  c.validate();
  n.validate();
  return (c.t1 + n.sum()) / c.p;
}

double t_actual(const CostModel& c, const NoiseProfile& n, double f_s) {
  c.validate();
  n.validate();
  if (f_s < 0 || f_s > 1) throw std::invalid_argument("model: f_s must lie in [0, 1]");
  return f_s * c.t1 / c.p + n.max_delta();
}

StaticBound max_static_fraction(const CostModel& c, const NoiseProfile& n) {
  c.validate();
  n.validate();
  const double raw = 1.0 - (n.max_delta() - n.avg_delta(c.p)) / c.t_p();
  StaticBound b;
  b.f_s_max = std::clamp(raw, 0.0, 1.0);
  b.clamped = raw != b.f_s_max;
  return b;
}

}  // namespace calu::model

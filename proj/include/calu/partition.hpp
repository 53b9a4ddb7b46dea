#pragma once

#include <cmath>
#include <stdexcept>

namespace calu {

/// Block decomposition of an m x n matrix into b x b tiles.
///
/// Block indices are 1-based: I in 1..M, J in 1..N. The last block row and
/// block column may be smaller than b when b does not divide m or n; all
/// other tiles are full.
struct Partition {
  int m = 0;
  int n = 0;
  int b = 1;
  int M = 0;  // ceil(m/b)
  int N = 0;  // ceil(n/b)

  int block_rows(int I) const { return I < M ? b : m - (M - 1) * b; }
  int block_cols(int J) const { return J < N ? b : n - (N - 1) * b; }
  int row0(int I) const { return (I - 1) * b; }  // 0-based first row of block row I
  int col0(int J) const { return (J - 1) * b; }
  int steps() const { return M < N ? M : N; }  // number of panels
  bool operator==(const Partition&) const = default;
};

inline Partition make_partition(int m, int n, int b) {
  if (m <= 0 || n <= 0 || b <= 0)
    throw std::invalid_argument("partition: m, n, b must be positive");
  if (b > m || b > n)
    throw std::invalid_argument("partition: block size exceeds min(m, n)");
  Partition p;
  p.m = m;
  p.n = n;
  p.b = b;
  p.M = (m + b - 1) / b;
  p.N = (n + b - 1) / b;
  return p;
}

/// Pr x Pc worker grid used for 2D block-cyclic ownership.
struct ThreadGrid {
  int pr = 1;
  int pc = 1;
  int workers() const { return pr * pc; }
  bool operator==(const ThreadGrid&) const = default;
};

/// Squarest grid for a worker count: Pr is the largest divisor of p with
/// Pr <= sqrt(p), Pc = p / Pr.
inline ThreadGrid default_grid(int workers) {
  if (workers <= 0) throw std::invalid_argument("grid: worker count must be positive");
  int pr = 1;
  for (int d = 1; d * d <= workers; ++d)
    if (workers % d == 0) pr = d;
  return ThreadGrid{pr, workers / pr};
}

/// Cyclic owner of block (I, J): ((I-1) mod Pr) * Pc + ((J-1) mod Pc).
/// Workers are numbered 0..Pr*Pc-1, row major over the grid.
inline int owner(int I, int J, ThreadGrid g) {
  if (I < 1 || J < 1) throw std::out_of_range("owner: block indices are 1-based");
  return ((I - 1) % g.pr) * g.pc + (J - 1) % g.pc;
}

}  // namespace calu

#include "calu/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace calu::kernels {

namespace {

TileView sub(TileView a, int r0, int c0, int rows, int cols) {
  return {a.data + r0 + std::size_t(c0) * a.ld, a.ld, rows, cols};
}

// C -= A*B in i-j-l order. A is staged row major so the inner dot product is
// stride-1 on both sides; the accumulation order per element is unchanged.
void gemm_minus(TileView c, ConstTileView a, ConstTileView b) {
  const int m = c.rows, n = c.cols, k = a.cols;
  thread_local std::vector<double> stage;
  stage.resize(std::size_t(m) * k);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < k; ++l) stage[std::size_t(i) * k + l] = a.at(i, l);
  for (int i = 0; i < m; ++i) {
    const double* arow = stage.data() + std::size_t(i) * k;
    for (int j = 0; j < n; ++j) {
      const double* bcol = b.data + std::size_t(j) * b.ld;
      double acc = 0.0;
      for (int l = 0; l < k; ++l) acc += arow[l] * bcol[l];
      c.at(i, j) -= acc;
    }
  }
}

struct Eliminator {
  TileView a;
  int cutoff;
  std::vector<double> scale;      // per-column magnitude at entry
  std::vector<int> swap_with;

  void base(int j0, int w) {
    const double eps = std::numeric_limits<double>::epsilon();
    for (int j = j0; j < j0 + w; ++j) {
      int p = j;
      double best = std::fabs(a.at(j, j));
      for (int i = j + 1; i < a.rows; ++i) {
        const double v = std::fabs(a.at(i, j));
        if (v > best) {  // strict: ties keep the lowest row index
          best = v;
          p = i;
        }
      }
      if (scale[j] == 0.0 || best < kPivotTolFactor * eps * scale[j])
        throw SingularPanelError(j);
      swap_with[j] = p;
      if (p != j)
        for (int col = 0; col < a.cols; ++col) std::swap(a.at(j, col), a.at(p, col));
      const double piv = a.at(j, j);
      for (int i = j + 1; i < a.rows; ++i) a.at(i, j) /= piv;
      for (int col = j + 1; col < j0 + w; ++col) {
        const double u = a.at(j, col);
        for (int i = j + 1; i < a.rows; ++i) a.at(i, col) -= a.at(i, j) * u;
      }
    }
  }

  void rec(int j0, int w) {
    if (w <= cutoff) {
      base(j0, w);
      return;
    }
    const int h = w / 2;
    rec(j0, h);
    TileView a12 = sub(a, j0, j0 + h, h, w - h);
    compute_u(sub(a, j0, j0, h, h), a12);
    gemm_minus(sub(a, j0 + h, j0 + h, a.rows - (j0 + h), w - h),
               sub(a, j0 + h, j0, a.rows - (j0 + h), h), a12);
    rec(j0 + h, w - h);
  }
};

}  // namespace

PermutationVector gepp(TileView a, int cutoff) {
  if (a.rows < 1 || a.cols < 1) throw std::invalid_argument("gepp: empty panel");
  if (cutoff < 1) throw std::invalid_argument("gepp: cutoff must be >= 1");
  const int steps = std::min(a.rows, a.cols);
  Eliminator e{a, cutoff, std::vector<double>(a.cols, 0.0), std::vector<int>(steps, 0)};
  for (int j = 0; j < a.cols; ++j)
    for (int i = 0; i < a.rows; ++i) e.scale[j] = std::max(e.scale[j], std::fabs(a.at(i, j)));
  e.rec(0, steps);
  if (a.cols > steps)  // wide panel: finish the remaining U columns
    compute_u(sub(a, 0, 0, steps, steps), sub(a, 0, steps, steps, a.cols - steps));
  PermutationVector perm = PermutationVector::identity(a.rows);
  for (int j = 0; j < steps; ++j) std::swap(perm.pos[j], perm.pos[e.swap_with[j]]);
  return perm;
}

void compute_u(ConstTileView l_packed, TileView x) {
  if (l_packed.rows != l_packed.cols || l_packed.rows != x.rows)
    throw std::invalid_argument("compute_u: shape mismatch");
  for (int j = 0; j < x.cols; ++j) {
    double* xcol = x.data + std::size_t(j) * x.ld;
    for (int i = 0; i < x.rows; ++i) {
      double acc = xcol[i];
      for (int l = 0; l < i; ++l) acc -= l_packed.at(i, l) * xcol[l];
      xcol[i] = acc;
    }
  }
}

void compute_l(TileView a, ConstTileView u) {
  if (u.rows != u.cols || u.rows != a.cols)
    throw std::invalid_argument("compute_l: shape mismatch");
  for (int j = 0; j < a.cols; ++j) {
    const double piv = u.at(j, j);
    if (piv == 0.0) throw SingularFactorError(j);
    for (int i = 0; i < a.rows; ++i) {
      double acc = a.at(i, j);
      for (int l = 0; l < j; ++l) acc -= a.at(i, l) * u.at(l, j);
      a.at(i, j) = acc / piv;
    }
  }
}

void update(TileView a, ConstTileView l, ConstTileView u) {
  if (l.rows != a.rows || l.cols != u.rows || u.cols != a.cols)
    throw std::invalid_argument("update: shape mismatch");
  gemm_minus(a, l, u);
}

void update_group(std::span<TileView> a, std::span<const ConstTileView> l, ConstTileView u) {
  if (a.size() != l.size()) throw std::invalid_argument("update_group: tile count mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) update(a[i], l[i], u);
}

void apply_swaps(LayoutMatrix& mat, const PermutationVector& perm, int row0, int col_begin,
                 int col_end, SwapSide side) {
  (void)side;  // semantic tag only; both directions move rows the same way
  const int len = perm.size();
  const Partition& p = mat.part();
  if (row0 < 0 || row0 + len > p.m) throw std::out_of_range("apply_swaps: row range");
  if (col_begin < 0 || col_end > p.n || col_begin > col_end)
    throw std::out_of_range("apply_swaps: column range");
  perm.validate();
  if (perm.is_identity()) return;
  std::vector<double> buf(len), out(len);
  for (int c = col_begin; c < col_end; ++c) {
    copy_column(mat, c, row0, len, buf.data());
    for (int i = 0; i < len; ++i) out[i] = buf[perm[i]];
    write_column(mat, c, row0, len, out.data());
  }
}

}  // namespace calu::kernels

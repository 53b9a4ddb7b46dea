#include "calu/reference.hpp"

#include <algorithm>
#include <vector>

#include "calu/errors.hpp"
#include "calu/tslu.hpp"

namespace calu::ref {

PermutationVector factor(LayoutMatrix& a, int tree_width, int cutoff, ThreadGrid grid) {
  const Partition& part = a.part();
  PermutationVector global = PermutationVector::identity(part.m);
  std::vector<PermutationVector> step_perm(part.steps() + 1);
  std::vector<int> npiv(part.steps() + 1, 0);

  for (int k = 1; k <= part.steps(); ++k) {
    const int rows = part.m - part.row0(k);
    const int c = part.block_cols(k);
    npiv[k] = std::min(rows, c);

    std::vector<double> buf(std::size_t(rows) * c);
    for (int jc = 0; jc < c; ++jc)
      copy_column(a, part.col0(k) + jc, part.row0(k), rows, buf.data() + std::size_t(jc) * rows);
    const int req = tree_width > 0 ? tree_width : tslu::default_tree_width(part, grid, k);
    try {
      step_perm[k] = tslu::tslu_factor({buf.data(), rows, rows, c}, req, cutoff);
    } catch (const Error& e) {
      throw SingularMatrixError(k, e.what());
    }
    for (int jc = 0; jc < c; ++jc)
      write_column(a, part.col0(k) + jc, part.row0(k), rows, buf.data() + std::size_t(jc) * rows);
    global.compose_tail(step_perm[k], part.row0(k));

    ConstTileView diag = a.tile(k, k);
    ConstTileView head{diag.data, diag.ld, npiv[k], npiv[k]};
    for (int j = k + 1; j <= part.N; ++j) {
      kernels::apply_swaps(a, step_perm[k], part.row0(k), part.col0(j),
                           part.col0(j) + part.block_cols(j), kernels::SwapSide::Right);
      TileView t = a.tile(k, j);
      kernels::compute_u(head, {t.data, t.ld, npiv[k], t.cols});
    }
    for (int j = k + 1; j <= part.N; ++j) {
      ConstTileView u = a.tile(k, j);
      ConstTileView uh{u.data, u.ld, npiv[k], u.cols};
      std::vector<TileView> tiles;
      std::vector<ConstTileView> ls;
      for (int i = k + 1; i <= part.M; ++i) {
        tiles.push_back(a.tile(i, j));
        ConstTileView l = a.tile(i, k);
        ls.push_back({l.data, l.ld, l.rows, npiv[k]});
      }
      kernels::update_group(tiles, ls, uh);
    }
  }
  for (int k = 2; k <= part.steps(); ++k)
    kernels::apply_swaps(a, step_perm[k], part.row0(k), 0, part.col0(k),
                         kernels::SwapSide::Left);
  return global;
}

PermutationVector plain_lu(LayoutMatrix& a, int cutoff) {
  const Partition& part = a.part();
  std::vector<double> cm = a.to_column_major();
  PermutationVector perm;
  try {
    perm = kernels::gepp({cm.data(), part.m, part.m, part.n}, cutoff);
  } catch (const SingularPanelError& e) {
    throw SingularMatrixError(1, e.what());
  }
  a = LayoutMatrix::from_column_major(cm, part, a.kind(), a.grid());
  return perm;
}

}  // namespace calu::ref

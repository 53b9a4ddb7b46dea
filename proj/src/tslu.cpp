#include "calu/tslu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "calu/errors.hpp"

namespace calu::tslu {

int effective_tree_width(int rows, int piv, int requested) {
  if (rows < 1 || piv < 1) throw std::invalid_argument("tree width: bad panel shape");
  const int cap = std::max(1, rows / piv);
  return std::clamp(requested, 1, cap);
}

int default_tree_width(const Partition& part, ThreadGrid grid, int K) {
  if (K < 1 || K > part.steps()) throw std::out_of_range("tree width: bad panel index");
  return std::max(1, std::min(grid.pr, part.M - K + 1));
}

ReductionTree ReductionTree::shape(int rows, int piv, int requested) {
  ReductionTree t;
  t.leaves = effective_tree_width(rows, piv, requested);
  t.chunks.reserve(t.leaves);
  for (int i = 0; i < t.leaves; ++i) {
    const int begin = int(std::int64_t(rows) * i / t.leaves);
    const int end = int(std::int64_t(rows) * (i + 1) / t.leaves);
    t.chunks.emplace_back(begin, end);
  }
  return t;
}

int ReductionTree::depth() const {
  int d = 0;
  for (int n = leaves; n > 1; n = (n + 1) / 2) ++d;
  return d;
}

namespace {

// Copies selected panel rows into a dense column-major buffer.
void gather_rows(ConstTileView panel, const std::vector<int>& rows, std::vector<double>& buf) {
  const int r = int(rows.size()), c = panel.cols;
  buf.resize(std::size_t(r) * c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) buf[i + std::size_t(j) * r] = panel.at(rows[i], j);
}

std::vector<int> winners_of(ConstTileView panel, const std::vector<int>& cand, int npiv,
                            int cutoff, int level, int node) {
  std::vector<double> buf;
  gather_rows(panel, cand, buf);
  TileView v{buf.data(), int(cand.size()), int(cand.size()), panel.cols};
  PermutationVector perm;
  try {
    perm = kernels::gepp(v, cutoff);
  } catch (const SingularPanelError& e) {
    throw Error("tournament node (level " + std::to_string(level) + ", index " +
                std::to_string(node) + ") structurally singular: " + e.what());
  }
  std::vector<int> out(npiv);
  for (int i = 0; i < npiv; ++i) out[i] = cand[perm[i]];
  return out;
}

}  // namespace

std::vector<int> tournament_pivots(ConstTileView panel, int tree_width, int cutoff) {
  const int rows = panel.rows, c = panel.cols;
  const int npiv = std::min(rows, c);
  const ReductionTree tree = ReductionTree::shape(rows, npiv, tree_width);

  std::vector<std::vector<int>> cur;
  cur.reserve(tree.leaves);
  for (int t = 0; t < tree.leaves; ++t) {
    std::vector<int> chunk(tree.chunks[t].second - tree.chunks[t].first);
    std::iota(chunk.begin(), chunk.end(), tree.chunks[t].first);
    cur.push_back(winners_of(panel, chunk, npiv, cutoff, 0, t));
  }
  int level = 1;
  while (cur.size() > 1) {
    std::vector<std::vector<int>> next;
    next.reserve((cur.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < cur.size(); i += 2) {
      std::vector<int> stacked = cur[i];
      stacked.insert(stacked.end(), cur[i + 1].begin(), cur[i + 1].end());
      next.push_back(winners_of(panel, stacked, npiv, cutoff, level, int(i / 2)));
    }
    if (cur.size() % 2) next.push_back(std::move(cur.back()));
    cur = std::move(next);
    ++level;
  }
  return cur[0];
}

void factor_head(TileView head, int steps) {
  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<double> scale(head.cols, 0.0);
  for (int j = 0; j < head.cols; ++j)
    for (int i = 0; i < head.rows; ++i) scale[j] = std::max(scale[j], std::fabs(head.at(i, j)));
  for (int j = 0; j < steps; ++j) {
    const double piv = head.at(j, j);
    if (scale[j] == 0.0 || std::fabs(piv) < kernels::kPivotTolFactor * eps * scale[j])
      throw SingularPanelError(j);
    for (int i = j + 1; i < head.rows; ++i) head.at(i, j) /= piv;
    for (int col = j + 1; col < head.cols; ++col) {
      const double u = head.at(j, col);
      for (int i = j + 1; i < head.rows; ++i) head.at(i, col) -= head.at(i, j) * u;
    }
  }
}

PermutationVector tslu_factor(TileView panel, int tree_width, int cutoff) {
  const int rows = panel.rows, c = panel.cols;
  const int npiv = std::min(rows, c);
  if (effective_tree_width(rows, npiv, tree_width) == 1) return kernels::gepp(panel, cutoff);

  const std::vector<int> piv = tournament_pivots(panel, tree_width, cutoff);
  std::vector<char> won(rows, 0);
  for (int r : piv) won[r] = 1;
  std::vector<int> pos = piv;
  pos.reserve(rows);
  for (int r = 0; r < rows; ++r)  // losers keep ascending original order
    if (!won[r]) pos.push_back(r);
  PermutationVector perm(std::move(pos));

  std::vector<double> col(rows);
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < rows; ++i) col[i] = panel.at(i, j);
    for (int i = 0; i < rows; ++i) panel.at(i, j) = col[perm[i]];
  }

  factor_head(TileView{panel.data, panel.ld, npiv, c}, npiv);
  if (rows > npiv)
    kernels::compute_l(TileView{panel.data + npiv, panel.ld, rows - npiv, npiv},
                       ConstTileView{panel.data, panel.ld, npiv, npiv});
  return perm;
}

}  // namespace calu::tslu

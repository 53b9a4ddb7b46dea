#pragma once

#include <utility>
#include <vector>

#include "calu/kernels.hpp"
#include "calu/layout.hpp"
#include "calu/partition.hpp"
#include "calu/permutation.hpp"

namespace calu::tslu {

/// Shape of the pivot reduction: `leaves` contiguous row chunks merged
/// pairwise level by level (an odd node is promoted unchanged). The shape is
/// a pure function of (rows, pivot count, requested width), so results never
/// depend on which worker runs which node.
struct ReductionTree {
  int leaves = 1;
  std::vector<std::pair<int, int>> chunks;  // [begin, end) row ranges

  static ReductionTree shape(int rows, int piv, int requested);
  int depth() const;  // number of merge levels
};

/// Width capped so every leaf holds at least `piv` rows: min(requested,
/// floor(rows / piv)), at least 1.
int effective_tree_width(int rows, int piv, int requested);

/// Default width for panel K: the number of distinct block-row owners whose
/// blocks intersect the panel.
int default_tree_width(const Partition& part, ThreadGrid grid, int K);

/// Tournament pivot selection. Returns min(rows, cols) original row indices
/// in pivot order. The panel is read only; each tree node factors a copy of
/// its candidate rows and keeps the winners' original values.
std::vector<int> tournament_pivots(ConstTileView panel, int tree_width,
                                   int cutoff = kernels::kDefaultCutoff);

/// Full panel factorization: pivots moved to the top (losers keep their
/// relative order by original index), packed L\U head, L below solved
/// against the head U. With an effective width of 1 this is exactly gepp,
/// permutation and factors alike.
PermutationVector tslu_factor(TileView panel, int tree_width,
                              int cutoff = kernels::kDefaultCutoff);

/// No-pivot elimination of the leading square of a permuted panel (the rows
/// selected by the tournament). Exposed for the factorization engine.
void factor_head(TileView head, int steps);

}  // namespace calu::tslu

#pragma once

#include <span>

#include "calu/errors.hpp"
#include "calu/layout.hpp"
#include "calu/permutation.hpp"

namespace calu::kernels {

/// Width at which the recursive panel factorization switches to the
/// right-looking base case.
inline constexpr int kDefaultCutoff = 8;

/// Relative magnitude below which a pivot counts as zero. The scale is the
/// largest absolute value of the pivot's column at panel entry.
inline constexpr double kPivotTolFactor = 64.0;

/// LU with partial pivoting of an r x c panel, in place (packed L\U, unit
/// diagonal of L implicit). Recursive over column halves down to `cutoff`
/// columns; ties on pivot magnitude pick the lowest row index. Eliminates
/// min(r, c) columns; for r < c the remaining columns of U are solved at the
/// end. Throws SingularPanelError when a pivot falls below tolerance.
PermutationVector gepp(TileView a, int cutoff = kDefaultCutoff);

/// X := L^{-1} X with L the packed unit-lower factor (forward substitution,
/// columns processed left to right).
void compute_u(ConstTileView l_packed, TileView x);

/// A := A U^{-1} with U upper triangular including its diagonal (right-side
/// backward substitution producing L blocks). Throws SingularFactorError on
/// a zero diagonal.
void compute_l(TileView a, ConstTileView u);

/// A -= L * U with a fixed i-j-l loop order (per-element dot product), so
/// results do not depend on tile grouping or schedule.
void update(TileView a, ConstTileView l, ConstTileView u);

/// Grouped form of `update`: one call covering `a.size()` tiles of the same
/// column. Arithmetic is per tile and identical to repeated single calls.
void update_group(std::span<TileView> a, std::span<const ConstTileView> l, ConstTileView u);

enum class SwapSide { Right, Left };

/// Applies a row permutation to columns [col_begin, col_end) of `mat`. The
/// permutation acts on rows row0 .. row0+perm.size()-1. Right swaps reorder
/// the columns right of a panel during factorization; left swaps finish the
/// L region afterwards. Throws std::out_of_range for bad permutation entries
/// or ranges.
void apply_swaps(LayoutMatrix& mat, const PermutationVector& perm, int row0, int col_begin,
                 int col_end, SwapSide side);

}  // namespace calu::kernels

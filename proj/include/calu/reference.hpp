#pragma once

#include "calu/kernels.hpp"
#include "calu/layout.hpp"
#include "calu/permutation.hpp"

namespace calu::ref {

/// Serial factorization, straight loops over block columns: panel, right
/// swaps and solves, grouped trailing updates, deferred left swaps. Uses the
/// same arithmetic building blocks as the parallel engine in the canonical
/// order, so the two agree bit for bit.
PermutationVector factor(LayoutMatrix& a, int tree_width = 0,
                         int cutoff = kernels::kDefaultCutoff,
                         ThreadGrid grid = {1, 1});

/// Unblocked LU with partial pivoting of the whole matrix (growth and
/// residual baseline).
PermutationVector plain_lu(LayoutMatrix& a, int cutoff = kernels::kDefaultCutoff);

}  // namespace calu::ref

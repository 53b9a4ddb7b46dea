#pragma once

#include <span>

#include "calu/layout.hpp"
#include "calu/permutation.hpp"

namespace calu::verify {

/// Relative factorization residual ||P A - L U||_F / ||A||_F for a packed
/// in-place factorization. `a` is the original matrix, column-major.
double residual(std::span<const double> a, const LayoutMatrix& lu,
                const PermutationVector& perm);

/// Element growth max |U| / max |A|.
double growth(std::span<const double> a, const LayoutMatrix& lu);

}  // namespace calu::verify

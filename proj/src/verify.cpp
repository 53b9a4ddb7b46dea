#include "calu/verify.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace calu::verify {

double residual(std::span<const double> a, const LayoutMatrix& lu,
                const PermutationVector& perm) {
  const Partition& p = lu.part();
  const int m = p.m, n = p.n, kmax = std::min(m, n);
  if (int(a.size()) != m * n) throw std::invalid_argument("residual: matrix size");
  if (perm.size() != m) throw std::invalid_argument("residual: permutation size");
  const std::vector<double> f = lu.to_column_major();

  double rr = 0.0, aa = 0.0;
#pragma omp parallel for reduction(+ : rr, aa) schedule(static)
  for (int j = 0; j < n; ++j) {
    std::vector<double> col(m);
    for (int i = 0; i < m; ++i) col[i] = a[std::size_t(perm[i]) + std::size_t(j) * m];
    for (int k = 0; k < std::min(j + 1, kmax); ++k) {
      const double u = f[std::size_t(k) + std::size_t(j) * m];
      col[k] -= u;  // unit diagonal of L
      for (int i = k + 1; i < m; ++i)
        col[i] -= f[std::size_t(i) + std::size_t(k) * m] * u;
    }
    for (int i = 0; i < m; ++i) rr += col[i] * col[i];
    for (int i = 0; i < m; ++i) {
      const double v = a[std::size_t(i) + std::size_t(j) * m];
      aa += v * v;
    }
  }
  return aa > 0 ? std::sqrt(rr) / std::sqrt(aa) : std::sqrt(rr);
}

double growth(std::span<const double> a, const LayoutMatrix& lu) {
  const Partition& p = lu.part();
  const int m = p.m, n = p.n, kmax = std::min(m, n);
  const std::vector<double> f = lu.to_column_major();
  double mu = 0.0, ma = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= std::min(j, kmax - 1); ++i)
      mu = std::max(mu, std::fabs(f[std::size_t(i) + std::size_t(j) * m]));
  for (double v : a) ma = std::max(ma, std::fabs(v));
  return ma > 0 ? mu / ma : mu;
}

}  // namespace calu::verify

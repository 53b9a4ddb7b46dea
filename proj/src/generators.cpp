#include "calu/generators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace calu::gen {

std::uint64_t mix64(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + (k + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double uniform(std::uint64_t seed, std::uint64_t k) {
  return double(mix64(seed, k) >> 11) * 0x1.0p-53;
}

double gaussian(std::uint64_t seed, std::uint64_t k) {
  double s = 0.0;
  for (std::uint64_t t = 0; t < 12; ++t) s += uniform(seed, 12 * k + t);
  return s - 6.0;
}

MatrixFamily parse_family(std::string_view s) {
  if (s == "gaussian") return MatrixFamily::Gaussian;
  if (s == "diagdom") return MatrixFamily::DiagDominant;
  if (s == "identity") return MatrixFamily::Identity;
  throw std::invalid_argument("unknown matrix family '" + std::string(s) + "'");
}

const char* to_string(MatrixFamily f) {
  switch (f) {
    case MatrixFamily::Gaussian: return "gaussian";
    case MatrixFamily::DiagDominant: return "diagdom";
    case MatrixFamily::Identity: return "identity";
  }
  return "?";
}

std::vector<double> generate(MatrixFamily f, int m, int n, std::uint64_t seed) {
  if (m <= 0 || n <= 0) throw std::invalid_argument("generate: bad dimensions");
  std::vector<double> a(std::size_t(m) * n, 0.0);
  switch (f) {
    case MatrixFamily::Identity:
      for (int i = 0; i < std::min(m, n); ++i) a[i + std::size_t(i) * m] = 1.0;
      break;
    case MatrixFamily::Gaussian:
      for (std::size_t k = 0; k < a.size(); ++k) a[k] = gaussian(seed, k);
      break;
    case MatrixFamily::DiagDominant: {
      for (std::size_t k = 0; k < a.size(); ++k) a[k] = gaussian(seed, k);
      for (int i = 0; i < std::min(m, n); ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::fabs(a[i + std::size_t(j) * m]);
        a[i + std::size_t(i) * m] = row + 1.0;
      }
      break;
    }
  }
  return a;
}

}  // namespace calu::gen

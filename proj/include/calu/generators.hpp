#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace calu::gen {

/// Counter-based generator: draw `k` of stream `seed` is a pure function of
/// (seed, k), so matrices are reproducible across platforms and runs.
std::uint64_t mix64(std::uint64_t seed, std::uint64_t k);
/// Uniform in [0, 1).
double uniform(std::uint64_t seed, std::uint64_t k);
/// Approximately standard normal (sum of twelve uniforms, centered). Avoids
/// libm so streams are identical everywhere.
double gaussian(std::uint64_t seed, std::uint64_t k);

enum class MatrixFamily { Gaussian, DiagDominant, Identity };

MatrixFamily parse_family(std::string_view s);  // gaussian | diagdom | identity
const char* to_string(MatrixFamily f);

/// m x n column-major samples. DiagDominant adds the absolute row sum plus
/// one on the diagonal, so panels never go singular.
std::vector<double> generate(MatrixFamily f, int m, int n, std::uint64_t seed);

}  // namespace calu::gen

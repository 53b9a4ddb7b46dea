#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "calu/layout.hpp"
#include "calu/permutation.hpp"

namespace calu::io {

struct DenseMatrix {
  int m = 0, n = 0;
  std::vector<double> data;  // column-major
};

/// Dense array exchange files ("%%MatrixMarket matrix array real general").
DenseMatrix read_matrix_market(std::istream& is);
DenseMatrix read_matrix_market_file(const std::string& path);
void write_matrix_market(std::ostream& os, const DenseMatrix& a);
void write_matrix_market_file(const std::string& path, const DenseMatrix& a);

/// Binary factor dump: fixed little-endian header (dimensions, block size),
/// the row permutation, then the packed factors column-major. Byte-stable
/// for identical factorizations.
void write_factor_dump(std::ostream& os, const LayoutMatrix& lu, const PermutationVector& perm);
void write_factor_dump_file(const std::string& path, const LayoutMatrix& lu,
                            const PermutationVector& perm);

struct FactorDump {
  int m = 0, n = 0, b = 0;
  PermutationVector perm;
  std::vector<double> data;  // column-major packed factors
};
FactorDump read_factor_dump(std::istream& is);
FactorDump read_factor_dump_file(const std::string& path);

/// JSON image of a laid-out matrix: partition, grid, layout name and the
/// per-worker storage regions. Reading it back reconstructs the matrix
/// exactly.
void write_layout_json(std::ostream& os, const LayoutMatrix& a);
LayoutMatrix read_layout_json(std::istream& is);

}  // namespace calu::io

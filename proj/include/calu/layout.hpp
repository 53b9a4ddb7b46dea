#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "calu/partition.hpp"

namespace calu {

enum class LayoutKind {
  ColumnMajor,    // one column-major array, grid ignored for storage
  BlockCyclic,    // per-worker column-major submatrix of the owned tiles
  TwoLevelBlock,  // per-worker region, every owned tile stored contiguously
};

const char* to_string(LayoutKind k);
LayoutKind parse_layout(std::string_view s);  // cm | bcl | 2lbl

/// Column-major view of one tile. `ld` is the distance between consecutive
/// columns; tiles are contiguous per column in every layout.
struct TileView {
  double* data = nullptr;
  int ld = 0;
  int rows = 0;
  int cols = 0;
  double& at(int r, int c) const { return data[r + std::size_t(c) * ld]; }
};

struct ConstTileView {
  const double* data = nullptr;
  int ld = 0;
  int rows = 0;
  int cols = 0;
  ConstTileView() = default;
  ConstTileView(const TileView& t) : data(t.data), ld(t.ld), rows(t.rows), cols(t.cols) {}
  ConstTileView(const double* d, int l, int r, int c) : data(d), ld(l), rows(r), cols(c) {}
  double at(int r, int c) const { return data[r + std::size_t(c) * ld]; }
};

/// Dense matrix stored in one of the three supported layouts. Element and
/// tile addressing is uniform across layouts, so numerical code never needs
/// to know how the bytes are arranged.
class LayoutMatrix {
 public:
  LayoutMatrix() = default;
  LayoutMatrix(const Partition& part, LayoutKind kind, ThreadGrid grid = {1, 1});

  static LayoutMatrix from_column_major(std::span<const double> cm, const Partition& part,
                                        LayoutKind kind, ThreadGrid grid = {1, 1});

  const Partition& part() const { return part_; }
  LayoutKind kind() const { return kind_; }
  ThreadGrid grid() const { return grid_; }

  double at(int r, int c) const;
  double& at(int r, int c);

  TileView tile(int I, int J);
  ConstTileView tile(int I, int J) const;

  /// Padded b*b copy of a tile; rows/cols past the matrix edge read as zero.
  std::vector<double> read_block(int I, int J) const;
  /// Writes the true extent of the tile from a padded b*b buffer. The
  /// padding area is never written back.
  void write_block(int I, int J, std::span<const double> padded);

  LayoutMatrix converted(LayoutKind target, ThreadGrid grid) const;
  LayoutMatrix converted(LayoutKind target) const { return converted(target, grid_); }

  std::vector<double> to_column_major() const;

  std::span<const double> raw() const { return data_; }
  std::span<double> raw() { return data_; }

  /// Contiguous storage of one worker (BlockCyclic / TwoLevelBlock only).
  std::span<const double> worker_region(int w) const;

 private:
  struct TileAddr {
    std::size_t off;
    int ld;
  };
  TileAddr addr(int I, int J) const;
  void init_regions();
  void check_block(int I, int J) const;

  Partition part_{};
  LayoutKind kind_ = LayoutKind::ColumnMajor;
  ThreadGrid grid_{1, 1};
  std::vector<double> data_;
  std::vector<std::size_t> region_off_;  // size workers()+1
  std::vector<int> region_rows_;         // local row count per worker
};

/// Copies rows [r0, r0+len) of column c into out (stride-1 per tile segment).
void copy_column(const LayoutMatrix& m, int c, int r0, int len, double* out);
void write_column(LayoutMatrix& m, int c, int r0, int len, const double* in);

}  // namespace calu

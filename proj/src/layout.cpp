#include "calu/layout.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string>

namespace calu {

const char* to_string(LayoutKind k) {
  switch (k) {
    case LayoutKind::ColumnMajor: return "cm";
    case LayoutKind::BlockCyclic: return "bcl";
    case LayoutKind::TwoLevelBlock: return "2lbl";
  }
  return "?";
}

LayoutKind parse_layout(std::string_view s) {
  if (s == "cm" || s == "column-major") return LayoutKind::ColumnMajor;
  if (s == "bcl" || s == "block-cyclic") return LayoutKind::BlockCyclic;
  if (s == "2lbl" || s == "two-level") return LayoutKind::TwoLevelBlock;
  throw std::invalid_argument("unknown layout: " + std::string(s));
}

LayoutMatrix::LayoutMatrix(const Partition& part, LayoutKind kind, ThreadGrid grid)
    : part_(part), kind_(kind), grid_(grid) {
  if (grid_.pr <= 0 || grid_.pc <= 0) throw std::invalid_argument("layout: bad grid");
  init_regions();
  data_.assign(std::size_t(part_.m) * part_.n, 0.0);
}

void LayoutMatrix::init_regions() {
  const int P = grid_.workers();
  region_off_.assign(P + 1, 0);
  region_rows_.assign(P, 0);
  if (kind_ == LayoutKind::ColumnMajor) {
    region_off_[1] = std::size_t(part_.m) * part_.n;
    region_rows_[0] = part_.m;
    for (int w = 1; w < P; ++w) region_off_[w + 1] = region_off_[1];
    return;
  }
  // Only the last block row/column can be partial, and a worker owning it
  // always stores it last, so local offsets stay multiples of b.
  std::vector<int> rows_of_gridrow(grid_.pr, 0), cols_of_gridcol(grid_.pc, 0);
  for (int I = 1; I <= part_.M; ++I) rows_of_gridrow[(I - 1) % grid_.pr] += part_.block_rows(I);
  for (int J = 1; J <= part_.N; ++J) cols_of_gridcol[(J - 1) % grid_.pc] += part_.block_cols(J);
  for (int w = 0; w < P; ++w) {
    const int rows = rows_of_gridrow[w / grid_.pc];
    const int cols = cols_of_gridcol[w % grid_.pc];
    region_rows_[w] = rows;
    region_off_[w + 1] = region_off_[w] + std::size_t(rows) * cols;
  }
}

void LayoutMatrix::check_block(int I, int J) const {
  if (I < 1 || I > part_.M || J < 1 || J > part_.N)
    throw std::out_of_range("layout: block index out of range");
}

LayoutMatrix::TileAddr LayoutMatrix::addr(int I, int J) const {
  if (kind_ == LayoutKind::ColumnMajor)
    return {std::size_t(part_.row0(I)) + std::size_t(part_.col0(J)) * part_.m, part_.m};
  const int w = owner(I, J, grid_);
  const int li = (I - 1) / grid_.pr;
  const int lj = (J - 1) / grid_.pc;
  if (kind_ == LayoutKind::BlockCyclic) {
    const int ld = region_rows_[w];
    return {region_off_[w] + std::size_t(li) * part_.b + std::size_t(lj) * part_.b * ld, ld};
  }
  // TwoLevelBlock: tiles laid out tile-column-major inside the region, each
  // tile contiguous column-major.
  const std::size_t col_prefix = std::size_t(region_rows_[w]) * part_.b * lj;
  const std::size_t row_prefix = std::size_t(part_.b) * li * part_.block_cols(J);
  return {region_off_[w] + col_prefix + row_prefix, part_.block_rows(I)};
}

TileView LayoutMatrix::tile(int I, int J) {
  check_block(I, J);
  TileAddr a = addr(I, J);
  return {data_.data() + a.off, a.ld, part_.block_rows(I), part_.block_cols(J)};
}

ConstTileView LayoutMatrix::tile(int I, int J) const {
  check_block(I, J);
  TileAddr a = addr(I, J);
  return {data_.data() + a.off, a.ld, part_.block_rows(I), part_.block_cols(J)};
}

double LayoutMatrix::at(int r, int c) const {
  const int I = r / part_.b + 1, J = c / part_.b + 1;
  TileAddr a = addr(I, J);
  return data_[a.off + (r - part_.row0(I)) + std::size_t(c - part_.col0(J)) * a.ld];
}

double& LayoutMatrix::at(int r, int c) {
  const int I = r / part_.b + 1, J = c / part_.b + 1;
  TileAddr a = addr(I, J);
  return data_[a.off + (r - part_.row0(I)) + std::size_t(c - part_.col0(J)) * a.ld];
}

LayoutMatrix LayoutMatrix::from_column_major(std::span<const double> cm, const Partition& part,
                                             LayoutKind kind, ThreadGrid grid) {
  if (cm.size() != std::size_t(part.m) * part.n)
    throw std::invalid_argument("from_column_major: size mismatch");
  LayoutMatrix out(part, kind, grid);
  if (kind == LayoutKind::ColumnMajor) {
    std::copy(cm.begin(), cm.end(), out.data_.begin());
    return out;
  }
  for (int J = 1; J <= part.N; ++J)
    for (int I = 1; I <= part.M; ++I) {
      TileView t = out.tile(I, J);
      const double* src = cm.data() + part.row0(I) + std::size_t(part.col0(J)) * part.m;
      for (int c = 0; c < t.cols; ++c)
        std::memcpy(t.data + std::size_t(c) * t.ld, src + std::size_t(c) * part.m,
                    sizeof(double) * t.rows);
    }
  return out;
}

std::vector<double> LayoutMatrix::to_column_major() const {
  std::vector<double> cm(std::size_t(part_.m) * part_.n);
  if (kind_ == LayoutKind::ColumnMajor) {
    std::copy(data_.begin(), data_.end(), cm.begin());
    return cm;
  }
  for (int J = 1; J <= part_.N; ++J)
    for (int I = 1; I <= part_.M; ++I) {
      ConstTileView t = tile(I, J);
      double* dst = cm.data() + part_.row0(I) + std::size_t(part_.col0(J)) * part_.m;
      for (int c = 0; c < t.cols; ++c)
        std::memcpy(dst + std::size_t(c) * part_.m, t.data + std::size_t(c) * t.ld,
                    sizeof(double) * t.rows);
    }
  return cm;
}

std::vector<double> LayoutMatrix::read_block(int I, int J) const {
  check_block(I, J);
  std::vector<double> buf(std::size_t(part_.b) * part_.b, 0.0);
  ConstTileView t = tile(I, J);
  for (int c = 0; c < t.cols; ++c)
    for (int r = 0; r < t.rows; ++r) buf[r + std::size_t(c) * part_.b] = t.at(r, c);
  return buf;
}

void LayoutMatrix::write_block(int I, int J, std::span<const double> padded) {
  check_block(I, J);
  if (padded.size() != std::size_t(part_.b) * part_.b)
    throw std::invalid_argument("write_block: expected b*b buffer");
  TileView t = tile(I, J);
  for (int c = 0; c < t.cols; ++c)
    for (int r = 0; r < t.rows; ++r) t.at(r, c) = padded[r + std::size_t(c) * part_.b];
}

LayoutMatrix LayoutMatrix::converted(LayoutKind target, ThreadGrid grid) const {
  return from_column_major(to_column_major(), part_, target, grid);
}

std::span<const double> LayoutMatrix::worker_region(int w) const {
  if (kind_ == LayoutKind::ColumnMajor)
    throw std::logic_error("worker_region: column-major storage has no regions");
  if (w < 0 || w >= grid_.workers()) throw std::out_of_range("worker_region: bad worker");
  return {data_.data() + region_off_[w], region_off_[w + 1] - region_off_[w]};
}

void copy_column(const LayoutMatrix& m, int c, int r0, int len, double* out) {
  const Partition& p = m.part();
  const int J = c / p.b + 1;
  int r = r0;
  while (r < r0 + len) {
    const int I = r / p.b + 1;
    const int in_tile = r - p.row0(I);
    const int take = std::min(p.row0(I) + p.block_rows(I), r0 + len) - r;
    ConstTileView t = m.tile(I, J);
    std::memcpy(out + (r - r0), t.data + in_tile + std::size_t(c - p.col0(J)) * t.ld,
                sizeof(double) * take);
    r += take;
  }
}

void write_column(LayoutMatrix& m, int c, int r0, int len, const double* in) {
  const Partition& p = m.part();
  const int J = c / p.b + 1;
  int r = r0;
  while (r < r0 + len) {
    const int I = r / p.b + 1;
    const int in_tile = r - p.row0(I);
    const int take = std::min(p.row0(I) + p.block_rows(I), r0 + len) - r;
    TileView t = m.tile(I, J);
    std::memcpy(t.data + in_tile + std::size_t(c - p.col0(J)) * t.ld, in + (r - r0),
                sizeof(double) * take);
    r += take;
  }
}

}  // namespace calu

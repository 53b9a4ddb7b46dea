#include "calu/matrix_io.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace calu::io {

namespace {

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream f(path, mode);
  if (!f) throw std::runtime_error("cannot open " + path + " for reading");
  return f;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(path, mode);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  return f;
}

template <class T>
void put_raw(std::ostream& os, const T* p, std::size_t count) {
  os.write(reinterpret_cast<const char*>(p), std::streamsize(count * sizeof(T)));
}

template <class T>
void get_raw(std::istream& is, T* p, std::size_t count) {
  is.read(reinterpret_cast<char*>(p), std::streamsize(count * sizeof(T)));
  if (!is) throw std::runtime_error("factor dump truncated");
}

constexpr char kDumpMagic[8] = {'L', 'U', 'F', 'A', 'C', 'T', '0', '1'};

}  // namespace

DenseMatrix read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("matrix file: empty");
  {
    std::istringstream hdr(line);
    std::string banner, object, format, field, symmetry;
    hdr >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix" || format != "array" ||
        field != "real" || symmetry != "general")
      throw std::runtime_error("matrix file: expected a real general dense array header");
  }
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  DenseMatrix a;
  {
    std::istringstream dims(line);
    if (!(dims >> a.m >> a.n) || a.m <= 0 || a.n <= 0)
      throw std::runtime_error("matrix file: bad dimensions");
  }
  a.data.resize(std::size_t(a.m) * a.n);
  for (auto& v : a.data)
    if (!(is >> v)) throw std::runtime_error("matrix file: truncated values");
  return a;
}

DenseMatrix read_matrix_market_file(const std::string& path) {
  auto f = open_in(path);
  return read_matrix_market(f);
}

void write_matrix_market(std::ostream& os, const DenseMatrix& a) {
  os << "%%MatrixMarket matrix array real general\n";
  os << a.m << ' ' << a.n << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (double v : a.data) os << v << '\n';
}

void write_matrix_market_file(const std::string& path, const DenseMatrix& a) {
  auto f = open_out(path);
  write_matrix_market(f, a);
}

void write_factor_dump(std::ostream& os, const LayoutMatrix& lu, const PermutationVector& perm) {
  const Partition& p = lu.part();
  if (perm.size() != p.m) throw std::invalid_argument("factor dump: permutation size");
  os.write(kDumpMagic, sizeof kDumpMagic);
  const std::int64_t dims[3] = {p.m, p.n, p.b};
  put_raw(os, dims, 3);
  std::vector<std::int32_t> pv(perm.pos.begin(), perm.pos.end());
  put_raw(os, pv.data(), pv.size());
  const std::vector<double> cm = lu.to_column_major();
  put_raw(os, cm.data(), cm.size());
}

void write_factor_dump_file(const std::string& path, const LayoutMatrix& lu,
                            const PermutationVector& perm) {
  auto f = open_out(path, std::ios::out | std::ios::binary);
  write_factor_dump(f, lu, perm);
}

FactorDump read_factor_dump(std::istream& is) {
  char magic[8];
  get_raw(is, magic, 8);
  if (!std::equal(magic, magic + 8, kDumpMagic))
    throw std::runtime_error("factor dump: bad magic");
  std::int64_t dims[3];
  get_raw(is, dims, 3);
  FactorDump d;
  d.m = int(dims[0]);
  d.n = int(dims[1]);
  d.b = int(dims[2]);
  if (d.m <= 0 || d.n <= 0 || d.b <= 0) throw std::runtime_error("factor dump: bad header");
  std::vector<std::int32_t> pv(d.m);
  get_raw(is, pv.data(), pv.size());
  d.perm = PermutationVector(std::vector<int>(pv.begin(), pv.end()));
  d.data.resize(std::size_t(d.m) * d.n);
  get_raw(is, d.data.data(), d.data.size());
  return d;
}

FactorDump read_factor_dump_file(const std::string& path) {
  auto f = open_in(path, std::ios::in | std::ios::binary);
  return read_factor_dump(f);
}

void write_layout_json(std::ostream& os, const LayoutMatrix& a) {
  const Partition& p = a.part();
  nlohmann::json regions = nlohmann::json::array();
  if (a.kind() == LayoutKind::ColumnMajor) {
    regions.push_back(std::vector<double>(a.raw().begin(), a.raw().end()));
  } else {
    for (int w = 0; w < a.grid().workers(); ++w) {
      auto r = a.worker_region(w);
      regions.push_back(std::vector<double>(r.begin(), r.end()));
    }
  }
  nlohmann::json doc = {
      {"m", p.m},
      {"n", p.n},
      {"b", p.b},
      {"layout", to_string(a.kind())},
      {"grid", {{"pr", a.grid().pr}, {"pc", a.grid().pc}}},
      {"regions", std::move(regions)},
  };
  os << doc.dump(2) << '\n';
}

LayoutMatrix read_layout_json(std::istream& is) {
  nlohmann::json doc = nlohmann::json::parse(is);
  const Partition part = make_partition(doc.at("m").get<int>(), doc.at("n").get<int>(),
                                        doc.at("b").get<int>());
  const ThreadGrid grid{doc.at("grid").at("pr").get<int>(),
                        doc.at("grid").at("pc").get<int>()};
  LayoutMatrix a(part, parse_layout(doc.at("layout").get<std::string>()), grid);
  std::size_t off = 0;
  auto raw = a.raw();
  for (const auto& region : doc.at("regions")) {
    for (const auto& v : region) {
      if (off >= raw.size()) throw std::runtime_error("layout file: too many values");
      raw[off++] = v.get<double>();
    }
  }
  if (off != raw.size()) throw std::runtime_error("layout file: too few values");
  return a;
}

}  // namespace calu::io

#pragma once

#include <numeric>
#include <stdexcept>
#include <vector>

namespace calu {

/// Row permutation stored as a placement map: pos[i] is the source row that
/// ends up at position i. Always a bijection on 0..size()-1.
struct PermutationVector {
  std::vector<int> pos;

  PermutationVector() = default;
  explicit PermutationVector(std::vector<int> p) : pos(std::move(p)) { validate(); }

  static PermutationVector identity(int n) {
    PermutationVector p;
    p.pos.resize(n);
    std::iota(p.pos.begin(), p.pos.end(), 0);
    return p;
  }

  int size() const { return int(pos.size()); }
  int operator[](int i) const { return pos[i]; }

  bool is_identity() const {
    for (int i = 0; i < size(); ++i)
      if (pos[i] != i) return false;
    return true;
  }

  void validate() const {
    std::vector<char> seen(pos.size(), 0);
    for (int v : pos) {
      if (v < 0 || v >= size() || seen[v])
        throw std::out_of_range("permutation: not a bijection");
      seen[v] = 1;
    }
  }

  /// this := this ∘ inner applied first on the trailing rows starting at
  /// `offset`: the row now at offset+i came from where pos previously sent
  /// offset+inner[i].
  void compose_tail(const PermutationVector& inner, int offset) {
    if (offset < 0 || offset + inner.size() > size())
      throw std::out_of_range("permutation: compose range");
    std::vector<int> tail(inner.size());
    for (int i = 0; i < inner.size(); ++i) tail[i] = pos[offset + inner[i]];
    for (int i = 0; i < inner.size(); ++i) pos[offset + i] = tail[i];
  }
};

}  // namespace calu

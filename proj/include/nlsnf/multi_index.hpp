#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "nlsnf/index.hpp"

namespace nlsnf {

// Unordered monomial key: the entries of z_{j_1}...z_{j_l} kept in canonical
// sorted order, one stored coefficient per multiset.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<Index> entries);  // sorts into canonical order

  static MultiIndex from_list(std::initializer_list<Index> entries) {
    return MultiIndex(std::vector<Index>(entries));
  }

  const std::vector<Index>& entries() const { return e_; }
  int degree() const { return int(e_.size()); }

  auto operator<=>(const MultiIndex&) const = default;

  // exact signed site sum  a_1 d_1 + ... + a_l d_l
  std::array<std::int64_t, kMaxDim> momentum() const;
  bool zero_momentum() const;

  // third largest modulus |j_i|; 0 when fewer than three entries
  double mu() const;

  // true iff the entries pair off into (j, conj(j)) couples
  bool is_resonant() const;

  MultiIndex conjugated() const;

  // product (1+|j_1|)...(1+|j_l|)
  double n_product() const;

  // visit runs of equal entries: fn(index, multiplicity, first_position)
  template <typename Fn>
  void for_each_run(Fn&& fn) const {
    std::size_t i = 0;
    while (i < e_.size()) {
      std::size_t k = i + 1;
      while (k < e_.size() && e_[k] == e_[i]) ++k;
      fn(e_[i], int(k - i), i);
      i = k;
    }
  }

  int multiplicity(const Index& j) const;

  // multiset with one copy of e_[pos] removed
  MultiIndex erased(std::size_t pos) const;

  // canonical merge of two sorted entry lists
  static MultiIndex merged(const MultiIndex& a, std::size_t skip_a, const MultiIndex& b,
                           std::size_t skip_b);

  std::string str(int d) const;

 private:
  std::vector<Index> e_;
};

// Linear frequencies omega_a on a truncated lattice.
struct Frequencies {
  Lattice lat;
  std::vector<double> omega;  // by site_flat

  double at_site(const Site& a) const {
    if (!lat.contains(a)) throw std::invalid_argument("Frequencies: site off lattice");
    return omega[static_cast<size_t>(lat.site_flat(a))];
  }
  double at(const Index& j) const { return at_site(j.a); }
};

// signed frequency sum  d_1 w_{a_1} + ... + d_l w_{a_l}
double divisor(const MultiIndex& j, const Frequencies& freqs);

}  // namespace nlsnf

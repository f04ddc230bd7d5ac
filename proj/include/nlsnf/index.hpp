#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlsnf {

inline constexpr int kMaxDim = 4;

// Lattice site in Z^d. Components beyond the active dimension stay zero, so
// norms and momenta can be computed over all kMaxDim slots.
using Site = std::array<std::int16_t, kMaxDim>;

inline Site make_site(std::initializer_list<int> coords) {
  Site s{};
  int i = 0;
  for (int c : coords) {
    if (i >= kMaxDim) throw std::invalid_argument("site: too many components");
    s[i++] = static_cast<std::int16_t>(c);
  }
  return s;
}

inline std::int64_t site_abs2(const Site& a) {
  std::int64_t r = 0;
  for (int i = 0; i < kMaxDim; ++i) r += std::int64_t(a[i]) * a[i];
  return r;
}

inline double site_abs(const Site& a) { return std::sqrt(double(site_abs2(a))); }

// Content-based key; independent of any enumeration order.
inline std::uint64_t site_key(const Site& a) {
  std::uint64_t k = 0;
  for (int i = 0; i < kMaxDim; ++i)
    k = (k << 16) | (std::uint64_t(std::uint16_t(a[i] + 0x4000)) & 0xffffu);
  return k;
}

// One point of the doubled mode set: a lattice site together with the
// conjugation sign (+1 tags a xi coordinate, -1 an eta coordinate).
struct Index {
  Site a{};
  std::int8_t delta = 1;

  auto operator<=>(const Index&) const = default;

  Index conjugate() const { return Index{a, static_cast<std::int8_t>(-delta)}; }
  std::int64_t abs2() const { return site_abs2(a); }
  double abs() const { return site_abs(a); }
};

std::string to_string(const Index& j, int d);

// Finite max-norm box |a_i| <= K. The truncation box is max-norm (it matches
// square FFT grids); the |j| entering exponential weights stays Euclidean.
struct Lattice {
  int d = 1;
  int K = 0;

  Lattice() = default;
  Lattice(int d_, int K_) : d(d_), K(K_) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("Lattice: d out of range");
    if (K < 0) throw std::invalid_argument("Lattice: K must be >= 0");
  }

  bool operator==(const Lattice&) const = default;

  bool contains(const Site& a) const {
    for (int i = 0; i < d; ++i)
      if (a[i] < -K || a[i] > K) return false;
    for (int i = d; i < kMaxDim; ++i)
      if (a[i] != 0) return false;
    return true;
  }
  bool contains(const Index& j) const { return contains(j.a); }

  std::int64_t site_count() const {
    std::int64_t n = 1;
    for (int i = 0; i < d; ++i) n *= 2 * K + 1;
    return n;
  }
  std::int64_t index_count() const { return 2 * site_count(); }

  // lexicographic flat enumeration of the box, component 0 outermost
  std::int64_t site_flat(const Site& a) const {
    std::int64_t f = 0;
    for (int i = 0; i < d; ++i) f = f * (2 * K + 1) + (a[i] + K);
    return f;
  }
  Site site_from_flat(std::int64_t f) const {
    Site a{};
    for (int i = d - 1; i >= 0; --i) {
      a[i] = static_cast<std::int16_t>(f % (2 * K + 1) - K);
      f /= 2 * K + 1;
    }
    return a;
  }

  std::int64_t index_flat(const Index& j) const {
    return 2 * site_flat(j.a) + (j.delta > 0 ? 1 : 0);
  }
  Index index_from_flat(std::int64_t f) const {
    return Index{site_from_flat(f / 2), static_cast<std::int8_t>(f % 2 == 1 ? 1 : -1)};
  }

  std::vector<Site> sites() const {
    std::vector<Site> out;
    out.reserve(static_cast<size_t>(site_count()));
    for (std::int64_t f = 0; f < site_count(); ++f) out.push_back(site_from_flat(f));
    return out;
  }

  // all (site, sign) symbols in deterministic order
  std::vector<Index> indices() const {
    std::vector<Index> out;
    out.reserve(static_cast<size_t>(index_count()));
    for (std::int64_t f = 0; f < index_count(); ++f) out.push_back(index_from_flat(f));
    return out;
  }
};

}  // namespace nlsnf

#include "nlsnf/sampling.hpp"

#include <cmath>
#include <stdexcept>

#include "nlsnf/rng.hpp"

namespace nlsnf {

State random_real_state(const Lattice& lat, std::uint64_t seed, double decay) {
  CounterRng rng{seed};
  State z(lat);
  for (const Site& a : lat.sites()) {
    std::uint64_t key = site_key(a);
    double w = std::exp(-decay * site_abs(a));
    cplx xi(w * rng.uniform_pm_half(key, 1), w * rng.uniform_pm_half(key, 2));
    z.set(Index{a, +1}, xi);
    z.set(Index{a, -1}, std::conj(xi));
  }
  return z;
}

namespace {

Index random_index(const Lattice& lat, const CounterRng& rng, std::uint64_t stream,
                   std::uint64_t& ctr, int min_abs = 0) {
  for (;;) {
    Site a{};
    bool big = false;
    for (int i = 0; i < lat.d; ++i) {
      double u = rng.uniform01(stream, ctr++);
      a[i] = std::int16_t(int(std::floor(u * (2 * lat.K + 1))) - lat.K);
    }
    big = site_abs(a) > double(min_abs);
    if (min_abs > 0 && !big) continue;
    double u = rng.uniform01(stream, ctr++);
    return Index{a, std::int8_t(u < 0.5 ? 1 : -1)};
  }
}

cplx random_coeff(const CounterRng& rng, std::uint64_t stream, std::uint64_t& ctr) {
  double re = rng.uniform_pm_half(stream, ctr++) * 2.0;
  double im = rng.uniform_pm_half(stream, ctr++) * 2.0;
  return {re, im};
}

void add_with_conjugate(Polynomial& p, const MultiIndex& j, cplx c) {
  p.add(j, c);
  p.add(j.conjugated(), std::conj(c));
}

}  // namespace

Polynomial random_homogeneous_poly(const Lattice& lat, int degree, int n_monomials,
                                   std::uint64_t seed, int degree_cap) {
  if (degree < 2) throw std::invalid_argument("random_homogeneous_poly: degree must be >= 2");
  CounterRng rng{seed};
  Polynomial p(degree_cap);
  std::uint64_t ctr = 0;
  int produced = 0;
  long attempts = 0;
  while (produced < n_monomials) {
    if (++attempts > 100000L * (n_monomials + 1))
      throw std::runtime_error("random_homogeneous_poly: could not place monomials");
    std::vector<Index> entries;
    std::array<std::int64_t, kMaxDim> mom{};
    for (int i = 0; i < degree - 1; ++i) {
      Index ix = random_index(lat, rng, 1, ctr);
      entries.push_back(ix);
      for (int c = 0; c < kMaxDim; ++c) mom[c] += std::int64_t(ix.a[c]) * ix.delta;
    }
    // close the momentum with the final entry
    double u = rng.uniform01(1, ctr++);
    std::int8_t delta = u < 0.5 ? std::int8_t(1) : std::int8_t(-1);
    Site last{};
    bool onlat = true;
    for (int c = 0; c < lat.d; ++c) {
      std::int64_t val = -mom[c] * delta;
      if (val < -lat.K || val > lat.K) onlat = false;
      last[c] = std::int16_t(val);
    }
    if (!onlat) continue;
    entries.push_back(Index{last, delta});
    MultiIndex j(std::move(entries));
    add_with_conjugate(p, j, random_coeff(rng, 2, ctr));
    ++produced;
  }
  p.prune(0.0);
  return p;
}

Polynomial random_normal_form_poly(const Lattice& lat, int degree, int n_monomials, int N,
                                   std::uint64_t seed, int degree_cap) {
  if (N >= lat.K)
    throw std::invalid_argument("random_normal_form_poly: need N < K for high-mu monomials");
  CounterRng rng{seed};
  Polynomial p(degree_cap);
  std::uint64_t ctr = 0;
  int produced = 0;
  long attempts = 0;
  while (produced < n_monomials) {
    if (++attempts > 100000L * (n_monomials + 1))
      throw std::runtime_error("random_normal_form_poly: could not place monomials");
    bool resonant = degree % 2 == 0 && produced % 2 == 0;
    if (resonant) {
      std::vector<Index> entries;
      for (int i = 0; i < degree / 2; ++i) {
        Index ix = random_index(lat, rng, 3, ctr);
        entries.push_back(ix);
        entries.push_back(ix.conjugate());
      }
      add_with_conjugate(p, MultiIndex(std::move(entries)), random_coeff(rng, 4, ctr) * 0.5);
      ++produced;
      continue;
    }
    // all entries strictly above N in modulus, momentum closed by the last
    std::vector<Index> entries;
    std::array<std::int64_t, kMaxDim> mom{};
    for (int i = 0; i < degree - 1; ++i) {
      Index ix = random_index(lat, rng, 5, ctr, N);
      entries.push_back(ix);
      for (int c = 0; c < kMaxDim; ++c) mom[c] += std::int64_t(ix.a[c]) * ix.delta;
    }
    double u = rng.uniform01(5, ctr++);
    std::int8_t delta = u < 0.5 ? std::int8_t(1) : std::int8_t(-1);
    Site last{};
    bool ok = true;
    for (int c = 0; c < lat.d; ++c) {
      std::int64_t val = -mom[c] * delta;
      if (val < -lat.K || val > lat.K) ok = false;
      last[c] = std::int16_t(val);
    }
    if (!ok) continue;
    entries.push_back(Index{last, delta});
    MultiIndex j(std::move(entries));
    if (!(j.mu() > double(N)) || j.is_resonant()) continue;
    add_with_conjugate(p, j, random_coeff(rng, 6, ctr));
    ++produced;
  }
  p.prune(0.0);
  return p;
}

}  // namespace nlsnf

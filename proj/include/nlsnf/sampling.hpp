#pragma once

#include <cstdint>

#include "nlsnf/polynomial.hpp"

namespace nlsnf {

// Random real state: xi_a drawn per site with geometric decay e^{-decay |a|},
// eta = conj(xi). Draws are keyed by site content.
State random_real_state(const Lattice& lat, std::uint64_t seed, double decay = 0.0);

// Random real homogeneous zero-momentum polynomial with n_monomials distinct
// canonical keys (plus their conjugates).
Polynomial random_homogeneous_poly(const Lattice& lat, int degree, int n_monomials,
                                   std::uint64_t seed, int degree_cap = kDefaultDegreeCap);

// Random real homogeneous polynomial already in N-normal form: a mix of
// resonant (action) monomials and monomials with mu > N.
Polynomial random_normal_form_poly(const Lattice& lat, int degree, int n_monomials, int N,
                                   std::uint64_t seed, int degree_cap = kDefaultDegreeCap);

}  // namespace nlsnf

#pragma once

#include <map>
#include <string>

#include "nlsnf/polynomial.hpp"

namespace nlsnf {

// Finite Taylor table of an analytic nonlinearity g(v1, v2):
//   g = sum g_{k1,k2} v1^{k1} v2^{k2},
// with a zero of order >= 3 and the reality constraint
// g_{k2,k1} = conj(g_{k1,k2}) (so g(z, conj z) is real).
struct SeriesSpec {
  std::map<std::pair<int, int>, cplx> terms;
  double R0 = 1.0;  // convergence radius proxy
  double M = 0.0;   // sup bound; 0 means "derive as sum |g_{k1,k2}|"

  void validate() const;
  int max_total_degree() const;
  double sup_bound() const;  // M, or the derived default

  // g = G(v1 v2): every term diagonal with a real coefficient
  bool gauge_invariant() const;

  cplx eval(cplx v1, cplx v2) const;      // g(v1, v2)
  cplx d_v2(cplx v1, cplx v2) const;      // dg/dv2
  double gauge_phase(double s) const;     // G'(s) for gauge-invariant tables
};

// single-term table for g = (a/(p+1)) |u|^{2p+2}
SeriesSpec preset_power(int p, double a);

// "power:p=1,a=1" or inline JSON
SeriesSpec parse_series_spec(const std::string& text);

std::string series_to_json(const SeriesSpec& spec);
SeriesSpec series_from_json(const std::string& text);

// Homogeneous zero-momentum polynomials P_3..P_kmax of the projected
// nonlinearity. The momentum integral is the exact Kronecker delta, so a
// monomial xi_{a_1}..xi_{a_k1} eta_{b_1}..eta_{b_k2} survives iff
// sum a - sum b = 0. Stored canonically: the coefficient of an unordered
// multi-index is g_{k1,k2} times the number of ordered arrangements.
Polynomial expand(const SeriesSpec& spec, const Lattice& lat, int kmax,
                  int degree_cap = kDefaultDegreeCap);

// ordered-tuple coefficient p_{a,b} recovered from the canonical storage
cplx ordered_coefficient(const Polynomial& p, const MultiIndex& j);

}  // namespace nlsnf

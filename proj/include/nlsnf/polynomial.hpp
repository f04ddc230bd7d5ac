#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "nlsnf/multi_index.hpp"
#include "nlsnf/state.hpp"

namespace nlsnf {

inline constexpr int kDefaultDegreeCap = 12;

// Real Hamiltonian polynomial with zero-momentum monomials, stored sparsely
// as canonical multi-index -> coefficient, bucketed by degree. One coefficient
// per unordered multi-index; derivatives carry the multiplicity factors.
class Polynomial {
 public:
  using Map = std::map<MultiIndex, cplx>;

  explicit Polynomial(int degree_cap = kDefaultDegreeCap) : cap_(degree_cap) {}

  int degree_cap() const { return cap_; }

  // Accumulates c onto the canonical key. Rejects nonzero momentum, degrees
  // outside [2, cap], and non-finite coefficients.
  void add(const MultiIndex& j, cplx c);

  void axpy(cplx s, const Polynomial& other);  // this += s * other

  const Map& bucket(int degree) const;
  std::vector<int> degrees() const;
  int max_degree() const;  // 0 when empty
  bool empty() const;
  std::size_t term_count() const;
  cplx coefficient(const MultiIndex& j) const;

  // drop coefficients with |c| <= eps
  void prune(double eps = 0.0);

  bool is_real(double tol = 1e-12) const;
  bool is_homogeneous() const { return degrees().size() <= 1; }

  Polynomial conjugated() const;

  friend Polynomial operator*(cplx s, const Polynomial& p);
  Polynomial& operator+=(const Polynomial& o) {
    axpy(1.0, o);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    axpy(-1.0, o);
    return *this;
  }

 private:
  int cap_;
  std::map<int, Map> buckets_;
};

// sum over degrees of the sup of coefficient moduli
double poly_norm(const Polynomial& p);

// split into (monomials that are resonant or have mu > N, the rest);
// the two parts add back to p exactly
std::pair<Polynomial, Polynomial> nform_split(const Polynomial& p, int N);
bool is_normal_form(const Polynomial& p, int N);

// serialization: array of {degree, entries:[{indices:[[a...,delta],...], re, im}]}
std::string polynomial_to_json(const Polynomial& p);
Polynomial polynomial_from_json(const std::string& text, int degree_cap = kDefaultDegreeCap);

}  // namespace nlsnf

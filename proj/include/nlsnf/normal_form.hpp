#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlsnf/poly_ops.hpp"
#include "nlsnf/potential.hpp"
#include "nlsnf/rational.hpp"

namespace nlsnf {

// Bernoulli numbers B_0..B_max as exact rationals (z/(e^z-1) convention,
// B_1 = -1/2), via the recurrence sum_{i<=k} C(k+1,i) B_i = 0.
class BernoulliCache {
 public:
  explicit BernoulliCache(int max_index = 32);
  const Rational& at(int k) const;
  int max_index() const { return int(values_.size()) - 1; }

 private:
  std::vector<Rational> values_;
};

Rational bernoulli(int k);

// Per-degree homological solve of  {H_0, chi} - Z = Q  (coefficients satisfy
// i Omega(j) chi_j - Z_j = Q_j exactly):
//   resonant j or mu(j) > N : chi_j = 0, Z_j = -Q_j   (kept in normal form)
//   otherwise               : Z_j = 0, chi_j = Q_j / (i Omega(j)).
// A vanishing divisor on a monomial that must be divided is a hard error
// naming the tuple.
struct HomologicalSolution {
  Polynomial chi;
  Polynomial Z;
  double min_abs_divisor = 0.0;  // among divided monomials; inf when none
};
HomologicalSolution solve_homological(const Polynomial& q_hom, const Frequencies& freqs, int N);

// {H_0, chi} - Z - Q, coefficientwise; identically zero up to rounding
Polynomial homological_residual(const Polynomial& chi, const Polynomial& Z, const Polynomial& q,
                                const Frequencies& freqs);

// index sets of the series assembly: compositions (l_1..l_{k+1}) with
// sum = m + 2k and 3 <= l_i <= m - k
std::vector<std::vector<int>> composition_sets(int m, int k);

struct NormalFormDiagnostics {
  std::vector<double> chi_norms;  // by degree, slot deg-3
  std::vector<double> Z_norms;
  std::vector<double> min_abs_divisor;  // per degree
  double C_estimate = 0.0;              // min C with ||chi_m||+||Z_m|| <= (C m N^nu)^{m^2}
  std::int64_t bracket_evaluations = 0;
};

struct NormalFormResult {
  int N = 0;
  int r = 0;
  double nu = 0.0;  // used for the C estimate
  std::vector<Polynomial> chi;  // degrees 3..r, slot deg-3
  std::vector<Polynomial> Z;
  NormalFormDiagnostics diag;

  Polynomial chi_total() const;
  Polynomial Z_total() const;
};

struct BuildOptions {
  double nu_for_estimate = 12.0;
  std::int64_t bracket_budget = 10'000'000'000;  // guard on composition work
};

// Degree-by-degree construction: for m = 3..r assemble
//   Q_m = -P_m - sum_{k=3}^{m-1} {P_{m+2-k}, chi_k}
//         + sum_{k=1}^{m-3} (B_k/k!) sum_{composition sets}
//             D_{chi_{l_1}} ... D_{chi_{l_k}} (Z_{l_{k+1}} - P_{l_{k+1}})
// with D_A B = {B, A}, then solve the homological equation. With these signs
// the time-1 flow of chi conjugates H_0 + P to H_0 + Z up to order r.
NormalFormResult build_normal_form(const Polynomial& P, const Frequencies& freqs, int N, int r,
                                   const BuildOptions& opts = {});

// time-1 flow of the generator field, fixed-step RK4
State lie_transform(const std::vector<Polynomial>& chi, const State& z0, int substeps = 32);

// N(eps) = ceil(|ln eps|^{1+beta}), r(eps) = max(3, floor(|ln eps|^beta))
struct ParameterChoice {
  int N = 0;
  int r = 0;
};
ParameterChoice choose_parameters(double epsilon, double beta);

// Residual (H_0+P)(Phi_chi^1(z)) - H_0(z) - Z(z) at scaled states; the fitted
// log-log slope should reach r+1 when the construction is correct.
struct ConjugacyReport {
  std::vector<double> amplitudes;
  std::vector<double> residuals;
  double slope = 0.0;
  bool indistinguishable_from_zero = false;
};
ConjugacyReport verify_conjugacy(const Polynomial& P, const NormalFormResult& nf,
                                 const Frequencies& freqs, const std::vector<double>& amplitudes,
                                 std::uint64_t seed = 7, int substeps = 32);

// Field-size scan: on ||z||_rho = M eps, is ||X_Z|| + ||X_chi|| <= 2 eps^{3/2}?
struct FieldBoundRow {
  double eps = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};
std::vector<FieldBoundRow> field_bound_scan(const NormalFormResult& nf, double rho, double M,
                                            const std::vector<double>& eps_list,
                                            const Lattice& lat, std::uint64_t seed = 11);

std::string normal_form_to_json(const NormalFormResult& nf);
NormalFormResult normal_form_from_json(const std::string& text, int degree_cap = kDefaultDegreeCap);

}  // namespace nlsnf

#include "nlsnf/normal_form.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "nlsnf/sampling.hpp"

namespace nlsnf {

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::int64_t acc = 1;
  for (int i = 1; i <= k; ++i) {
    __int128 next = (__int128)acc * (n - k + i) / i;
    if (next > INT64_MAX) throw std::overflow_error("binomial: int64 overflow");
    acc = (std::int64_t)next;
  }
  return acc;
}

BernoulliCache::BernoulliCache(int max_index) {
  values_.reserve(static_cast<size_t>(max_index) + 1);
  values_.push_back(Rational(1));
  for (int k = 1; k <= max_index; ++k) {
    // sum_{i=0}^{k} C(k+1, i) B_i = 0; int64 rationals carry the exact values
    // comfortably past the default degree cap, and we stop cleanly where they
    // would overflow
    try {
      Rational acc(0);
      for (int i = 0; i < k; ++i)
        acc += Rational(binomial(k + 1, i)) * values_[static_cast<size_t>(i)];
      values_.push_back(-acc / Rational(k + 1));
    } catch (const std::overflow_error&) {
      break;
    }
  }
}

const Rational& BernoulliCache::at(int k) const {
  if (k < 0 || k > max_index()) throw std::out_of_range("BernoulliCache: index out of range");
  return values_[static_cast<size_t>(k)];
}

Rational bernoulli(int k) {
  static const BernoulliCache cache(40);
  return cache.at(k);
}

HomologicalSolution solve_homological(const Polynomial& q_hom, const Frequencies& freqs, int N) {
  if (!q_hom.is_homogeneous())
    throw std::invalid_argument("solve_homological: Q must be homogeneous");
  HomologicalSolution out{Polynomial(q_hom.degree_cap()), Polynomial(q_hom.degree_cap()),
                          std::numeric_limits<double>::infinity()};
  for (int deg : q_hom.degrees()) {
    for (const auto& [j, q] : q_hom.bucket(deg)) {
      if (j.is_resonant() || j.mu() > double(N)) {
        out.Z.add(j, -q);
      } else {
        double om = divisor(j, freqs);
        if (om == 0.0)
          throw std::runtime_error(
              "solve_homological: vanishing divisor on non-resonant monomial " +
              j.str(freqs.lat.d) + " with mu <= N; the frequencies are resonant");
        // q / (i om)
        out.chi.add(j, cplx(q.imag(), -q.real()) / om);
        out.min_abs_divisor = std::min(out.min_abs_divisor, std::abs(om));
      }
    }
  }
  return out;
}

Polynomial homological_residual(const Polynomial& chi, const Polynomial& Z, const Polynomial& q,
                                const Frequencies& freqs) {
  Polynomial res = h0_bracket(chi, freqs);
  res -= Z;
  res -= q;
  return res;
}

std::vector<std::vector<int>> composition_sets(int m, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<size_t>(k) + 1, 0);
  int target = m + 2 * k;
  int hi = m - k;
  std::function<void(int, int)> rec = [&](int slot, int remaining) {
    if (slot == k + 1) {
      if (remaining == 0) out.push_back(cur);
      return;
    }
    int slots_left = k + 1 - slot;
    for (int v = 3; v <= hi; ++v) {
      int rest = remaining - v;
      if (rest < 3 * (slots_left - 1) || rest > hi * (slots_left - 1)) continue;
      cur[static_cast<size_t>(slot)] = v;
      rec(slot + 1, rest);
    }
  };
  if (hi >= 3) rec(0, target);
  return out;
}

Polynomial NormalFormResult::chi_total() const {
  Polynomial total(chi.empty() ? kDefaultDegreeCap : chi.front().degree_cap());
  for (const Polynomial& p : chi) total += p;
  return total;
}

Polynomial NormalFormResult::Z_total() const {
  Polynomial total(Z.empty() ? kDefaultDegreeCap : Z.front().degree_cap());
  for (const Polynomial& p : Z) total += p;
  return total;
}

NormalFormResult build_normal_form(const Polynomial& P, const Frequencies& freqs, int N, int r,
                                   const BuildOptions& opts) {
  if (r < 3) throw std::invalid_argument("build_normal_form: r must be >= 3");
  if (r > P.degree_cap())
    throw std::invalid_argument("build_normal_form: r exceeds the polynomial degree cap");
  if (!P.is_real())
    throw std::invalid_argument("build_normal_form: P must be real");

  const int cap = P.degree_cap();
  auto P_deg = [&](int deg) {
    Polynomial out(cap);
    for (const auto& [j, c] : P.bucket(deg)) out.add(j, c);
    return out;
  };

  NormalFormResult nf;
  nf.N = N;
  nf.r = r;
  nf.nu = opts.nu_for_estimate;
  nf.chi.assign(static_cast<size_t>(r - 2), Polynomial(cap));
  nf.Z.assign(static_cast<size_t>(r - 2), Polynomial(cap));
  nf.diag.chi_norms.assign(static_cast<size_t>(r - 2), 0.0);
  nf.diag.Z_norms.assign(static_cast<size_t>(r - 2), 0.0);
  nf.diag.min_abs_divisor.assign(static_cast<size_t>(r - 2),
                                 std::numeric_limits<double>::infinity());

  std::int64_t bracket_work = 0;
  auto guarded_poisson = [&](const Polynomial& a, const Polynomial& b) {
    bracket_work += std::int64_t(a.term_count()) * std::int64_t(b.term_count());
    if (bracket_work > opts.bracket_budget)
      throw std::runtime_error("build_normal_form: bracket budget exceeded");
    ++nf.diag.bracket_evaluations;
    return poisson(a, b);
  };

  for (int m = 3; m <= r; ++m) {
    auto slot = [&](int deg) { return static_cast<size_t>(deg - 3); };

    Polynomial Q(cap);
    Q.axpy(-1.0, P_deg(m));

    // - sum_{k=3}^{m-1} {P_{m+2-k}, chi_k}
    for (int k = 3; k <= m - 1; ++k) {
      const Polynomial& chik = nf.chi[slot(k)];
      if (chik.empty()) continue;
      Polynomial pk = P_deg(m + 2 - k);
      if (pk.empty()) continue;
      Q.axpy(-1.0, guarded_poisson(pk, chik));
    }

    // + sum_k (B_k/k!) sum_{l partitions} D_{chi_{l_1}}..D_{chi_{l_k}} (Z - P)
    for (int k = 1; k <= m - 3; ++k) {
      double coeff = bernoulli(k).to_double();
      for (int i = 2; i <= k; ++i) coeff /= double(i);
      if (coeff == 0.0) continue;  // odd Bernoulli numbers vanish
      for (const auto& comp : composition_sets(m, k)) {
        int tail_deg = comp[static_cast<size_t>(k)];
        Polynomial term(cap);
        term.axpy(1.0, nf.Z[slot(tail_deg)]);
        term.axpy(-1.0, P_deg(tail_deg));
        bool dead = term.empty();
        for (int i = k - 1; i >= 0 && !dead; --i) {
          const Polynomial& chil = nf.chi[slot(comp[static_cast<size_t>(i)])];
          if (chil.empty()) {
            dead = true;
            break;
          }
          term = guarded_poisson(term, chil);
          dead = term.empty();
        }
        if (!dead) Q.axpy(coeff, term);
      }
    }

    Q.prune(0.0);
    HomologicalSolution sol = solve_homological(Q, freqs, N);
    nf.chi[slot(m)] = std::move(sol.chi);
    nf.Z[slot(m)] = std::move(sol.Z);
    nf.diag.chi_norms[slot(m)] = poly_norm(nf.chi[slot(m)]);
    nf.diag.Z_norms[slot(m)] = poly_norm(nf.Z[slot(m)]);
    nf.diag.min_abs_divisor[slot(m)] = sol.min_abs_divisor;
  }

  // smallest C with ||chi_m|| + ||Z_m|| <= (C m N^nu)^{m^2}
  double C = 0.0;
  for (int m = 3; m <= r; ++m) {
    double total = nf.diag.chi_norms[static_cast<size_t>(m - 3)] +
                   nf.diag.Z_norms[static_cast<size_t>(m - 3)];
    if (total <= 0.0) continue;
    double c = std::pow(total, 1.0 / double(m) / double(m)) /
               (double(m) * std::pow(double(N), opts.nu_for_estimate));
    C = std::max(C, c);
  }
  nf.diag.C_estimate = C;
  return nf;
}

State lie_transform(const std::vector<Polynomial>& chi, const State& z0, int substeps) {
  if (substeps < 1) throw std::invalid_argument("lie_transform: substeps must be >= 1");
  bool all_empty = true;
  for (const Polynomial& p : chi)
    if (!p.empty()) all_empty = false;
  if (all_empty) return z0;

  CompiledPoly field = compile_sum(chi, z0.lattice());
  DenseState z = to_dense(z0);
  rk4_flow([&](const std::vector<cplx>& in, std::vector<cplx>& out) { apply_field(field, in, out); },
           z.v, 1.0, substeps, /*guard_factor=*/2.0);
  return to_sparse(z, 0.0);
}

ParameterChoice choose_parameters(double epsilon, double beta) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw std::invalid_argument("choose_parameters: epsilon must lie in (0,1)");
  if (!(beta > 0.0) || !(beta < 1.0))
    throw std::invalid_argument("choose_parameters: beta must lie in (0,1)");
  double L = std::abs(std::log(epsilon));
  ParameterChoice pc;
  pc.N = int(std::ceil(std::pow(L, 1.0 + beta)));
  pc.r = std::max(3, int(std::floor(std::pow(L, beta))));
  return pc;
}

ConjugacyReport verify_conjugacy(const Polynomial& P, const NormalFormResult& nf,
                                 const Frequencies& freqs, const std::vector<double>& amplitudes,
                                 std::uint64_t seed, int substeps) {
  if (amplitudes.size() < 2)
    throw std::invalid_argument("verify_conjugacy: need at least two amplitudes");
  const Lattice& lat = freqs.lat;
  // sup-normalized probe: s then scales the individual coefficients, so a
  // degree-(r+1) residual sits at s^{r+1}, well clear of rounding
  State zhat = random_real_state(lat, seed, /*decay=*/0.5);
  double sup = 0.0;
  for (const auto& [j, v] : zhat.coeffs()) sup = std::max(sup, std::abs(v));
  zhat = (1.0 / sup) * zhat;

  Polynomial Ztot = nf.Z_total();
  ConjugacyReport rep;
  double h0_scale = 0.0;
  for (double s : amplitudes) {
    State z = s * zhat;
    State y = lie_transform(nf.chi, z, substeps);
    cplx lhs = evaluate_h0(y, freqs) + evaluate(P, y);
    cplx rhs = evaluate_h0(z, freqs) + evaluate(Ztot, z);
    rep.amplitudes.push_back(s);
    rep.residuals.push_back(std::abs(lhs - rhs));
    h0_scale = std::max({h0_scale, std::abs(evaluate_h0(z, freqs)), std::abs(lhs)});
  }

  // rounding floor relative to the evaluated Hamiltonian magnitudes
  double floor = 1e-12 * std::max(h0_scale, 1e-300);
  bool all_tiny = true;
  for (double rres : rep.residuals)
    if (rres > floor) all_tiny = false;
  if (all_tiny) {
    rep.indistinguishable_from_zero = true;
    rep.slope = std::numeric_limits<double>::infinity();
    return rep;
  }

  // least squares on log-log
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = int(rep.amplitudes.size());
  for (int i = 0; i < n; ++i) {
    double x = std::log(rep.amplitudes[static_cast<size_t>(i)]);
    double y = std::log(std::max(rep.residuals[static_cast<size_t>(i)], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return rep;
}

std::vector<FieldBoundRow> field_bound_scan(const NormalFormResult& nf, double rho, double M,
                                            const std::vector<double>& eps_list,
                                            const Lattice& lat, std::uint64_t seed) {
  State zhat = random_real_state(lat, seed, /*decay=*/rho);
  double n0 = norm_rho(zhat, rho);
  zhat = (1.0 / n0) * zhat;
  Polynomial Ztot = nf.Z_total();
  Polynomial Ctot = nf.chi_total();
  std::vector<FieldBoundRow> rows;
  for (double eps : eps_list) {
    State z = (M * eps) * zhat;
    FieldBoundRow row;
    row.eps = eps;
    row.lhs = norm_rho(vector_field(Ztot, z), rho) + norm_rho(vector_field(Ctot, z), rho);
    row.rhs = 2.0 * std::pow(eps, 1.5);
    row.pass = row.lhs <= row.rhs;
    rows.push_back(row);
  }
  return rows;
}

using nlohmann::json;

std::string normal_form_to_json(const NormalFormResult& nf) {
  json out;
  out["N"] = nf.N;
  out["r"] = nf.r;
  out["nu"] = nf.nu;
  json chis = json::array(), zs = json::array();
  for (const Polynomial& p : nf.chi) chis.push_back(json::parse(polynomial_to_json(p)));
  for (const Polynomial& p : nf.Z) zs.push_back(json::parse(polynomial_to_json(p)));
  out["chi"] = chis;
  out["Z"] = zs;
  json diag;
  diag["chi_norms"] = nf.diag.chi_norms;
  diag["Z_norms"] = nf.diag.Z_norms;
  json mins = json::array();
  for (double v : nf.diag.min_abs_divisor) mins.push_back(std::isfinite(v) ? v : -1.0);
  diag["min_abs_divisor"] = mins;
  diag["C_estimate"] = nf.diag.C_estimate;
  diag["bracket_evaluations"] = nf.diag.bracket_evaluations;
  out["diagnostics"] = diag;
  return out.dump(2);
}

NormalFormResult normal_form_from_json(const std::string& text, int degree_cap) {
  json in = json::parse(text);
  NormalFormResult nf;
  nf.N = in.at("N").get<int>();
  nf.r = in.at("r").get<int>();
  nf.nu = in.value("nu", 0.0);
  for (const auto& p : in.at("chi"))
    nf.chi.push_back(polynomial_from_json(p.dump(), degree_cap));
  for (const auto& p : in.at("Z")) nf.Z.push_back(polynomial_from_json(p.dump(), degree_cap));
  const auto& diag = in.at("diagnostics");
  nf.diag.chi_norms = diag.at("chi_norms").get<std::vector<double>>();
  nf.diag.Z_norms = diag.at("Z_norms").get<std::vector<double>>();
  for (const auto& v : diag.at("min_abs_divisor"))
    nf.diag.min_abs_divisor.push_back(v.get<double>() < 0 ? std::numeric_limits<double>::infinity()
                                                          : v.get<double>());
  nf.diag.C_estimate = diag.value("C_estimate", 0.0);
  nf.diag.bracket_evaluations = diag.value("bracket_evaluations", std::int64_t(0));
  return nf;
}

}  // namespace nlsnf

// Acceptance suite: one check per numbered criterion, each printing a single
// PASS/FAIL line with its measured quantities. Exit code 0 when every
// criterion passes, 2 otherwise.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <vector>

#include "nlsnf/fourier.hpp"
#include "nlsnf/normal_form.hpp"
#include "nlsnf/sampling.hpp"
#include "nlsnf/series.hpp"
#include "nlsnf/simulate.hpp"
#include "nlsnf/threads.hpp"

using namespace nlsnf;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string details;
};

Frequencies freqs_of(double m, double R, const Lattice& lat, std::uint64_t seed) {
  return frequencies(sample_potential(m, R, lat, seed));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = int(x.size());
  for (int i = 0; i < n; ++i) {
    double lx = std::log(x[size_t(i)]), ly = std::log(std::max(y[size_t(i)], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// 1. bracket norm bound on 1000 random homogeneous pairs
Outcome criterion1() {
  Lattice lat(1, 6);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    int dp = 2 + int(s % 5);
    int dq = 2 + int((s / 5) % 5);
    Polynomial p = random_homogeneous_poly(lat, dp, 5, 10000 + s);
    Polynomial q = random_homogeneous_poly(lat, dq, 5, 20000 + s);
    Polynomial pq = poisson(p, q);
    double bound = 2.0 * dp * dq * poly_norm(p) * poly_norm(q);
    if (bound == 0.0) continue;
    worst = std::max(worst, poly_norm(pq) / bound);
  }
  Outcome out;
  out.pass = worst <= 1.0 + 1e-10;
  std::ostringstream os;
  os << "worst ||{P,Q}|| / (2kl ||P|| ||Q||) = " << worst << " over 1000 pairs";
  out.details = os.str();
  return out;
}

// 2. evaluation and vector-field size bounds on 1000 random (P, z)
Outcome criterion2() {
  Lattice lat(1, 6);
  double worst_eval = 0.0, worst_field = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    int deg = 2 + int(s % 5);
    Polynomial p = random_homogeneous_poly(lat, deg, 5, 30000 + s);
    State z = random_real_state(lat, 40000 + s, 0.3);
    double rho = 0.05 + 0.05 * double(s % 8);
    double nz = norm_rho(z, rho);
    double np = poly_norm(p);
    if (np == 0.0 || nz == 0.0) continue;
    worst_eval = std::max(worst_eval, std::abs(evaluate(p, z)) / (np * std::pow(nz, deg)));
    worst_field = std::max(worst_field, norm_rho(vector_field(p, z), rho) /
                                            (2.0 * deg * np * std::pow(nz, deg - 1)));
  }
  Outcome out;
  out.pass = worst_eval <= 1.0 + 1e-12 && worst_field <= 1.0 + 1e-12;
  std::ostringstream os;
  os << "worst |P(z)|/bound = " << worst_eval << ", worst ||X_P||/bound = " << worst_field;
  out.details = os.str();
  return out;
}

// 3. homological identity and norm bounds at the calibrated parameters
Outcome criterion3() {
  Lattice lat(1, 6);
  Potential pot = sample_potential(2.0, 1.0, lat, 555);
  Frequencies f = frequencies(pot);
  double gamma = 1e-5;
  Calibration cal = calibrate_nonres(f, 6, gamma, pot.m);
  if (!cal.ok) return {false, "calibration failed on the reference potential"};

  int N = 2;
  double worst_resid = 0.0, worst_z = 0.0, worst_chi = 0.0;
  for (int deg = 3; deg <= 6; ++deg) {
    double chi_bound = std::pow(double(N), cal.nu * deg) / (gamma * std::pow(cal.c0, deg));
    for (std::uint64_t s = 0; s < 200; ++s) {
      Polynomial Q =
          random_homogeneous_poly(lat, deg, 6, 50000 + 1000 * std::uint64_t(deg) + s);
      HomologicalSolution sol = solve_homological(Q, f, N);
      double nq = poly_norm(Q);
      if (nq == 0.0) continue;
      worst_resid =
          std::max(worst_resid, poly_norm(homological_residual(sol.chi, sol.Z, Q, f)) / nq);
      worst_z = std::max(worst_z, poly_norm(sol.Z) / nq);
      worst_chi = std::max(worst_chi, poly_norm(sol.chi) / (chi_bound * nq));
    }
  }
  Outcome out;
  out.pass = worst_resid < 1e-14 && worst_z <= 1.0 + 1e-14 && worst_chi <= 1.0;
  std::ostringstream os;
  os << "residual/||Q|| max " << worst_resid << ", ||Z||/||Q|| max " << worst_z
     << ", ||chi||/bound max " << worst_chi << " (nu=" << cal.nu << ", c0=" << cal.c0 << ")";
  out.details = os.str();
  return out;
}

// 4. conjugacy residual scaling for r in {3,4,5}
Outcome criterion4() {
  Lattice lat(1, 4);
  Frequencies f = freqs_of(2.0, 1.0, lat, 4242);
  SeriesSpec spec;
  spec.terms[{2, 1}] = cplx(0.3, 0.0);
  spec.terms[{1, 2}] = cplx(0.3, 0.0);
  spec.terms[{2, 2}] = 0.25;

  std::vector<double> amps = {1e-2, 5e-3, 2.5e-3};
  Outcome out;
  out.pass = true;
  std::ostringstream os;
  for (int r : {3, 4, 5}) {
    Polynomial P = expand(spec, lat, r, std::max(kDefaultDegreeCap, 2 * r));
    NormalFormResult nf = build_normal_form(P, f, 4, r);
    ConjugacyReport rep = verify_conjugacy(P, nf, f, amps);
    double target = double(r) + 0.8;
    bool ok = rep.indistinguishable_from_zero || rep.slope >= target;
    out.pass = out.pass && ok;
    os << "r=" << r << " slope " << (rep.indistinguishable_from_zero ? -1.0 : rep.slope)
       << " (target " << target << ") ";
  }
  out.details = os.str();
  return out;
}

// 5. tail/norm integral inequalities along 20 normal-form trajectories
Outcome criterion5() {
  Lattice lat(1, 8);
  Frequencies f = freqs_of(2.0, 1.0, lat, 606);
  int N = 3;
  Outcome out;
  out.pass = true;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    int deg = 3 + int(s % 2);
    Polynomial Z = random_normal_form_poly(lat, deg, 6, N, 70000 + s);
    State z0 = 0.5 * random_real_state(lat, 71000 + s, 0.35);
    SimOptions opts;
    opts.rho = 0.3;
    opts.tail_N = N;
    Trajectory traj = flow_poly_hamiltonian({Z}, true, f, z0, 50.0, 4e-3, 250, opts);
    TailInequalityReport rep = check_tail_inequalities(traj, opts.rho, N, deg, poly_norm(Z), 0.05);
    worst = std::max({worst, rep.max_tail_excess, rep.max_norm_excess});
    out.pass = out.pass && rep.tail_ok && rep.norm_ok;
  }
  std::ostringstream os;
  os << "20 trajectories, worst LHS/RHS ratio " << worst << " (allowed 1.05)";
  out.details = os.str();
  return out;
}

// 6. Monte-Carlo measure of violating potentials at calibrated parameters
Outcome criterion6() {
  Lattice lat(1, 6);
  double m = 2.0, R = 0.4, gamma = 1e-7;
  int r_max = 4;

  // calibrate on an independent 20-potential batch: nu fixed by the decay
  // exponents, c0 the worst certified grid value
  double nu = 0.0, c0 = std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < 20; ++s) {
    Calibration cal =
        calibrate_nonres(frequencies(sample_potential(m, R, lat, 900000 + s)), r_max, gamma, m);
    if (!cal.ok) return {false, "calibration failed on the pre-sample batch"};
    nu = cal.nu;
    c0 = std::min(c0, cal.c0);
  }

  MeasureEstimate est = measure_estimate(m, R, lat, NonResParams{gamma, nu, c0}, r_max, 200, 321);
  double bound = 4.0 * std::pow(gamma, 1.0 / 7.0) + 3.0 * est.stderr_value;
  double bound_alt = 4.0 * gamma;  // the stronger printed variant, reported only
  Outcome out;
  out.pass = est.fail_fraction <= bound;
  std::ostringstream os;
  os << "fail fraction " << est.fail_fraction << " +/- " << est.stderr_value << " vs 4 gamma^{1/7}+3se = "
     << bound << " (4 gamma = " << bound_alt << ", nu=" << nu << ", c0=" << c0 << ")";
  out.details = os.str();
  return out;
}

// 7. |Omega(j)| <= N(j)^2 guard and the N(j) product golden values
Outcome criterion7() {
  Lattice lat(1, 6);
  std::int64_t guard = 0;
  std::int64_t checked = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    NonResReport rep = check_nonres(freqs_of(2.0, 0.4, lat, 808000 + s), 4,
                                    NonResParams{1e-8, 12.0, 0.01});
    guard += rep.guard_violations;
    checked += rep.checked_count;
  }
  auto mk = [](std::initializer_list<int> sites) {
    std::vector<Index> e;
    for (int a : sites) e.push_back(Index{make_site({a}), +1});
    return MultiIndex(std::move(e));
  };
  bool golden = std::abs(mk({1, 2, -3}).n_product() - 24.0) < 1e-15 &&
                std::abs(mk({0, 0, 0}).n_product() - 1.0) < 1e-15 &&
                std::abs(mk({5, -5}).n_product() - 36.0) < 1e-15;
  Outcome out;
  out.pass = guard == 0 && golden;
  std::ostringstream os;
  os << "guard violations " << guard << " over " << checked << " tuples, product goldens "
     << (golden ? "ok" : "bad");
  out.details = os.str();
  return out;
}

// 8. action-drift bound and scaling for the gauge-invariant quartic
Outcome criterion8() {
  Lattice lat(1, 16);
  double rho = 0.5;
  Frequencies f = freqs_of(2.0, 1.0, lat, 2024);
  SeriesSpec spec = preset_power(1, 1.0);

  // fixed analytic profile, normalized on the double-width strip
  std::map<Site, cplx> xi;
  for (const Site& a : lat.sites()) xi[a] = std::exp(-3.0 * rho * site_abs(a));
  State profile = state_from_xi(lat, xi);
  double sup = strip_sup(profile, 2.0 * rho, 256);

  std::vector<double> eps_list = {1e-2, 3e-3, 1e-3};
  std::vector<double> drifts;
  Outcome out;
  out.pass = true;
  std::ostringstream os;
  for (double eps : eps_list) {
    State z0 = (eps / sup) * profile;
    SimOptions opts;
    opts.rho = rho;
    opts.tail_N = 8;
    Trajectory traj = simulate(z0, 1e4, 1e-3, 1000, f, spec, opts);
    double max_drift = 0.0;
    for (const ObservableRow& row : traj.observables) max_drift = std::max(max_drift, row.drift);
    drifts.push_back(max_drift);
    bool ok = max_drift <= std::pow(eps, 1.5);
    out.pass = out.pass && ok;
    os << "eps=" << eps << " drift " << max_drift << " bound " << std::pow(eps, 1.5) << "; ";
  }
  double slope = loglog_slope(eps_list, drifts);
  os << "scaling exponent " << slope << " (target >= 1.3)";
  out.pass = out.pass && slope >= 1.3;
  out.details = os.str();
  return out;
}

// 9. integrator orders: Strang energy ratio and exact linear actions
Outcome criterion9() {
  Lattice lat(1, 4);
  Frequencies f = freqs_of(2.0, 1.0, lat, 13);
  SeriesSpec spec = preset_power(1, 1.0);
  std::map<Site, cplx> xi;
  for (const Site& a : lat.sites()) {
    double w = 0.5 * std::exp(-0.25 * site_abs(a));
    xi[a] = cplx(w, 0.45 * w);
  }
  State z0 = state_from_xi(lat, xi);

  auto energy_error = [&](double h) {
    Trajectory traj = simulate(z0, 10.0, h, 10, f, spec);
    double H0 = traj.observables.front().H;
    double worst = 0.0;
    for (const ObservableRow& row : traj.observables) worst = std::max(worst, std::abs(row.H - H0));
    return worst;
  };
  double ratio = energy_error(4e-3) / energy_error(2e-3);

  SeriesSpec none;
  Lattice lat6(1, 6);
  Frequencies f6 = freqs_of(2.0, 1.0, lat6, 7);
  std::map<Site, cplx> xi6;
  for (const Site& a : lat6.sites()) xi6[a] = 0.4 * std::exp(-0.2 * site_abs(a)) * cplx(1.0, 0.3);
  State z6 = state_from_xi(lat6, xi6);
  Trajectory lin = simulate(z6, 10.0, 0.01, 100, f6, none);
  double i0 = lin.observables.front().sum_I;
  double worst_action = 0.0;
  for (const ObservableRow& row : lin.observables)
    worst_action = std::max(worst_action, std::abs(row.sum_I - i0));

  Outcome out;
  out.pass = ratio >= 3.5 && ratio <= 4.5 && worst_action <= 1e-13 * std::max(1.0, i0);
  std::ostringstream os;
  os << "energy error ratio " << ratio << " (target 4 +/- 0.5), linear action drift "
     << worst_action;
  out.details = os.str();
  return out;
}

// 10. coefficient/strip conversion inequalities with the explicit constant
Outcome criterion10() {
  Lattice lat(1, 8);
  double rho = 0.9, mu = 0.45;
  double c = conversion_constant(rho, mu, lat.d);
  Outcome out;
  out.pass = true;
  double worst = 0.0;
  for (double q : {0.6, 0.5, 0.4, 0.3, 0.2, 0.1}) {
    State z(lat);
    for (int a = -lat.K; a <= lat.K; ++a) {
      cplx v = std::pow(q, std::abs(a));
      z.set(Index{make_site({a}), +1}, v);
      z.set(Index{make_site({a}), -1}, v);
    }
    double r1 = norm_rho(z, mu) / (c * strip_sup(z, rho, 256));
    double r2 = strip_sup(z, mu, 256) / (c * norm_rho(z, rho));
    worst = std::max({worst, r1, r2});
    out.pass = out.pass && r1 <= 1.0 + 1e-10 && r2 <= 1.0 + 1e-10;
  }
  std::ostringstream os;
  os << "worst inequality ratio " << worst << " with c(rho,mu) = " << c;
  out.details = os.str();
  return out;
}

}  // namespace

int main() {
  omp_set_num_threads(effective_threads());
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };
  std::vector<Entry> entries = {
      {1, "bracket norm bound", criterion1},
      {2, "evaluation and field bounds", criterion2},
      {3, "homological identity and norms", criterion3},
      {4, "conjugacy residual scaling", criterion4},
      {5, "tail integral inequalities", criterion5},
      {6, "non-resonance Monte Carlo", criterion6},
      {7, "divisor guard and N(j) goldens", criterion7},
      {8, "action-drift bound and scaling", criterion8},
      {9, "integrator orders", criterion9},
      {10, "analytic conversion constants", criterion10},
  };

  bool all = true;
  for (const auto& e : entries) {
    auto t0 = Clock::now();
    Outcome out;
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out.pass = false;
      out.details = std::string("exception: ") + ex.what();
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << e.id << " (" << e.name
              << "): " << out.details << "  [" << std::fixed << std::setprecision(1) << secs
              << "s]\n"
              << std::defaultfloat;
    std::cout.flush();
    all = all && out.pass;
  }
  std::cout << (all ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED") << "\n";
  return all ? 0 : 2;
}

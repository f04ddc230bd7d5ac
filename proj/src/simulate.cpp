#include "nlsnf/simulate.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nlsnf/kahan.hpp"

namespace nlsnf {

namespace {

// Spectral workspace on the square mode box: xi indexed by site_flat, plus an
// M^d physical grid (M = 2K+1, one grid point per mode) and FFTW plans.
struct SpectralWorkspace {
  Lattice lat;
  int M = 0;
  std::int64_t n = 0;  // sites = grid points
  std::vector<cplx> xi;
  std::vector<cplx> phys;
  std::vector<double> weight;      // e^{rho |a|}
  std::vector<double> abs_site;    // |a|
  std::vector<std::int64_t> mode_to_grid;
  fftw_plan fwd = nullptr;  // phys -> modes (with 1/M^d applied afterwards)
  fftw_plan bwd = nullptr;  // modes -> phys
  std::vector<cplx> grid_modes;

  SpectralWorkspace(const Lattice& l, double rho) : lat(l), M(2 * l.K + 1), n(l.site_count()) {
    xi.assign(static_cast<size_t>(n), cplx(0.0));
    phys.assign(static_cast<size_t>(n), cplx(0.0));
    grid_modes.assign(static_cast<size_t>(n), cplx(0.0));
    weight.resize(static_cast<size_t>(n));
    abs_site.resize(static_cast<size_t>(n));
    mode_to_grid.resize(static_cast<size_t>(n));
    for (const Site& a : lat.sites()) {
      auto f = static_cast<size_t>(lat.site_flat(a));
      abs_site[f] = site_abs(a);
      weight[f] = std::exp(rho * abs_site[f]);
      std::int64_t g = 0;
      for (int i = 0; i < lat.d; ++i) g = g * M + ((int(a[i]) % M + M) % M);
      mode_to_grid[f] = g;
    }
    int dims[kMaxDim];
    for (int i = 0; i < lat.d; ++i) dims[i] = M;
    // FFTW_ESTIMATE keeps planning deterministic run to run
    bwd = fftw_plan_dft(lat.d, dims, reinterpret_cast<fftw_complex*>(grid_modes.data()),
                        reinterpret_cast<fftw_complex*>(phys.data()), FFTW_BACKWARD,
                        FFTW_ESTIMATE);
    fwd = fftw_plan_dft(lat.d, dims, reinterpret_cast<fftw_complex*>(phys.data()),
                        reinterpret_cast<fftw_complex*>(grid_modes.data()), FFTW_FORWARD,
                        FFTW_ESTIMATE);
  }
  ~SpectralWorkspace() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  SpectralWorkspace(const SpectralWorkspace&) = delete;

  void modes_to_phys() {
    for (std::int64_t f = 0; f < n; ++f)
      grid_modes[static_cast<size_t>(mode_to_grid[static_cast<size_t>(f)])] =
          xi[static_cast<size_t>(f)];
    fftw_execute(bwd);
  }
  void phys_to_modes() {
    fftw_execute(fwd);
    double inv = 1.0 / double(n);
    for (std::int64_t f = 0; f < n; ++f)
      xi[static_cast<size_t>(f)] =
          grid_modes[static_cast<size_t>(mode_to_grid[static_cast<size_t>(f)])] * inv;
  }
};

std::vector<cplx> xi_from_state(const State& z, const Lattice& lat) {
  std::vector<cplx> xi(static_cast<size_t>(lat.site_count()), cplx(0.0));
  for (const auto& [j, v] : z.coeffs())
    if (j.delta == 1) xi[static_cast<size_t>(lat.site_flat(j.a))] = v;
  return xi;
}

State state_from_xi_vec(const Lattice& lat, const std::vector<cplx>& xi) {
  State z(lat);
  for (std::int64_t f = 0; f < lat.site_count(); ++f) {
    cplx v = xi[static_cast<size_t>(f)];
    if (v == cplx(0.0)) continue;
    Site a = lat.site_from_flat(f);
    z.set(Index{a, +1}, v);
    z.set(Index{a, -1}, std::conj(v));
  }
  return z;
}

struct StrangStepper {
  SpectralWorkspace ws;
  const Frequencies& freqs;
  const SeriesSpec& spec;
  SimOptions opts;
  bool gauge;
  bool linear_only;
  double h = 0.0;
  std::vector<cplx> half_phase;  // e^{-i omega h/2}

  StrangStepper(const Lattice& lat, const Frequencies& f, const SeriesSpec& s,
                const SimOptions& o, double step)
      : ws(lat, o.rho), freqs(f), spec(s), opts(o), gauge(s.gauge_invariant()), h(step) {
    spec.validate();
    linear_only = true;
    for (const auto& [kk, g] : spec.terms)
      if (std::abs(g) != 0.0) linear_only = false;
    half_phase.resize(static_cast<size_t>(ws.n));
    for (std::int64_t f2 = 0; f2 < ws.n; ++f2) {
      double om = freqs.omega[static_cast<size_t>(f2)];
      half_phase[static_cast<size_t>(f2)] = std::exp(cplx(0.0, -om * h / 2.0));
    }
  }

  void linear_half() {
    for (std::int64_t f = 0; f < ws.n; ++f)
      ws.xi[static_cast<size_t>(f)] *= half_phase[static_cast<size_t>(f)];
  }

  void nonlinear_full() {
    if (linear_only) return;
    ws.modes_to_phys();
    if (gauge) {
      for (cplx& u : ws.phys) {
        double s = std::norm(u);
        u *= std::exp(cplx(0.0, -h * spec.gauge_phase(s)));
      }
    } else {
      // pointwise RK4 on du/dt = -i dg/dv2(u, conj u)
      int sub = std::max(1, opts.generic_substeps);
      double hh = h / sub;
      for (cplx& u : ws.phys) {
        for (int s = 0; s < sub; ++s) {
          auto f = [&](cplx w) { return cplx(0.0, -1.0) * spec.d_v2(w, std::conj(w)); };
          cplx k1 = f(u);
          cplx k2 = f(u + 0.5 * hh * k1);
          cplx k3 = f(u + 0.5 * hh * k2);
          cplx k4 = f(u + hh * k3);
          u += (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
      }
    }
    ws.phys_to_modes();
  }

  void step() {
    linear_half();
    nonlinear_full();
    linear_half();
  }

  double energy() {
    KahanSum acc;
    for (std::int64_t f = 0; f < ws.n; ++f)
      acc.add(freqs.omega[static_cast<size_t>(f)] * std::norm(ws.xi[static_cast<size_t>(f)]));
    if (!linear_only) {
      ws.modes_to_phys();
      KahanSum pe;
      for (const cplx& u : ws.phys) pe.add(spec.eval(u, std::conj(u)).real());
      acc.add(pe.value() / double(ws.n));
    }
    return acc.value();
  }

  ObservableRow observe(double t, int tail_N, const std::vector<double>& abs_xi0) {
    ObservableRow row;
    row.t = t;
    KahanSum sum_i, nr, tail, drift;
    for (std::int64_t f = 0; f < ws.n; ++f) {
      auto i = static_cast<size_t>(f);
      double m = std::abs(ws.xi[i]);
      sum_i.add(m * m);
      nr.add(2.0 * ws.weight[i] * m);  // both xi and eta entries carry weight
      if (ws.abs_site[i] > double(tail_N)) tail.add(2.0 * ws.weight[i] * m);
      drift.add(ws.weight[i] * std::abs(m - abs_xi0[i]));
    }
    row.sum_I = sum_i.value();
    row.norm_rho = nr.value();
    row.tail = tail.value();
    row.drift = drift.value();
    row.H = energy();
    return row;
  }
};

}  // namespace

State step_strang(const State& z, double h, const Frequencies& freqs, const SeriesSpec& spec,
                  const SimOptions& opts) {
  if (!z.is_real()) throw std::invalid_argument("step_strang: state must be real");
  StrangStepper st(z.lattice(), freqs, spec, opts, h);
  st.ws.xi = xi_from_state(z, z.lattice());
  st.step();
  for (const cplx& v : st.ws.xi)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::runtime_error("step_strang: non-finite coefficient after step");
  return state_from_xi_vec(z.lattice(), st.ws.xi);
}

Trajectory simulate(const State& z0, double T, double h, int cadence, const Frequencies& freqs,
                    const SeriesSpec& spec, const SimOptions& opts) {
  if (!z0.is_real()) throw std::invalid_argument("simulate: initial state must be real");
  if (cadence < 1) throw std::invalid_argument("simulate: cadence must be >= 1");
  const Lattice& lat = z0.lattice();
  StrangStepper st(lat, freqs, spec, opts, h);
  st.ws.xi = xi_from_state(z0, lat);

  std::vector<double> abs_xi0(st.ws.xi.size());
  for (std::size_t i = 0; i < st.ws.xi.size(); ++i) abs_xi0[i] = std::abs(st.ws.xi[i]);

  Trajectory traj;
  traj.h = h;
  traj.scheme = "strang";
  traj.lat = lat;
  long nsteps = std::lround(std::abs(T) / std::abs(h));
  double dir = T < 0 ? -1.0 : 1.0;
  (void)dir;

  traj.times.push_back(0.0);
  traj.observables.push_back(st.observe(0.0, opts.tail_N, abs_xi0));
  if (!opts.lean) traj.states.push_back(state_from_xi_vec(lat, st.ws.xi));
  double initial_norm = traj.observables.front().norm_rho;

  for (long s = 1; s <= nsteps; ++s) {
    st.step();
    if (s % cadence == 0 || s == nsteps) {
      double t = double(s) * h;
      ObservableRow row = st.observe(t, opts.tail_N, abs_xi0);
      if (!std::isfinite(row.norm_rho) ||
          (opts.blowup_factor > 0 && row.norm_rho > opts.blowup_factor * initial_norm))
        throw std::runtime_error("simulate: blow-up guard tripped at t = " + std::to_string(t));
      traj.times.push_back(t);
      traj.observables.push_back(row);
      if (!opts.lean) traj.states.push_back(state_from_xi_vec(lat, st.ws.xi));
    }
  }
  return traj;
}

Trajectory flow_poly_hamiltonian(const std::vector<Polynomial>& terms, bool with_h0,
                                 const Frequencies& freqs, const State& z0, double T, double h,
                                 int cadence, const SimOptions& opts) {
  if (!z0.is_real()) throw std::invalid_argument("flow_poly_hamiltonian: state must be real");
  for (const Polynomial& p : terms)
    if (!p.is_real())
      throw std::invalid_argument("flow_poly_hamiltonian: Hamiltonian terms must be real");
  const Lattice& lat = z0.lattice();
  CompiledPoly cp = compile_sum(terms, lat);

  // diagonal linear part: xi' += -i omega xi, eta' += +i omega eta
  std::vector<cplx> h0_factor(static_cast<size_t>(lat.index_count()));
  for (std::int64_t f = 0; f < lat.index_count(); ++f) {
    Index j = lat.index_from_flat(f);
    h0_factor[static_cast<size_t>(f)] =
        with_h0 ? cplx(0.0, -double(j.delta) * freqs.at(j)) : cplx(0.0);
  }
  auto field = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] += h0_factor[i] * in[i];
    if (!cp.empty()) apply_field(cp, in, out);
  };

  DenseState z = to_dense(z0);
  long nsteps = std::lround(std::abs(T) / std::abs(h));
  int per_block = cadence;

  Trajectory traj;
  traj.h = h;
  traj.scheme = "rk4";
  traj.lat = lat;
  traj.times.push_back(0.0);
  traj.states.push_back(z0);

  double initial_mass = dense_l1(z);
  long done = 0;
  while (done < nsteps) {
    long block = std::min<long>(per_block, nsteps - done);
    rk4_flow(field, z.v, double(block) * h, int(block), 0.0);
    done += block;
    double mass = dense_l1(z);
    if (!std::isfinite(mass) || (opts.blowup_factor > 0 && mass > opts.blowup_factor * std::max(initial_mass, 1e-300)))
      throw std::runtime_error("flow_poly_hamiltonian: blow-up guard tripped");
    traj.times.push_back(double(done) * h);
    traj.states.push_back(to_sparse(z, 0.0));
  }
  traj.observables = observables(traj, opts.rho, opts.tail_N);
  return traj;
}

std::vector<double> actions_of(const State& z) {
  const Lattice& lat = z.lattice();
  std::vector<double> out(static_cast<size_t>(lat.site_count()), 0.0);
  for (const auto& [j, v] : z.coeffs()) {
    if (j.delta != 1) continue;
    cplx ia = v * z.at(j.conjugate());
    out[static_cast<size_t>(lat.site_flat(j.a))] = ia.real();
  }
  return out;
}

std::vector<ObservableRow> observables(const Trajectory& traj, double rho, int N) {
  std::vector<ObservableRow> rows;
  if (traj.states.empty()) return rows;
  const State& z0 = traj.states.front();
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const State& z = traj.states[i];
    ObservableRow row;
    row.t = traj.times[i];
    row.norm_rho = norm_rho(z, rho);
    row.tail = tail_norm(z, rho, double(N));
    KahanSum sum_i, drift;
    for (const auto& [j, v] : z.coeffs()) {
      if (j.delta != 1) continue;
      double m = std::abs(v);
      sum_i.add(m * m);
      drift.add(std::exp(rho * j.abs()) * std::abs(m - std::abs(z0.at(j))));
    }
    // initial entries that vanished later still contribute to the drift
    for (const auto& [j, v0] : z0.coeffs()) {
      if (j.delta != 1) continue;
      if (z.at(j) == cplx(0.0) && v0 != cplx(0.0))
        drift.add(std::exp(rho * j.abs()) * std::abs(v0));
    }
    row.sum_I = sum_i.value();
    row.drift = drift.value();
    row.H = 0.0;  // polynomial-flow energies are evaluated by the caller
    rows.push_back(row);
  }
  return rows;
}

TailInequalityReport check_tail_inequalities(const Trajectory& traj, double rho, int N, int k,
                                             double z_norm, double slack) {
  if (traj.states.empty())
    throw std::invalid_argument("check_tail_inequalities: trajectory has no stored states");
  TailInequalityReport rep;
  std::vector<double> R(traj.states.size()), n(traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    R[i] = tail_norm(traj.states[i], rho, double(N));
    n[i] = norm_rho(traj.states[i], rho);
  }
  double integral = 0.0;
  const double c = 4.0 * double(k) * double(k) * double(k) * z_norm;
  for (std::size_t i = 0; i < R.size(); ++i) {
    if (i > 0) {
      double dt = traj.times[i] - traj.times[i - 1];
      double gi = R[i] * R[i] * std::pow(n[i], k - 3);
      double gim = R[i - 1] * R[i - 1] * std::pow(n[i - 1], k - 3);
      integral += 0.5 * dt * (gi + gim);
    }
    double rhs_tail = R[0] + c * integral;
    double rhs_norm = n[0] + c * integral;
    double tol_tail = (1.0 + slack) * rhs_tail + 1e-12;
    double tol_norm = (1.0 + slack) * rhs_norm + 1e-12;
    rep.max_tail_excess = std::max(rep.max_tail_excess, rhs_tail > 0 ? R[i] / rhs_tail : 0.0);
    rep.max_norm_excess = std::max(rep.max_norm_excess, rhs_norm > 0 ? n[i] / rhs_norm : 0.0);
    if (R[i] > tol_tail) rep.tail_ok = false;
    if (n[i] > tol_norm) rep.norm_ok = false;
  }
  return rep;
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::ostringstream os;
  os.precision(17);
  os << "t,H,sum_I,norm_rho,tail,drift\n";
  for (const ObservableRow& row : traj.observables)
    os << row.t << "," << row.H << "," << row.sum_I << "," << row.norm_rho << "," << row.tail
       << "," << row.drift << "\n";
  return os.str();
}

}  // namespace nlsnf

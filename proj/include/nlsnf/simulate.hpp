#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlsnf/poly_ops.hpp"
#include "nlsnf/potential.hpp"
#include "nlsnf/series.hpp"

namespace nlsnf {

struct ObservableRow {
  double t = 0.0;
  double H = 0.0;        // H_0 + grid quadrature of g
  double sum_I = 0.0;    // total action
  double norm_rho = 0.0;
  double tail = 0.0;     // mass above N
  double drift = 0.0;    // sum_k e^{rho|k|} | |xi_k(t)| - |xi_k(0)| |
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ObservableRow> observables;
  std::vector<State> states;  // empty in lean mode
  // run configuration
  double h = 0.0;
  std::string scheme;
  Lattice lat;
  std::uint64_t potential_seed = 0;
};

struct SimOptions {
  double rho = 0.5;
  int tail_N = 0;
  bool lean = true;          // record observables only
  double blowup_factor = 10.0;
  int generic_substeps = 1;  // RK4 substeps for non-gauge nonlinear steps
};

// One Strang step: half linear phase rotation, full nonlinear step, half
// linear rotation. For gauge-invariant tables the nonlinear flow is the exact
// pointwise rotation u <- u e^{-i h G'(|u|^2)} through an FFT round trip;
// otherwise a pointwise RK4 substep on the physical-space field.
State step_strang(const State& z, double h, const Frequencies& freqs, const SeriesSpec& spec,
                  const SimOptions& opts = {});

// Fixed-step trajectory with records every `cadence` steps (and at t = T).
// Reality is preserved by construction: only xi evolves, eta = conj(xi).
Trajectory simulate(const State& z0, double T, double h, int cadence, const Frequencies& freqs,
                    const SeriesSpec& spec, const SimOptions& opts = {});

// RK4 trajectory of the polynomial Hamiltonian flow (optionally with H_0).
// States are recorded, so tail inequalities can be checked along the run.
Trajectory flow_poly_hamiltonian(const std::vector<Polynomial>& terms, bool with_h0,
                                 const Frequencies& freqs, const State& z0, double T, double h,
                                 int cadence, const SimOptions& opts = {});

// Observable series recomputed from a stored-state trajectory.
std::vector<ObservableRow> observables(const Trajectory& traj, double rho, int N);

// per-site actions I_a = xi_a eta_a of a real state, by site_flat
std::vector<double> actions_of(const State& z);

// Tail/norm integral inequalities along a trajectory of H_0 + Z:
//   R(t) <= R(0) + 4 k^3 ||Z|| int_0^t R(s)^2 ||z(s)||^{k-3} ds   (tail)
//   n(t) <= n(0) + same right-hand side                           (norm)
// checked at every sample with trapezoid quadrature and relative slack.
struct TailInequalityReport {
  bool tail_ok = true;
  bool norm_ok = true;
  double max_tail_excess = 0.0;  // worst LHS/RHS ratio
  double max_norm_excess = 0.0;
};
TailInequalityReport check_tail_inequalities(const Trajectory& traj, double rho, int N, int k,
                                             double z_norm, double slack = 0.05);

std::string trajectory_to_csv(const Trajectory& traj);

}  // namespace nlsnf

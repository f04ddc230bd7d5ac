#pragma once

#include <functional>
#include <vector>

#include "nlsnf/polynomial.hpp"

namespace nlsnf {

// P(z) = sum_J A_J z_{j_1}...z_{j_l}, compensated accumulation
cplx evaluate(const Polynomial& p, const State& z);

// H_0(z) = sum_a omega_a xi_a eta_a evaluated directly on the stored entries
cplx evaluate_h0(const State& z, const Frequencies& freqs);

// Hamiltonian vector field: component at j = (a, delta) is
// -i delta dP/dz_{conj(j)}.
State vector_field(const Polynomial& p, const State& z);

// Poisson bracket {P,Q} = i sum_a (dP/deta_a dQ/dxi_a - dP/dxi_a dQ/deta_a).
// Output degree k+l-2 per bucket pair; throws when it exceeds the cap.
// `poisson` runs the OpenMP kernel (chunk-ordered merge, deterministic for a
// fixed thread count); `poisson_serial` is the reference kept for testing.
Polynomial poisson(const Polynomial& p, const Polynomial& q);
Polynomial poisson_serial(const Polynomial& p, const Polynomial& q);

// Diagonal bracket with the quadratic part: {H_0, P} has coefficient
// i Omega(J) A_J on every monomial; no generic bracket machinery needed.
Polynomial h0_bracket(const Polynomial& p, const Frequencies& freqs);

// ---- dense representation for flows ----

struct DenseState {
  Lattice lat;
  std::vector<cplx> v;  // by index_flat

  DenseState() = default;
  explicit DenseState(const Lattice& l) : lat(l), v(static_cast<size_t>(l.index_count()), cplx(0.0)) {}
};

DenseState to_dense(const State& z);
State to_sparse(const DenseState& z, double drop_eps = 0.0);
double dense_l1(const DenseState& z);

// Polynomial vector field compiled to flat-slot operations. Built once per
// (polynomial, lattice); evaluation is a tight loop suitable for OpenMP.
struct CompiledPoly {
  struct Op {
    std::int32_t out;            // flat slot receiving the contribution
    cplx factor;                 // i * delta_s * A_J * multiplicity
    std::vector<std::int32_t> in;  // flat slots of the remaining entries
  };
  Lattice lat;
  std::vector<Op> ops;
  bool empty() const { return ops.empty(); }
};

CompiledPoly compile(const Polynomial& p, const Lattice& lat);
CompiledPoly compile_sum(const std::vector<Polynomial>& ps, const Lattice& lat);

// out += X_P(z); omp variant partitions ops and merges buffers in thread order
void apply_field_serial(const CompiledPoly& cp, const std::vector<cplx>& z, std::vector<cplx>& out);
void apply_field(const CompiledPoly& cp, const std::vector<cplx>& z, std::vector<cplx>& out);

cplx evaluate_dense(const Polynomial& p, const DenseState& z);

// Classical RK4 with fixed steps on dz/dt = field(z). The guard aborts when
// the l1 mass exceeds guard_factor times its initial value (0 disables it).
using DenseField = std::function<void(const std::vector<cplx>&, std::vector<cplx>&)>;
void rk4_flow(const DenseField& field, std::vector<cplx>& z, double t_total, int nsteps,
              double guard_factor = 0.0);

}  // namespace nlsnf

// Timing comparison of the OpenMP kernels against their serial references:
// Poisson bracket, compiled vector-field application, non-resonance scan and
// the Monte-Carlo measure loop.

#include <omp.h>

#include <chrono>
#include <iomanip>
#include <iostream>

#include "nlsnf/normal_form.hpp"
#include "nlsnf/sampling.hpp"
#include "nlsnf/threads.hpp"

using namespace nlsnf;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void row(const std::string& name, double serial_ms, double parallel_ms) {
  std::cout << std::left << std::setw(26) << name << std::right << std::fixed
            << std::setprecision(2) << std::setw(12) << serial_ms << std::setw(12) << parallel_ms
            << std::setw(10) << std::setprecision(2) << serial_ms / parallel_ms << "\n";
}

}  // namespace

int main() {
  int threads = effective_threads();
  omp_set_num_threads(threads);
  std::cout << "threads: " << threads << "\n\n";
  std::cout << std::left << std::setw(26) << "kernel" << std::right << std::setw(12) << "serial ms"
            << std::setw(12) << "omp ms" << std::setw(10) << "speedup" << "\n";

  Lattice lat(1, 8);
  Potential pot = sample_potential(2.0, 1.0, lat, 42);
  Frequencies freqs = frequencies(pot);

  {
    Polynomial P = random_homogeneous_poly(lat, 5, 800, 1);
    Polynomial Q = random_homogeneous_poly(lat, 5, 800, 2);
    auto t0 = Clock::now();
    Polynomial a = poisson_serial(P, Q);
    double ts = ms_since(t0);
    t0 = Clock::now();
    Polynomial b = poisson(P, Q);
    double tp = ms_since(t0);
    row("poisson deg5 x deg5", ts, tp);
    if (std::abs(poly_norm(a) - poly_norm(b)) > 1e-9 * poly_norm(a))
      std::cerr << "WARNING: serial/omp bracket mismatch\n";
  }

  {
    Lattice big(1, 24);
    Polynomial P = random_homogeneous_poly(big, 4, 20000, 3);
    CompiledPoly cp = compile(P, big);
    DenseState z = to_dense(random_real_state(big, 4, 0.1));
    std::vector<cplx> out(z.v.size());
    auto t0 = Clock::now();
    for (int i = 0; i < 50; ++i) {
      std::fill(out.begin(), out.end(), cplx(0.0));
      apply_field_serial(cp, z.v, out);
    }
    double ts = ms_since(t0);
    t0 = Clock::now();
    for (int i = 0; i < 50; ++i) {
      std::fill(out.begin(), out.end(), cplx(0.0));
      apply_field(cp, z.v, out);
    }
    double tp = ms_since(t0);
    row("vector field x50", ts, tp);
  }

  {
    NonResParams params{1e-5, 12.0, 0.05};
    auto t0 = Clock::now();
    NonResReport a = check_nonres_serial(freqs, 4, params);
    double ts = ms_since(t0);
    t0 = Clock::now();
    NonResReport b = check_nonres(freqs, 4, params);
    double tp = ms_since(t0);
    row("nonres scan r<=4", ts, tp);
    if (a.checked_count != b.checked_count) std::cerr << "WARNING: scan count mismatch\n";
  }

  {
    NonResParams params{1e-5, 12.0, 0.05};
    Lattice small(1, 5);
    auto t0 = Clock::now();
    MeasureEstimate a = measure_estimate_serial(2.0, 0.4, small, params, 4, 64, 7);
    double ts = ms_since(t0);
    t0 = Clock::now();
    MeasureEstimate b = measure_estimate(2.0, 0.4, small, params, 4, 64, 7);
    double tp = ms_since(t0);
    row("measure 64 trials", ts, tp);
    if (a.fail_fraction != b.fail_fraction) std::cerr << "WARNING: measure mismatch\n";
  }

  return 0;
}

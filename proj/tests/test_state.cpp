#include <cmath>

#include "doctest.h"
#include "nlsnf/rng.hpp"
#include "nlsnf/sampling.hpp"
#include "nlsnf/state.hpp"

using namespace nlsnf;

namespace {
Index xi1(int a) { return Index{make_site({a}), +1}; }
Index eta1(int a) { return Index{make_site({a}), -1}; }
}  // namespace

TEST_CASE("norm_rho on pinned states") {
  Lattice lat(1, 4);
  State z(lat);
  CHECK(norm_rho(z, 0.7) == 0.0);  // empty sum

  z.set(xi1(0), 1.0);
  CHECK(norm_rho(z, 0.0) == doctest::Approx(1.0));
  CHECK(norm_rho(z, 2.5) == doctest::Approx(1.0));  // e^{rho*0} = 1

  State w(lat);
  w.set(Index{make_site({1}), +1}, 0.5);
  w.set(Index{make_site({-1}), -1}, 0.5);
  // 0.5 e + 0.5 e = e
  CHECK(norm_rho(w, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));

  CHECK_THROWS_AS(norm_rho(w, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(z.set(xi1(0), cplx(std::nan(""), 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(z.set(Index{make_site({5}), +1}, 1.0), std::invalid_argument);
}

TEST_CASE("norm_rho properties on random states") {
  Lattice lat(1, 8);
  for (std::uint64_t s = 0; s < 50; ++s) {
    State a = random_real_state(lat, 100 + s, 0.3);
    State b = random_real_state(lat, 200 + s, 0.3);
    double rho = 0.05 * double(s % 10);

    // triangle inequality
    State sum = a;
    sum += b;
    CHECK(norm_rho(sum, rho) <= norm_rho(a, rho) + norm_rho(b, rho) + 1e-12);

    // absolute homogeneity
    double c = -2.5;
    CHECK(norm_rho(c * a, rho) == doctest::Approx(std::abs(c) * norm_rho(a, rho)).epsilon(1e-13));

    // monotonicity in rho
    CHECK(norm_rho(a, rho) <= norm_rho(a, rho + 0.3) + 1e-12);
  }
}

TEST_CASE("tail_norm basics and the exponential tail bound") {
  Lattice lat(1, 6);
  State z = random_real_state(lat, 3, 0.0);

  // beyond the truncation corner the tail is empty
  CHECK(tail_norm(z, 0.4, lat.K * std::sqrt(double(lat.d))) == 0.0);

  // N = 0 with no entry at the origin: tail equals the norm
  State w(lat);
  w.set(xi1(2), 0.3);
  w.set(eta1(2), 0.3);
  CHECK(tail_norm(w, 0.8, 0.0) == doctest::Approx(norm_rho(w, 0.8)));

  CHECK(tail_norm(z, 0.4, 3.0) <= norm_rho(z, 0.4));

  // tail bound: R^N_rho(z) <= e^{-mu N} ||z||_{rho+mu} on random states
  CounterRng rng{99};
  for (int trial = 0; trial < 1000; ++trial) {
    State x = random_real_state(lat, 1000 + std::uint64_t(trial), 0.2);
    double rho = rng.uniform01(1, std::uint64_t(trial)) * 0.5;
    double mu = 0.05 + rng.uniform01(2, std::uint64_t(trial)) * 0.5;
    double N = rng.uniform01(3, std::uint64_t(trial)) * 6.0;
    double lhs = tail_norm(x, rho, N);
    double rhs = std::exp(-mu * N) * norm_rho(x, rho + mu);
    CHECK(lhs <= rhs * (1.0 + 1e-12) + 1e-15);
  }
}

TEST_CASE("reality predicate") {
  Lattice lat(1, 2);
  State z(lat);
  z.set(xi1(1), cplx(0.3, -0.2));
  CHECK_FALSE(z.is_real());
  z.set(eta1(1), cplx(0.3, 0.2));
  CHECK(z.is_real());
  CHECK(random_real_state(lat, 5, 0.1).is_real(0.0));
}

TEST_CASE("state serialization round trips") {
  Lattice lat(2, 3);
  State z = random_real_state(lat, 17, 0.4);

  State zj = state_from_json(state_to_json(z));
  CHECK(zj.size() == z.size());
  for (const auto& [j, v] : z.coeffs()) CHECK(zj.at(j) == v);

  State zc = state_from_csv(state_to_csv(z), lat);
  for (const auto& [j, v] : z.coeffs()) {
    CHECK(zc.at(j).real() == doctest::Approx(v.real()).epsilon(1e-15));
    CHECK(zc.at(j).imag() == doctest::Approx(v.imag()).epsilon(1e-15));
  }
}

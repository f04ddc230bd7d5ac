#include "doctest.h"

#include "nlsnf/index.hpp"
#include "nlsnf/kahan.hpp"
#include "nlsnf/normal_form.hpp"
#include "nlsnf/rational.hpp"
#include "nlsnf/rng.hpp"

using namespace nlsnf;

TEST_CASE("rational arithmetic") {
  Rational a(1, 2), b(1, 3);
  CHECK((a + b) == Rational(5, 6));
  CHECK((a - b) == Rational(1, 6));
  CHECK((a * b) == Rational(1, 6));
  CHECK((a / b) == Rational(3, 2));
  CHECK(Rational(-4, -8) == Rational(1, 2));
  CHECK(Rational(3, -6) == Rational(-1, 2));
  CHECK(Rational(7).to_double() == doctest::Approx(7.0));
  CHECK_THROWS_AS(Rational(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(a / Rational(0), std::invalid_argument);
}

TEST_CASE("binomials") {
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(10, 0) == 1);
  CHECK(binomial(10, 10) == 1);
  CHECK(binomial(33, 16) == 1166803110LL);
}

TEST_CASE("bernoulli numbers from the recurrence") {
  CHECK(bernoulli(0) == Rational(1));
  CHECK(bernoulli(1) == Rational(-1, 2));
  CHECK(bernoulli(2) == Rational(1, 6));
  CHECK(bernoulli(3) == Rational(0));
  CHECK(bernoulli(4) == Rational(-1, 30));
  CHECK(bernoulli(5) == Rational(0));
  CHECK(bernoulli(6) == Rational(1, 42));
  CHECK(bernoulli(8) == Rational(-1, 30));
  CHECK(bernoulli(10) == Rational(5, 66));
  CHECK(bernoulli(12) == Rational(-691, 2730));
  for (int k = 3; k <= 31; k += 2) CHECK(bernoulli(k) == Rational(0));
}

TEST_CASE("counter rng is deterministic and order independent") {
  CounterRng rng{1234};
  double a = rng.uniform_pm_half(7, 0);
  double b = rng.uniform_pm_half(8, 0);
  CHECK(rng.uniform_pm_half(7, 0) == a);
  CHECK(rng.uniform_pm_half(8, 0) == b);
  CHECK(a >= -0.5);
  CHECK(a <= 0.5);
  CounterRng other{1235};
  CHECK(other.uniform_pm_half(7, 0) != a);

  double mean = 0.0;
  for (int i = 0; i < 10000; ++i) mean += rng.uniform_pm_half(1, std::uint64_t(i));
  mean /= 10000;
  CHECK(std::abs(mean) < 0.02);
}

TEST_CASE("kahan summation") {
  KahanSum acc;
  for (int i = 0; i < 10000000; ++i) acc.add(0.1);
  CHECK(acc.value() == doctest::Approx(1e6).epsilon(1e-12));
}

TEST_CASE("index basics") {
  Index j{make_site({3, -4}), +1};
  CHECK(j.abs2() == 25);
  CHECK(j.abs() == doctest::Approx(5.0));
  CHECK(j.conjugate().delta == -1);
  CHECK(j.conjugate().conjugate() == j);
}

TEST_CASE("lattice enumeration round trip") {
  Lattice lat(2, 3);
  CHECK(lat.site_count() == 49);
  CHECK(lat.index_count() == 98);
  for (std::int64_t f = 0; f < lat.index_count(); ++f) {
    Index j = lat.index_from_flat(f);
    CHECK(lat.index_flat(j) == f);
    CHECK(lat.contains(j));
  }
  CHECK_FALSE(lat.contains(make_site({4, 0})));
  CHECK_THROWS_AS(Lattice(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(Lattice(1, -1), std::invalid_argument);
}

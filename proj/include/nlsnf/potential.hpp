#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlsnf/multi_index.hpp"

namespace nlsnf {

// Convolution potential sampled from the product-uniform family:
// v_a = R v'_a / (1+|a|)^m with v'_a i.i.d. uniform on [-1/2, 1/2].
struct Potential {
  Lattice lat;
  double m = 0.0;
  double R = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> v;  // by site_flat

  double at_site(const Site& a) const {
    if (!lat.contains(a)) throw std::invalid_argument("Potential: site off lattice");
    return v[static_cast<size_t>(lat.site_flat(a))];
  }
};

// draws are keyed by site content, so the result does not depend on the
// enumeration order of the lattice
Potential sample_potential(double m, double R, const Lattice& lat, std::uint64_t seed);

// omega_a = |a|^2 + v_a
Frequencies frequencies(const Potential& pot);

struct NonResParams {
  double gamma = 0.0;
  double nu = 0.0;
  double c0 = 0.0;
};

struct Violation {
  MultiIndex j;
  double divisor_value = 0.0;
  double bound_value = 0.0;
};

struct NonResReport {
  double gamma = 0.0, nu = 0.0, c0 = 0.0;
  int r_max = 0, K = 0, d = 1;
  std::int64_t checked_count = 0;
  bool incomplete = false;        // enumeration budget exhausted
  bool zero_momentum_only = false;
  std::vector<Violation> violations;
  std::vector<double> min_abs_divisor_per_r;  // index r-3
  std::vector<std::int64_t> count_per_r;
  std::int64_t guard_violations = 0;  // tuples with |Omega(j)| > N(j)^2

  bool ok() const { return violations.empty() && !incomplete; }
};

struct NonResOptions {
  std::int64_t budget = 50'000'000;
  bool zero_momentum_only = false;
  std::size_t max_recorded_violations = 256;
};

// Enumerates all canonical (unordered) non-resonant multi-indices of lengths
// 3..r_max over the truncated symbol set and records violations of
//   |Omega(j)| >= gamma c0^r / max(mu(j),1)^{nu r}.
// The small-divisor hypothesis quantifies over all non-resonant tuples, not
// only zero-momentum ones; the flag restricts to what the normal form
// actually consumes.
NonResReport check_nonres(const Frequencies& freqs, int r_max, const NonResParams& params,
                          const NonResOptions& opts = {});
NonResReport check_nonres_serial(const Frequencies& freqs, int r_max, const NonResParams& params,
                                 const NonResOptions& opts = {});

std::string nonres_report_to_json(const NonResReport& rep);
std::string nonres_report_stats_csv(const NonResReport& rep);

// |Omega(j) - b| against the accumulation bound C^r gamma / N(j)^exponent
struct SmallDivisorGap {
  double gap = 0.0;
  double bound = 0.0;
  double n_product = 0.0;
};
SmallDivisorGap smalldivisor_gap(const Frequencies& freqs, const MultiIndex& j, std::int64_t b,
                                 double gamma, double C, double exponent);

// |Omega(j) + e1 w_{l1} + e2 w_{l2}| against C^r gamma^7 / N(j)^alpha;
// rejects combined tuples that are resonant
struct ExtendedGap {
  double gap = 0.0;
  double bound = 0.0;
  bool ok = false;
};
ExtendedGap check_extended(const Frequencies& freqs, const MultiIndex& j, const Site& l1,
                           const Site& l2, int eps1, int eps2, double gamma, double C,
                           double alpha);

// Monte-Carlo estimate of the measure of potentials violating the hypothesis
// at fixed (gamma, nu, c0).
struct MeasureEstimate {
  double fail_fraction = 0.0;
  double stderr_value = 0.0;
  int trials = 0;
  std::int64_t total_violations = 0;
};
MeasureEstimate measure_estimate(double m, double R, const Lattice& lat,
                                 const NonResParams& params, int r_max, int trials,
                                 std::uint64_t seed, const NonResOptions& opts = {});
MeasureEstimate measure_estimate_serial(double m, double R, const Lattice& lat,
                                        const NonResParams& params, int r_max, int trials,
                                        std::uint64_t seed, const NonResOptions& opts = {});

// The hypothesis only asserts existence of (nu, c0); make it operational:
// with nu fixed on a grid (default 2(m+d+3) and fallbacks), return the largest
// grid c0 for which no enumerated tuple violates the bound at this potential.
struct Calibration {
  double nu = 0.0;
  double c0 = 0.0;        // grid value actually certified
  double c0_exact = 0.0;  // sharp threshold before snapping down
  bool ok = false;        // false when some divisor vanishes exactly
};
Calibration calibrate_nonres(const Frequencies& freqs, int r_max, double gamma, double m,
                             const NonResOptions& opts = {});

std::string potential_to_json(const Potential& pot);
Potential potential_from_json(const std::string& text);

}  // namespace nlsnf

#include "nlsnf/potential.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "nlsnf/rng.hpp"
#include "nlsnf/threads.hpp"

namespace nlsnf {

Potential sample_potential(double m, double R, const Lattice& lat, std::uint64_t seed) {
  if (!(m > lat.d / 2.0))
    throw std::invalid_argument("sample_potential: decay exponent m must exceed d/2");
  if (!(R > 0.0)) throw std::invalid_argument("sample_potential: R must be positive");
  Potential pot;
  pot.lat = lat;
  pot.m = m;
  pot.R = R;
  pot.seed = seed;
  pot.v.resize(static_cast<size_t>(lat.site_count()));
  CounterRng rng{seed};
  for (const Site& a : lat.sites()) {
    double vp = rng.uniform_pm_half(site_key(a), 0);
    pot.v[static_cast<size_t>(lat.site_flat(a))] = R * vp / std::pow(1.0 + site_abs(a), m);
  }
  return pot;
}

Frequencies frequencies(const Potential& pot) {
  Frequencies f;
  f.lat = pot.lat;
  f.omega.resize(pot.v.size());
  for (const Site& a : pot.lat.sites()) {
    auto flat = static_cast<size_t>(pot.lat.site_flat(a));
    f.omega[flat] = double(site_abs2(a)) + pot.v[flat];
  }
  return f;
}

namespace {

double nonres_bound(double gamma, double c0, double nu, int r, double mu) {
  double mu_hat = std::max(mu, 1.0);
  return gamma * std::pow(c0, r) / std::pow(mu_hat, nu * double(r));
}

// |Omega| over the tuple encoded by symbol ids, maintained incrementally by
// the enumerator; helpers below recompute derived quantities at the leaf
struct TupleScratch {
  std::vector<Index> entries;
};

struct EnumStats {
  std::int64_t checked = 0;
  std::vector<double> min_abs_div;   // per r, index r-3
  std::vector<std::int64_t> count;   // per r
  std::int64_t guard_violations = 0;
  std::vector<Violation> violations;
  bool truncated = false;

  void init(int r_max) {
    min_abs_div.assign(static_cast<size_t>(r_max - 2), std::numeric_limits<double>::infinity());
    count.assign(static_cast<size_t>(r_max - 2), 0);
  }
  void merge(const EnumStats& o) {
    checked += o.checked;
    guard_violations += o.guard_violations;
    truncated = truncated || o.truncated;
    for (std::size_t i = 0; i < min_abs_div.size(); ++i) {
      min_abs_div[i] = std::min(min_abs_div[i], o.min_abs_div[i]);
      count[i] += o.count[i];
    }
    violations.insert(violations.end(), o.violations.begin(), o.violations.end());
  }
};

// multiset counting for the budget guard: C(S + r - 1, r) summed over r
double multiset_total(std::int64_t symbols, int r_max) {
  double total = 0.0;
  for (int r = 3; r <= r_max; ++r) {
    double c = 1.0;
    for (int i = 0; i < r; ++i) c *= double(symbols + r - 1 - i) / double(r - i);
    total += c;
  }
  return total;
}

struct LeafCheck {
  const Frequencies* freqs;
  const NonResParams* params;
  const NonResOptions* opts;

  void operator()(const std::vector<Index>& entries, EnumStats& stats) const {
    MultiIndex j(entries);
    if (opts->zero_momentum_only && !j.zero_momentum()) return;
    if (j.is_resonant()) return;
    int r = j.degree();
    double om = divisor(j, *freqs);
    double bound = nonres_bound(params->gamma, params->c0, params->nu, r, j.mu());
    ++stats.checked;
    auto slot = static_cast<size_t>(r - 3);
    ++stats.count[slot];
    stats.min_abs_div[slot] = std::min(stats.min_abs_div[slot], std::abs(om));
    double np = j.n_product();
    if (std::abs(om) > np * np) ++stats.guard_violations;
    if (std::abs(om) < bound && stats.violations.size() < opts->max_recorded_violations)
      stats.violations.push_back({j, om, bound});
  }
};

// enumerate non-decreasing symbol tuples of length r starting from `first`
template <typename Fn>
void enumerate_from(const std::vector<Index>& symbols, std::vector<Index>& stack, int remaining,
                    std::size_t start, std::int64_t& budget, bool& truncated, Fn&& leaf) {
  if (truncated) return;
  if (remaining == 0) {
    if (budget-- <= 0) {
      truncated = true;
      return;
    }
    leaf(stack);
    return;
  }
  for (std::size_t s = start; s < symbols.size(); ++s) {
    stack.push_back(symbols[s]);
    enumerate_from(symbols, stack, remaining - 1, s, budget, truncated, leaf);
    stack.pop_back();
    if (truncated) return;
  }
}

NonResReport run_check(const Frequencies& freqs, int r_max, const NonResParams& params,
                       const NonResOptions& opts, int nthreads) {
  if (r_max < 3) throw std::invalid_argument("check_nonres: r_max must be >= 3");
  const Lattice& lat = freqs.lat;
  std::vector<Index> symbols = lat.indices();

  NonResReport rep;
  rep.gamma = params.gamma;
  rep.nu = params.nu;
  rep.c0 = params.c0;
  rep.r_max = r_max;
  rep.K = lat.K;
  rep.d = lat.d;
  rep.zero_momentum_only = opts.zero_momentum_only;

  LeafCheck check{&freqs, &params, &opts};

  bool over_budget = multiset_total(std::int64_t(symbols.size()), r_max) > double(opts.budget);
  if (over_budget || nthreads <= 1) {
    // serial path; the budget cutoff keeps partial output deterministic
    EnumStats stats;
    stats.init(r_max);
    std::int64_t budget = opts.budget;
    bool truncated = false;
    for (int r = 3; r <= r_max && !truncated; ++r) {
      std::vector<Index> stack;
      enumerate_from(symbols, stack, r, 0, budget, truncated,
                     [&](const std::vector<Index>& entries) { check(entries, stats); });
    }
    stats.truncated = truncated;
    rep.checked_count = stats.checked;
    rep.incomplete = stats.truncated;
    rep.violations = std::move(stats.violations);
    rep.min_abs_divisor_per_r = std::move(stats.min_abs_div);
    rep.count_per_r = std::move(stats.count);
    rep.guard_violations = stats.guard_violations;
    return rep;
  }

  // parallel over the first symbol; per-slice stats merged in slice order
  std::vector<EnumStats> slices(symbols.size());
  for (auto& s : slices) s.init(r_max);
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
  for (std::size_t s0 = 0; s0 < symbols.size(); ++s0) {
    EnumStats& stats = slices[s0];
    std::int64_t budget = opts.budget;  // global budget already checked above
    bool truncated = false;
    for (int r = 3; r <= r_max; ++r) {
      std::vector<Index> stack{symbols[s0]};
      enumerate_from(symbols, stack, r - 1, s0, budget, truncated,
                     [&](const std::vector<Index>& entries) { check(entries, stats); });
    }
  }
  EnumStats total;
  total.init(r_max);
  for (const EnumStats& s : slices) total.merge(s);
  if (total.violations.size() > opts.max_recorded_violations)
    total.violations.resize(opts.max_recorded_violations);
  rep.checked_count = total.checked;
  rep.incomplete = total.truncated;
  rep.violations = std::move(total.violations);
  rep.min_abs_divisor_per_r = std::move(total.min_abs_div);
  rep.count_per_r = std::move(total.count);
  rep.guard_violations = total.guard_violations;
  return rep;
}

}  // namespace

NonResReport check_nonres(const Frequencies& freqs, int r_max, const NonResParams& params,
                          const NonResOptions& opts) {
  return run_check(freqs, r_max, params, opts, effective_threads());
}

NonResReport check_nonres_serial(const Frequencies& freqs, int r_max, const NonResParams& params,
                                 const NonResOptions& opts) {
  return run_check(freqs, r_max, params, opts, 1);
}

SmallDivisorGap smalldivisor_gap(const Frequencies& freqs, const MultiIndex& j, std::int64_t b,
                                 double gamma, double C, double exponent) {
  SmallDivisorGap out;
  out.n_product = j.n_product();
  out.gap = std::abs(divisor(j, freqs) - double(b));
  out.bound = std::pow(C, j.degree()) * gamma / std::pow(out.n_product, exponent);
  return out;
}

ExtendedGap check_extended(const Frequencies& freqs, const MultiIndex& j, const Site& l1,
                           const Site& l2, int eps1, int eps2, double gamma, double C,
                           double alpha) {
  if (eps1 < -1 || eps1 > 1 || eps2 < -1 || eps2 > 1)
    throw std::invalid_argument("check_extended: eps must be in {-1,0,1}");
  std::vector<Index> combined = j.entries();
  if (eps1 != 0) combined.push_back(Index{l1, std::int8_t(eps1)});
  if (eps2 != 0) combined.push_back(Index{l2, std::int8_t(eps2)});
  MultiIndex full(std::move(combined));
  if (full.is_resonant())
    throw std::invalid_argument("check_extended: combined tuple " + full.str(freqs.lat.d) +
                                " is resonant");
  ExtendedGap out;
  double lhs = divisor(j, freqs);
  if (eps1 != 0) lhs += double(eps1) * freqs.at_site(l1);
  if (eps2 != 0) lhs += double(eps2) * freqs.at_site(l2);
  out.gap = std::abs(lhs);
  out.bound = std::pow(C, j.degree()) * std::pow(gamma, 7) / std::pow(j.n_product(), alpha);
  out.ok = out.gap >= out.bound;
  return out;
}

namespace {

MeasureEstimate run_measure(double m, double R, const Lattice& lat, const NonResParams& params,
                            int r_max, int trials, std::uint64_t seed, const NonResOptions& opts,
                            int nthreads) {
  if (trials < 1) throw std::invalid_argument("measure_estimate: trials must be >= 1");
  CounterRng rng{seed};
  std::vector<int> fail(static_cast<size_t>(trials), 0);
  std::vector<std::int64_t> viol(static_cast<size_t>(trials), 0);
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
  for (int t = 0; t < trials; ++t) {
    Potential pot = sample_potential(m, R, lat, rng.child(std::uint64_t(t)));
    NonResOptions local = opts;
    local.max_recorded_violations = 1;  // only need existence
    NonResReport rep = check_nonres_serial(frequencies(pot), r_max, params, local);
    fail[static_cast<size_t>(t)] = rep.violations.empty() ? 0 : 1;
    viol[static_cast<size_t>(t)] = std::int64_t(rep.violations.size());
  }
  MeasureEstimate est;
  est.trials = trials;
  int nfail = 0;
  for (int t = 0; t < trials; ++t) {
    nfail += fail[static_cast<size_t>(t)];
    est.total_violations += viol[static_cast<size_t>(t)];
  }
  est.fail_fraction = double(nfail) / double(trials);
  est.stderr_value = std::sqrt(est.fail_fraction * (1.0 - est.fail_fraction) / double(trials));
  return est;
}

}  // namespace

MeasureEstimate measure_estimate(double m, double R, const Lattice& lat,
                                 const NonResParams& params, int r_max, int trials,
                                 std::uint64_t seed, const NonResOptions& opts) {
  return run_measure(m, R, lat, params, r_max, trials, seed, opts, effective_threads());
}

MeasureEstimate measure_estimate_serial(double m, double R, const Lattice& lat,
                                        const NonResParams& params, int r_max, int trials,
                                        std::uint64_t seed, const NonResOptions& opts) {
  return run_measure(m, R, lat, params, r_max, trials, seed, opts, 1);
}

Calibration calibrate_nonres(const Frequencies& freqs, int r_max, double gamma, double m,
                             const NonResOptions& opts) {
  const int d = freqs.lat.d;
  const double nu_base = m + d + 3.0;
  Calibration cal;
  for (double nu : {2.0 * nu_base, 3.0 * nu_base, 4.0 * nu_base}) {
    // sharp threshold: c0 <= (|Omega| mu_hat^{nu r} / gamma)^{1/r} for all j
    NonResParams probe{gamma, nu, 0.0};
    double c0_exact = std::numeric_limits<double>::infinity();
    bool vanished = false;

    NonResOptions scan = opts;
    scan.max_recorded_violations = 0;
    // reuse the enumerator by scanning with c0 = 0 (no violations possible)
    // and recomputing the threshold from the per-tuple quantities
    const Lattice& lat = freqs.lat;
    std::vector<Index> symbols = lat.indices();
    std::int64_t budget = scan.budget;
    bool truncated = false;
    for (int r = 3; r <= r_max && !truncated; ++r) {
      std::vector<Index> stack;
      enumerate_from(symbols, stack, r, 0, budget, truncated, [&](const std::vector<Index>& e) {
        MultiIndex j{std::vector<Index>(e)};
        if (scan.zero_momentum_only && !j.zero_momentum()) return;
        if (j.is_resonant()) return;
        double om = std::abs(divisor(j, freqs));
        if (om == 0.0) {
          vanished = true;
          return;
        }
        double mu_hat = std::max(j.mu(), 1.0);
        double c = std::pow(om * std::pow(mu_hat, nu * r) / gamma, 1.0 / double(r));
        c0_exact = std::min(c0_exact, c);
      });
    }
    (void)probe;
    if (vanished) {
      cal.nu = nu;
      cal.ok = false;
      return cal;
    }
    // snap down to a log grid; calibration must certify, not flatter
    double c0_grid = 0.0;
    for (int k = -64; k <= 0; ++k) {
      double g = std::pow(10.0, double(k) / 8.0);
      if (g <= c0_exact) c0_grid = std::max(c0_grid, g);
    }
    if (c0_grid > 0.0) {
      cal.nu = nu;
      cal.c0 = c0_grid;
      cal.c0_exact = c0_exact;
      cal.ok = true;
      return cal;
    }
  }
  return cal;
}

using nlohmann::json;

std::string potential_to_json(const Potential& pot) {
  json out;
  out["d"] = pot.lat.d;
  out["K"] = pot.lat.K;
  out["m"] = pot.m;
  out["R"] = pot.R;
  out["seed"] = pot.seed;
  json values = json::array();
  for (const Site& a : pot.lat.sites()) {
    json e;
    json site = json::array();
    for (int i = 0; i < pot.lat.d; ++i) site.push_back(int(a[i]));
    e["a"] = site;
    e["v"] = pot.at_site(a);
    values.push_back(e);
  }
  out["v"] = values;
  return out.dump(2);
}

Potential potential_from_json(const std::string& text) {
  json in = json::parse(text);
  Potential pot;
  pot.lat = Lattice(in.at("d").get<int>(), in.at("K").get<int>());
  pot.m = in.at("m").get<double>();
  pot.R = in.at("R").get<double>();
  pot.seed = in.at("seed").get<std::uint64_t>();
  pot.v.assign(static_cast<size_t>(pot.lat.site_count()), 0.0);
  for (const auto& e : in.at("v")) {
    Site a{};
    for (int i = 0; i < pot.lat.d; ++i) a[i] = std::int16_t(e.at("a")[i].get<int>());
    pot.v[static_cast<size_t>(pot.lat.site_flat(a))] = e.at("v").get<double>();
  }
  return pot;
}

std::string nonres_report_to_json(const NonResReport& rep) {
  json out;
  out["gamma"] = rep.gamma;
  out["nu"] = rep.nu;
  out["c0"] = rep.c0;
  out["r_max"] = rep.r_max;
  out["K"] = rep.K;
  out["d"] = rep.d;
  out["checked_count"] = rep.checked_count;
  out["incomplete"] = rep.incomplete;
  out["zero_momentum_only"] = rep.zero_momentum_only;
  out["guard_violations"] = rep.guard_violations;
  json viols = json::array();
  for (const auto& v : rep.violations) {
    json e;
    json idx = json::array();
    for (const Index& ix : v.j.entries()) {
      json one = json::array();
      for (int i = 0; i < rep.d; ++i) one.push_back(int(ix.a[i]));
      one.push_back(int(ix.delta));
      idx.push_back(one);
    }
    e["indices"] = idx;
    e["divisor"] = v.divisor_value;
    e["bound"] = v.bound_value;
    viols.push_back(e);
  }
  out["violations"] = viols;
  json stats = json::array();
  for (std::size_t i = 0; i < rep.min_abs_divisor_per_r.size(); ++i) {
    json row;
    row["r"] = int(i) + 3;
    row["count"] = rep.count_per_r[i];
    row["min_abs_divisor"] =
        std::isfinite(rep.min_abs_divisor_per_r[i]) ? rep.min_abs_divisor_per_r[i] : -1.0;
    stats.push_back(row);
  }
  out["divisor_stats"] = stats;
  return out.dump(2);
}

std::string nonres_report_stats_csv(const NonResReport& rep) {
  std::ostringstream os;
  os.precision(17);
  os << "r,count,min_abs_divisor,violations\n";
  for (std::size_t i = 0; i < rep.min_abs_divisor_per_r.size(); ++i) {
    std::int64_t viol = 0;
    for (const auto& v : rep.violations)
      if (v.j.degree() == int(i) + 3) ++viol;
    os << int(i) + 3 << "," << rep.count_per_r[i] << ","
       << (std::isfinite(rep.min_abs_divisor_per_r[i]) ? rep.min_abs_divisor_per_r[i] : -1.0)
       << "," << viol << "\n";
  }
  return os.str();
}

}  // namespace nlsnf

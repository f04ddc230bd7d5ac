#include "nlsnf/series.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace nlsnf {

void SeriesSpec::validate() const {
  for (const auto& [kk, g] : terms) {
    auto [k1, k2] = kk;
    if (k1 < 0 || k2 < 0) throw std::invalid_argument("SeriesSpec: negative exponent");
    if (std::abs(g) == 0.0) continue;
    if (k1 + k2 <= 2)
      throw std::invalid_argument("SeriesSpec: nonzero coefficient below total degree 3");
    auto it = terms.find({k2, k1});
    cplx mirror = it == terms.end() ? cplx(0.0) : it->second;
    if (std::abs(mirror - std::conj(g)) > 1e-14 * (1.0 + std::abs(g)))
      throw std::invalid_argument("SeriesSpec: reality constraint g_{k2,k1} = conj(g_{k1,k2}) violated");
  }
  if (!(R0 > 0.0)) throw std::invalid_argument("SeriesSpec: R0 must be positive");
}

int SeriesSpec::max_total_degree() const {
  int m = 0;
  for (const auto& [kk, g] : terms)
    if (std::abs(g) != 0.0) m = std::max(m, kk.first + kk.second);
  return m;
}

double SeriesSpec::sup_bound() const {
  if (M > 0.0) return M;
  double s = 0.0;
  for (const auto& [kk, g] : terms) s += std::abs(g);
  return s;
}

bool SeriesSpec::gauge_invariant() const {
  for (const auto& [kk, g] : terms) {
    if (std::abs(g) == 0.0) continue;
    if (kk.first != kk.second || std::abs(g.imag()) > 1e-14 * std::abs(g)) return false;
  }
  return true;
}

cplx SeriesSpec::eval(cplx v1, cplx v2) const {
  cplx s = 0.0;
  for (const auto& [kk, g] : terms) {
    cplx t = g;
    for (int i = 0; i < kk.first; ++i) t *= v1;
    for (int i = 0; i < kk.second; ++i) t *= v2;
    s += t;
  }
  return s;
}

cplx SeriesSpec::d_v2(cplx v1, cplx v2) const {
  cplx s = 0.0;
  for (const auto& [kk, g] : terms) {
    if (kk.second == 0) continue;
    cplx t = g * double(kk.second);
    for (int i = 0; i < kk.first; ++i) t *= v1;
    for (int i = 0; i < kk.second - 1; ++i) t *= v2;
    s += t;
  }
  return s;
}

double SeriesSpec::gauge_phase(double s) const {
  // d/ds of G(s) = sum_k g_{k,k} s^k
  double out = 0.0;
  for (const auto& [kk, g] : terms) {
    if (kk.first != kk.second || kk.first == 0) continue;
    out += g.real() * kk.first * std::pow(s, kk.first - 1);
  }
  return out;
}

SeriesSpec preset_power(int p, double a) {
  if (p < 1) throw std::invalid_argument("preset_power: p must be >= 1");
  SeriesSpec spec;
  spec.terms[{p + 1, p + 1}] = a / double(p + 1);
  return spec;
}

SeriesSpec parse_series_spec(const std::string& text) {
  if (text.rfind("power:", 0) == 0) {
    int p = 1;
    double a = 1.0;
    std::string args = text.substr(6);
    std::istringstream is(args);
    std::string tok;
    while (std::getline(is, tok, ',')) {
      auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("parse_series_spec: bad token " + tok);
      std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "p")
        p = std::stoi(val);
      else if (key == "a")
        a = std::stod(val);
      else
        throw std::invalid_argument("parse_series_spec: unknown key " + key);
    }
    return preset_power(p, a);
  }
  if (!text.empty() && text.front() == '{') return series_from_json(text);
  throw std::invalid_argument("parse_series_spec: cannot parse '" + text + "'");
}

using nlohmann::json;

std::string series_to_json(const SeriesSpec& spec) {
  json out;
  json terms = json::array();
  for (const auto& [kk, g] : spec.terms) {
    json e;
    e["k1"] = kk.first;
    e["k2"] = kk.second;
    e["re"] = g.real();
    e["im"] = g.imag();
    terms.push_back(e);
  }
  out["terms"] = terms;
  out["R0"] = spec.R0;
  out["M"] = spec.M;
  return out.dump(2);
}

SeriesSpec series_from_json(const std::string& text) {
  json in = json::parse(text);
  SeriesSpec spec;
  for (const auto& e : in.at("terms"))
    spec.terms[{e.at("k1").get<int>(), e.at("k2").get<int>()}] =
        cplx(e.at("re").get<double>(), e.value("im", 0.0));
  spec.R0 = in.value("R0", 1.0);
  spec.M = in.value("M", 0.0);
  return spec;
}

namespace {

// number of ordered arrangements of the xi-part and eta-part multisets
double arrangement_count(const MultiIndex& j) {
  double num = 1.0;
  int n_xi = 0, n_eta = 0;
  j.for_each_run([&](const Index& ix, int mult, std::size_t) {
    double fact = 1.0;
    for (int i = 2; i <= mult; ++i) fact *= i;
    num /= fact;
    (ix.delta > 0 ? n_xi : n_eta) += mult;
  });
  for (int i = 2; i <= n_xi; ++i) num *= i;
  for (int i = 2; i <= n_eta; ++i) num *= i;
  return num;
}

// enumerate non-decreasing site multisets of given length
template <typename Fn>
void site_multisets(const Lattice& lat, int length, Fn&& fn) {
  std::vector<Site> sites = lat.sites();
  std::vector<std::size_t> chosen;
  std::function<void(std::size_t, int)> rec = [&](std::size_t start, int remaining) {
    if (remaining == 0) {
      fn(chosen);
      return;
    }
    for (std::size_t s = start; s < sites.size(); ++s) {
      chosen.push_back(s);
      rec(s, remaining - 1);
      chosen.pop_back();
    }
  };
  rec(0, length);
}

}  // namespace

Polynomial expand(const SeriesSpec& spec, const Lattice& lat, int kmax, int degree_cap) {
  spec.validate();
  if (kmax > degree_cap) throw std::invalid_argument("expand: kmax exceeds degree cap");
  Polynomial out(degree_cap);
  std::vector<Site> sites = lat.sites();

  for (const auto& [kk, g] : spec.terms) {
    auto [k1, k2] = kk;
    if (std::abs(g) == 0.0 || k1 + k2 > kmax || k1 + k2 < 3) continue;

    // choose the xi-site multiset, then the eta-site multiset whose sum
    // matches the xi momentum
    site_multisets(lat, k1, [&](const std::vector<std::size_t>& xi_choice) {
      std::array<std::int64_t, kMaxDim> mom{};
      for (std::size_t s : xi_choice)
        for (int i = 0; i < kMaxDim; ++i) mom[i] += sites[s][i];

      std::vector<std::size_t> eta_choice;
      std::function<void(std::size_t, int, std::array<std::int64_t, kMaxDim>)> rec =
          [&](std::size_t start, int remaining, std::array<std::int64_t, kMaxDim> need) {
            if (remaining == 0) {
              for (int i = 0; i < kMaxDim; ++i)
                if (need[i] != 0) return;
              std::vector<Index> entries;
              entries.reserve(static_cast<size_t>(k1 + k2));
              for (std::size_t s : xi_choice) entries.push_back(Index{sites[s], +1});
              for (std::size_t s : eta_choice) entries.push_back(Index{sites[s], -1});
              MultiIndex j(std::move(entries));
              out.add(j, g * arrangement_count(j));
              return;
            }
            for (int i = 0; i < lat.d; ++i) {
              std::int64_t cap = std::int64_t(remaining) * lat.K;
              if (need[i] > cap || need[i] < -cap) return;
            }
            for (std::size_t s = start; s < sites.size(); ++s) {
              eta_choice.push_back(s);
              auto next = need;
              for (int i = 0; i < kMaxDim; ++i) next[i] -= sites[s][i];
              rec(s, remaining - 1, next);
              eta_choice.pop_back();
            }
          };
      rec(0, k2, mom);
    });
  }
  out.prune(0.0);
  return out;
}

cplx ordered_coefficient(const Polynomial& p, const MultiIndex& j) {
  cplx c = p.coefficient(j);
  if (std::abs(c) == 0.0) return 0.0;
  return c / arrangement_count(j);
}

}  // namespace nlsnf

#include "nlsnf/polynomial.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace nlsnf {

void Polynomial::add(const MultiIndex& j, cplx c) {
  int deg = j.degree();
  if (deg < 2) throw std::invalid_argument("Polynomial::add: degree must be >= 2");
  if (deg > cap_)
    throw std::invalid_argument("Polynomial::add: degree " + std::to_string(deg) +
                                " exceeds cap " + std::to_string(cap_));
  if (!j.zero_momentum())
    throw std::invalid_argument("Polynomial::add: nonzero momentum monomial");
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
    throw std::invalid_argument("Polynomial::add: non-finite coefficient");
  buckets_[deg][j] += c;
}

void Polynomial::axpy(cplx s, const Polynomial& other) {
  for (const auto& [deg, map] : other.buckets_) {
    if (deg > cap_)
      throw std::invalid_argument("Polynomial::axpy: degree exceeds cap");
    Map& dst = buckets_[deg];
    for (const auto& [j, c] : map) dst[j] += s * c;
  }
}

const Polynomial::Map& Polynomial::bucket(int degree) const {
  static const Map kEmpty;
  auto it = buckets_.find(degree);
  return it == buckets_.end() ? kEmpty : it->second;
}

std::vector<int> Polynomial::degrees() const {
  std::vector<int> out;
  for (const auto& [deg, map] : buckets_)
    if (!map.empty()) out.push_back(deg);
  return out;
}

int Polynomial::max_degree() const {
  int m = 0;
  for (const auto& [deg, map] : buckets_)
    if (!map.empty()) m = std::max(m, deg);
  return m;
}

bool Polynomial::empty() const {
  for (const auto& [deg, map] : buckets_)
    if (!map.empty()) return false;
  return true;
}

std::size_t Polynomial::term_count() const {
  std::size_t n = 0;
  for (const auto& [deg, map] : buckets_) n += map.size();
  return n;
}

cplx Polynomial::coefficient(const MultiIndex& j) const {
  auto bit = buckets_.find(j.degree());
  if (bit == buckets_.end()) return 0.0;
  auto it = bit->second.find(j);
  return it == bit->second.end() ? cplx(0.0) : it->second;
}

void Polynomial::prune(double eps) {
  for (auto& [deg, map] : buckets_) {
    for (auto it = map.begin(); it != map.end();) {
      if (std::abs(it->second) <= eps)
        it = map.erase(it);
      else
        ++it;
    }
  }
}

bool Polynomial::is_real(double tol) const {
  for (const auto& [deg, map] : buckets_) {
    for (const auto& [j, c] : map) {
      cplx cc = coefficient(j.conjugated());
      if (std::abs(cc - std::conj(c)) > tol) return false;
    }
  }
  return true;
}

Polynomial Polynomial::conjugated() const {
  Polynomial out(cap_);
  for (const auto& [deg, map] : buckets_)
    for (const auto& [j, c] : map) out.buckets_[deg][j.conjugated()] = std::conj(c);
  return out;
}

Polynomial operator*(cplx s, const Polynomial& p) {
  Polynomial out(p.cap_);
  out.axpy(s, p);
  return out;
}

double poly_norm(const Polynomial& p) {
  double total = 0.0;
  for (int deg : p.degrees()) {
    double sup = 0.0;
    for (const auto& [j, c] : p.bucket(deg)) sup = std::max(sup, std::abs(c));
    total += sup;
  }
  return total;
}

std::pair<Polynomial, Polynomial> nform_split(const Polynomial& p, int N) {
  Polynomial z_part(p.degree_cap()), rest(p.degree_cap());
  for (int deg : p.degrees()) {
    for (const auto& [j, c] : p.bucket(deg)) {
      if (j.is_resonant() || j.mu() > double(N))
        z_part.add(j, c);
      else
        rest.add(j, c);
    }
  }
  return {std::move(z_part), std::move(rest)};
}

bool is_normal_form(const Polynomial& p, int N) {
  for (int deg : p.degrees())
    for (const auto& [j, c] : p.bucket(deg))
      if (std::abs(c) != 0.0 && !j.is_resonant() && !(j.mu() > double(N))) return false;
  return true;
}

using nlohmann::json;

std::string polynomial_to_json(const Polynomial& p) {
  json out = json::array();
  for (int deg : p.degrees()) {
    json bucket;
    bucket["degree"] = deg;
    json entries = json::array();
    for (const auto& [j, c] : p.bucket(deg)) {
      json e;
      json idx = json::array();
      for (const Index& ix : j.entries()) {
        json one = json::array();
        for (int i = 0; i < kMaxDim; ++i) one.push_back(int(ix.a[i]));
        one.push_back(int(ix.delta));
        idx.push_back(one);
      }
      e["indices"] = idx;
      e["re"] = c.real();
      e["im"] = c.imag();
      entries.push_back(e);
    }
    bucket["entries"] = entries;
    out.push_back(bucket);
  }
  return out.dump(2);
}

Polynomial polynomial_from_json(const std::string& text, int degree_cap) {
  json in = json::parse(text);
  Polynomial p(degree_cap);
  for (const auto& bucket : in) {
    for (const auto& e : bucket.at("entries")) {
      std::vector<Index> entries;
      for (const auto& one : e.at("indices")) {
        Index ix;
        int n = int(one.size()) - 1;
        if (n > kMaxDim) throw std::invalid_argument("polynomial_from_json: bad index");
        for (int i = 0; i < n; ++i) ix.a[i] = std::int16_t(one[i].get<int>());
        ix.delta = std::int8_t(one[n].get<int>());
        entries.push_back(ix);
      }
      p.add(MultiIndex(std::move(entries)),
            cplx(e.at("re").get<double>(), e.at("im").get<double>()));
    }
  }
  return p;
}

}  // namespace nlsnf

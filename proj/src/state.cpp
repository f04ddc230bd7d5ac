#include "nlsnf/state.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "nlsnf/kahan.hpp"

namespace nlsnf {

std::string to_string(const Index& j, int d) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < d; ++i) os << j.a[i] << (i + 1 < d ? "," : "");
  os << (j.delta > 0 ? ";+" : ";-") << ")";
  return os.str();
}

void State::set(const Index& j, cplx v) {
  if (!lat_.contains(j)) throw std::invalid_argument("State::set: index off lattice");
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw std::invalid_argument("State::set: non-finite coefficient");
  coeffs_[j] = v;
}

void State::add(const Index& j, cplx v) {
  if (!lat_.contains(j)) throw std::invalid_argument("State::add: index off lattice");
  coeffs_[j] += v;
}

bool State::is_real(double tol) const {
  for (const auto& [j, v] : coeffs_) {
    cplx w = at(j.conjugate());
    if (std::abs(w - std::conj(v)) > tol) return false;
  }
  return true;
}

State State::conjugated() const {
  State out(lat_);
  for (const auto& [j, v] : coeffs_) out.coeffs_[j.conjugate()] = std::conj(v);
  return out;
}

State operator*(double s, const State& z) {
  State out(z.lat_);
  for (const auto& [j, v] : z.coeffs_) out.coeffs_[j] = s * v;
  return out;
}

State& State::operator+=(const State& o) {
  for (const auto& [j, v] : o.coeffs_) coeffs_[j] += v;
  return *this;
}

double norm_rho(const State& z, double rho) {
  if (rho < 0) throw std::invalid_argument("norm_rho: rho must be >= 0");
  KahanSum acc;
  for (const auto& [j, v] : z.coeffs()) {
    double m = std::abs(v);
    if (!std::isfinite(m)) throw std::invalid_argument("norm_rho: non-finite coefficient");
    acc.add(std::exp(rho * j.abs()) * m);
  }
  return acc.value();
}

double tail_norm(const State& z, double rho, double N) {
  if (rho < 0) throw std::invalid_argument("tail_norm: rho must be >= 0");
  if (N < 0) throw std::invalid_argument("tail_norm: N must be >= 0");
  KahanSum acc;
  for (const auto& [j, v] : z.coeffs()) {
    double aj = j.abs();
    if (aj <= N) continue;
    double m = std::abs(v);
    if (!std::isfinite(m)) throw std::invalid_argument("tail_norm: non-finite coefficient");
    acc.add(std::exp(rho * aj) * m);
  }
  return acc.value();
}

State state_from_xi(const Lattice& lat, const std::map<Site, cplx>& xi) {
  State z(lat);
  for (const auto& [a, v] : xi) {
    z.set(Index{a, +1}, v);
    z.set(Index{a, -1}, std::conj(v));
  }
  return z;
}

using nlohmann::json;

static json index_to_json(const Index& j, int d) {
  json arr = json::array();
  for (int i = 0; i < d; ++i) arr.push_back(j.a[i]);
  arr.push_back(int(j.delta));
  return arr;
}

static Index index_from_json(const json& arr) {
  if (!arr.is_array() || arr.size() < 2) throw std::invalid_argument("bad index entry");
  Index j;
  int d = int(arr.size()) - 1;
  if (d > kMaxDim) throw std::invalid_argument("bad index entry: dimension too large");
  for (int i = 0; i < d; ++i) j.a[i] = static_cast<std::int16_t>(arr[i].get<int>());
  int delta = arr[d].get<int>();
  if (delta != 1 && delta != -1) throw std::invalid_argument("bad index entry: delta");
  j.delta = static_cast<std::int8_t>(delta);
  return j;
}

std::string state_to_json(const State& z) {
  const Lattice& lat = z.lattice();
  json out;
  out["d"] = lat.d;
  out["K"] = lat.K;
  json entries = json::array();
  for (const auto& [j, v] : z.coeffs()) {
    json e;
    e["index"] = index_to_json(j, lat.d);
    e["re"] = v.real();
    e["im"] = v.imag();
    entries.push_back(e);
  }
  out["entries"] = entries;
  return out.dump(2);
}

State state_from_json(const std::string& text) {
  json in = json::parse(text);
  Lattice lat(in.at("d").get<int>(), in.at("K").get<int>());
  State z(lat);
  for (const auto& e : in.at("entries")) {
    Index j = index_from_json(e.at("index"));
    z.set(j, cplx(e.at("re").get<double>(), e.at("im").get<double>()));
  }
  return z;
}

std::string state_to_csv(const State& z) {
  const Lattice& lat = z.lattice();
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < lat.d; ++i) os << "a" << i + 1 << ",";
  os << "delta,re,im\n";
  for (const auto& [j, v] : z.coeffs()) {
    for (int i = 0; i < lat.d; ++i) os << j.a[i] << ",";
    os << int(j.delta) << "," << v.real() << "," << v.imag() << "\n";
  }
  return os.str();
}

State state_from_csv(const std::string& text, const Lattice& lat) {
  State z(lat);
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (first) { first = false; continue; }  // header
    std::istringstream ls(line);
    std::string tok;
    Index j;
    for (int i = 0; i < lat.d; ++i) {
      std::getline(ls, tok, ',');
      j.a[i] = static_cast<std::int16_t>(std::stoi(tok));
    }
    std::getline(ls, tok, ',');
    j.delta = static_cast<std::int8_t>(std::stoi(tok));
    std::getline(ls, tok, ',');
    double re = std::stod(tok);
    std::getline(ls, tok, ',');
    double im = std::stod(tok);
    z.set(j, cplx(re, im));
  }
  return z;
}

}  // namespace nlsnf

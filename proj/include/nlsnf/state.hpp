#pragma once

#include <complex>
#include <map>
#include <string>

#include "nlsnf/index.hpp"

namespace nlsnf {

using cplx = std::complex<double>;

// Sparse coefficient sequence on a truncated lattice. Keys are kept sorted so
// every reduction over a state visits entries in the same order.
class State {
 public:
  using Map = std::map<Index, cplx>;

  State() = default;
  explicit State(const Lattice& lat) : lat_(lat) {}

  const Lattice& lattice() const { return lat_; }
  const Map& coeffs() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }
  std::size_t size() const { return coeffs_.size(); }

  void set(const Index& j, cplx v);
  void add(const Index& j, cplx v);
  cplx at(const Index& j) const {
    auto it = coeffs_.find(j);
    return it == coeffs_.end() ? cplx(0.0) : it->second;
  }

  // z real  <=>  z_{conj(j)} = conj(z_j) for every stored j
  bool is_real(double tol = 1e-12) const;

  State conjugated() const;

  friend State operator*(double s, const State& z);
  State& operator+=(const State& o);

 private:
  Lattice lat_;
  Map coeffs_;
};

// weighted l1 norm  sum_j e^{rho |j|} |z_j|
double norm_rho(const State& z, double rho);

// tail mass  sum_{|j| > N} e^{rho |j|} |z_j|
double tail_norm(const State& z, double rho, double N);

// convenience: real state from xi coefficients (eta = conj(xi))
State state_from_xi(const Lattice& lat, const std::map<Site, cplx>& xi);

// serialization
std::string state_to_json(const State& z);
State state_from_json(const std::string& text);
std::string state_to_csv(const State& z);
State state_from_csv(const std::string& text, const Lattice& lat);

}  // namespace nlsnf

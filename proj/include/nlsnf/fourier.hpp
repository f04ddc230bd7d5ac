#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "nlsnf/state.hpp"

namespace nlsnf {

// Conversion constant of the coefficient/strip inequalities:
//   c_{rho,mu} = (2 / (1 - e^{(mu-rho)/sqrt(d)}))^d,  mu < rho.
double conversion_constant(double rho, double mu, int d);

// DFT of uniformly sampled torus values, normalized so that
//   xi_a = M^{-d} sum_x u(x) e^{-i a.x},
// keeping only modes in the lattice box. The grid must resolve the box
// (M >= 2K+1 per dimension), otherwise kept modes alias.
// Returns a real state: eta entries are the conjugates of the xi entries.
State from_function(const std::vector<cplx>& samples,
                    const std::array<int, kMaxDim>& grid_dims, const Lattice& lat);

// Evaluate u(x+iy) = sum_a xi_a e^{i a.(x+iy)} at complexified points.
std::vector<cplx> to_function(const State& z,
                              const std::vector<std::array<cplx, kMaxDim>>& points);

// Uniform real grid samples of u (y = 0), M points per dimension, row-major.
std::vector<cplx> sample_on_grid(const State& z, int M);

// sup of |u| over the strip |y| <= mu, estimated on the boundary |y| = mu
// along a fixed set of directions with nx samples per x-dimension.
double strip_sup(const State& z, double mu, int nx = 64);

// Binary grid container: magic "NLSG", uint64 LE header length, JSON header
// {d, K, grid, dtype}, then row-major complex payload.
void write_grid_file(const std::string& path, const Lattice& lat,
                     const std::array<int, kMaxDim>& grid_dims,
                     const std::vector<cplx>& data, bool single_precision = false);
std::vector<cplx> read_grid_file(const std::string& path, Lattice& lat_out,
                                 std::array<int, kMaxDim>& dims_out);

}  // namespace nlsnf

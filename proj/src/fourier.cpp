#include "nlsnf/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "json.hpp"

namespace nlsnf {

double conversion_constant(double rho, double mu, int d) {
  if (!(mu < rho)) throw std::invalid_argument("conversion_constant: need mu < rho");
  double q = std::exp((mu - rho) / std::sqrt(double(d)));
  double base = 2.0 / (1.0 - q);
  double c = 1.0;
  for (int i = 0; i < d; ++i) c *= base;
  return c;
}

State from_function(const std::vector<cplx>& samples,
                    const std::array<int, kMaxDim>& grid_dims, const Lattice& lat) {
  std::int64_t total = 1;
  for (int i = 0; i < lat.d; ++i) {
    if (grid_dims[i] < 2 * lat.K + 1)
      throw std::invalid_argument("from_function: grid too coarse, need >= 2K+1 points per dimension");
    total *= grid_dims[i];
  }
  if (std::int64_t(samples.size()) != total)
    throw std::invalid_argument("from_function: sample count does not match grid dims");

  std::vector<cplx> work(samples);
  // FFTW_FORWARD computes X_k = sum_n x_n e^{-2 pi i k n / M}: exactly the
  // analysis sum for x_n = 2 pi n / M.
  int dims[kMaxDim];
  for (int i = 0; i < lat.d; ++i) dims[i] = grid_dims[i];
  fftw_plan plan = fftw_plan_dft(
      lat.d, dims, reinterpret_cast<fftw_complex*>(work.data()),
      reinterpret_cast<fftw_complex*>(work.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  double inv = 1.0 / double(total);
  State z(lat);
  for (const Site& a : lat.sites()) {
    std::int64_t flat = 0;
    for (int i = 0; i < lat.d; ++i) {
      int m = grid_dims[i];
      int k = (int(a[i]) % m + m) % m;
      flat = flat * m + k;
    }
    cplx xi = work[flat] * inv;
    z.set(Index{a, +1}, xi);
    z.set(Index{a, -1}, std::conj(xi));
  }
  return z;
}

std::vector<cplx> to_function(const State& z,
                              const std::vector<std::array<cplx, kMaxDim>>& points) {
  const int d = z.lattice().d;
  std::vector<cplx> out(points.size(), cplx(0.0));
  for (std::size_t p = 0; p < points.size(); ++p) {
    cplx acc = 0.0;
    for (const auto& [j, v] : z.coeffs()) {
      if (j.delta != 1) continue;
      cplx phase = 0.0;
      for (int i = 0; i < d; ++i) phase += double(j.a[i]) * points[p][i];
      acc += v * std::exp(cplx(0.0, 1.0) * phase);
    }
    out[p] = acc;
  }
  return out;
}

std::vector<cplx> sample_on_grid(const State& z, int M) {
  const int d = z.lattice().d;
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= M;
  std::vector<std::array<cplx, kMaxDim>> pts(static_cast<size_t>(total));
  const double twopi = 2.0 * std::numbers::pi;
  for (std::int64_t f = 0; f < total; ++f) {
    std::int64_t rem = f;
    for (int i = d - 1; i >= 0; --i) {
      pts[f][i] = cplx(twopi * double(rem % M) / M, 0.0);
      rem /= M;
    }
  }
  return to_function(z, pts);
}

double strip_sup(const State& z, double mu, int nx) {
  const int d = z.lattice().d;
  const double twopi = 2.0 * std::numbers::pi;
  // boundary directions: +/- each axis, +/- the diagonal (|y| = mu)
  std::vector<std::array<double, kMaxDim>> dirs;
  for (int i = 0; i < d; ++i) {
    std::array<double, kMaxDim> e{};
    e[i] = 1.0;
    dirs.push_back(e);
    e[i] = -1.0;
    dirs.push_back(e);
  }
  if (d > 1) {
    std::array<double, kMaxDim> diag{};
    for (int i = 0; i < d; ++i) diag[i] = 1.0 / std::sqrt(double(d));
    dirs.push_back(diag);
    for (int i = 0; i < d; ++i) diag[i] = -diag[i];
    dirs.push_back(diag);
  }

  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= nx;

  double sup = 0.0;
  std::vector<std::array<cplx, kMaxDim>> pts;
  pts.reserve(static_cast<size_t>(total));
  for (const auto& dir : dirs) {
    pts.clear();
    for (std::int64_t f = 0; f < total; ++f) {
      std::array<cplx, kMaxDim> pt{};
      std::int64_t rem = f;
      for (int i = d - 1; i >= 0; --i) {
        pt[i] = cplx(twopi * double(rem % nx) / nx, mu * dir[i]);
        rem /= nx;
      }
      pts.push_back(pt);
    }
    for (const cplx& v : to_function(z, pts)) sup = std::max(sup, std::abs(v));
  }
  return sup;
}

using nlohmann::json;

void write_grid_file(const std::string& path, const Lattice& lat,
                     const std::array<int, kMaxDim>& grid_dims,
                     const std::vector<cplx>& data, bool single_precision) {
  json header;
  header["d"] = lat.d;
  header["K"] = lat.K;
  json dims = json::array();
  for (int i = 0; i < lat.d; ++i) dims.push_back(grid_dims[i]);
  header["grid"] = dims;
  header["dtype"] = single_precision ? "complex64" : "complex128";
  header["order"] = "row-major";
  std::string htext = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_grid_file: cannot open " + path);
  os.write("NLSG", 4);
  std::uint64_t hlen = htext.size();
  os.write(reinterpret_cast<const char*>(&hlen), 8);
  os.write(htext.data(), std::streamsize(htext.size()));
  if (single_precision) {
    std::vector<std::complex<float>> buf(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
      buf[i] = std::complex<float>(float(data[i].real()), float(data[i].imag()));
    os.write(reinterpret_cast<const char*>(buf.data()),
             std::streamsize(buf.size() * sizeof(std::complex<float>)));
  } else {
    os.write(reinterpret_cast<const char*>(data.data()),
             std::streamsize(data.size() * sizeof(cplx)));
  }
}

std::vector<cplx> read_grid_file(const std::string& path, Lattice& lat_out,
                                 std::array<int, kMaxDim>& dims_out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_grid_file: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "NLSG", 4) != 0)
    throw std::runtime_error("read_grid_file: bad magic in " + path);
  std::uint64_t hlen = 0;
  is.read(reinterpret_cast<char*>(&hlen), 8);
  std::string htext(hlen, '\0');
  is.read(htext.data(), std::streamsize(hlen));
  json header = json::parse(htext);

  lat_out = Lattice(header.at("d").get<int>(), header.at("K").get<int>());
  dims_out = {};
  std::int64_t total = 1;
  for (int i = 0; i < lat_out.d; ++i) {
    dims_out[i] = header.at("grid")[i].get<int>();
    total *= dims_out[i];
  }
  std::string dtype = header.at("dtype").get<std::string>();

  std::vector<cplx> data(static_cast<size_t>(total));
  if (dtype == "complex64") {
    std::vector<std::complex<float>> buf(static_cast<size_t>(total));
    is.read(reinterpret_cast<char*>(buf.data()),
            std::streamsize(buf.size() * sizeof(std::complex<float>)));
    for (std::size_t i = 0; i < buf.size(); ++i) data[i] = cplx(buf[i].real(), buf[i].imag());
  } else if (dtype == "complex128") {
    is.read(reinterpret_cast<char*>(data.data()), std::streamsize(total * std::int64_t(sizeof(cplx))));
  } else {
    throw std::runtime_error("read_grid_file: unsupported dtype " + dtype);
  }
  if (!is) throw std::runtime_error("read_grid_file: truncated payload in " + path);
  return data;
}

}  // namespace nlsnf

#include "nlsnf/poly_ops.hpp"

#include <omp.h>

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "nlsnf/kahan.hpp"
#include "nlsnf/threads.hpp"

namespace nlsnf {

cplx evaluate(const Polynomial& p, const State& z) {
  KahanSum re, im;
  for (int deg : p.degrees()) {
    for (const auto& [j, c] : p.bucket(deg)) {
      cplx prod = c;
      for (const Index& ix : j.entries()) {
        prod *= z.at(ix);
        if (prod == cplx(0.0)) break;
      }
      re.add(prod.real());
      im.add(prod.imag());
    }
  }
  return {re.value(), im.value()};
}

cplx evaluate_h0(const State& z, const Frequencies& freqs) {
  KahanSum re, im;
  for (const auto& [j, v] : z.coeffs()) {
    if (j.delta != 1) continue;
    cplx t = freqs.at(j) * v * z.at(j.conjugate());
    re.add(t.real());
    im.add(t.imag());
  }
  return {re.value(), im.value()};
}

State vector_field(const Polynomial& p, const State& z) {
  State out(z.lattice());
  for (int deg : p.degrees()) {
    for (const auto& [j, c] : p.bucket(deg)) {
      j.for_each_run([&](const Index& s, int mult, std::size_t pos) {
        cplx prod = c * double(mult);
        for (std::size_t i = 0; i < j.entries().size(); ++i) {
          if (i == pos) continue;  // skip one copy of s
          prod *= z.at(j.entries()[i]);
          if (prod == cplx(0.0)) break;
        }
        if (prod != cplx(0.0))
          out.add(s.conjugate(), cplx(0.0, double(s.delta)) * prod);
      });
    }
  }
  return out;
}

namespace {

struct IndexHash {
  std::size_t operator()(const Index& j) const {
    return std::hash<std::uint64_t>()(site_key(j.a) * 2 + (j.delta > 0 ? 1 : 0));
  }
};

struct MonoRef {
  const MultiIndex* j;
  cplx c;
};

// per-site occurrence table of one degree bucket
using SiteTable = std::unordered_map<Index, std::vector<std::pair<std::int32_t, int>>, IndexHash>;

SiteTable build_site_table(const std::vector<MonoRef>& monos) {
  SiteTable table;
  for (std::int32_t m = 0; m < std::int32_t(monos.size()); ++m) {
    monos[m].j->for_each_run([&](const Index& s, int mult, std::size_t) {
      table[s].push_back({m, mult});
    });
  }
  return table;
}

// contributions of one P-monomial against everything in the Q-side table
void bracket_row(const MonoRef& pm, const std::vector<MonoRef>& qmonos, const SiteTable& qtable,
                 Polynomial& out) {
  pm.j->for_each_run([&](const Index& s, int mp, std::size_t pos_p) {
    auto it = qtable.find(s.conjugate());
    if (it == qtable.end()) return;
    // {.,.} = i (eta-in-P xi-in-Q) - i (xi-in-P eta-in-Q)
    cplx base = cplx(0.0, -double(s.delta)) * pm.c * double(mp);
    for (const auto& [qi, mq] : it->second) {
      const MonoRef& qm = qmonos[static_cast<size_t>(qi)];
      // locate one position of conj(s) in the Q monomial
      std::size_t pos_q = 0;
      const auto& qe = qm.j->entries();
      while (qe[pos_q] != s.conjugate()) ++pos_q;
      MultiIndex key = MultiIndex::merged(*pm.j, pos_p, *qm.j, pos_q);
      out.add(key, base * qm.c * double(mq));
    }
  });
}

std::vector<MonoRef> bucket_refs(const Polynomial& p, int deg) {
  std::vector<MonoRef> out;
  out.reserve(p.bucket(deg).size());
  for (const auto& [j, c] : p.bucket(deg)) out.push_back({&j, c});
  return out;
}

}  // namespace

Polynomial poisson_serial(const Polynomial& p, const Polynomial& q) {
  int cap = std::max(p.degree_cap(), q.degree_cap());
  Polynomial out(cap);
  for (int k : p.degrees()) {
    auto pmonos = bucket_refs(p, k);
    for (int l : q.degrees()) {
      if (k + l - 2 > cap)
        throw std::invalid_argument("poisson: output degree " + std::to_string(k + l - 2) +
                                    " exceeds cap " + std::to_string(cap));
      auto qmonos = bucket_refs(q, l);
      SiteTable qtable = build_site_table(qmonos);
      for (const MonoRef& pm : pmonos) bracket_row(pm, qmonos, qtable, out);
    }
  }
  out.prune(0.0);
  return out;
}

Polynomial poisson(const Polynomial& p, const Polynomial& q) {
  int cap = std::max(p.degree_cap(), q.degree_cap());
  Polynomial out(cap);
  int nthreads = effective_threads();
  for (int k : p.degrees()) {
    auto pmonos = bucket_refs(p, k);
    for (int l : q.degrees()) {
      if (k + l - 2 > cap)
        throw std::invalid_argument("poisson: output degree " + std::to_string(k + l - 2) +
                                    " exceeds cap " + std::to_string(cap));
      auto qmonos = bucket_refs(q, l);
      SiteTable qtable = build_site_table(qmonos);
      std::int64_t work = std::int64_t(pmonos.size()) * std::int64_t(qmonos.size());
      if (nthreads <= 1 || work < 4096) {
        for (const MonoRef& pm : pmonos) bracket_row(pm, qmonos, qtable, out);
        continue;
      }
      std::vector<Polynomial> partial(static_cast<size_t>(nthreads), Polynomial(cap));
#pragma omp parallel num_threads(nthreads)
      {
        int t = omp_get_thread_num();
        int nt = omp_get_num_threads();
        std::size_t lo = pmonos.size() * std::size_t(t) / std::size_t(nt);
        std::size_t hi = pmonos.size() * std::size_t(t + 1) / std::size_t(nt);
        for (std::size_t i = lo; i < hi; ++i)
          bracket_row(pmonos[i], qmonos, qtable, partial[static_cast<size_t>(t)]);
      }
      for (const Polynomial& part : partial) out += part;  // thread-order merge
    }
  }
  out.prune(0.0);
  return out;
}

Polynomial h0_bracket(const Polynomial& p, const Frequencies& freqs) {
  Polynomial out(p.degree_cap());
  for (int deg : p.degrees())
    for (const auto& [j, c] : p.bucket(deg))
      out.add(j, cplx(0.0, divisor(j, freqs)) * c);
  out.prune(0.0);
  return out;
}

DenseState to_dense(const State& z) {
  DenseState out(z.lattice());
  for (const auto& [j, v] : z.coeffs()) out.v[static_cast<size_t>(z.lattice().index_flat(j))] = v;
  return out;
}

State to_sparse(const DenseState& z, double drop_eps) {
  State out(z.lat);
  for (std::int64_t f = 0; f < std::int64_t(z.v.size()); ++f)
    if (std::abs(z.v[static_cast<size_t>(f)]) > drop_eps)
      out.set(z.lat.index_from_flat(f), z.v[static_cast<size_t>(f)]);
  return out;
}

double dense_l1(const DenseState& z) {
  KahanSum acc;
  for (const cplx& v : z.v) acc.add(std::abs(v));
  return acc.value();
}

CompiledPoly compile(const Polynomial& p, const Lattice& lat) {
  CompiledPoly cp;
  cp.lat = lat;
  for (int deg : p.degrees()) {
    for (const auto& [j, c] : p.bucket(deg)) {
      for (const Index& ix : j.entries())
        if (!lat.contains(ix))
          throw std::invalid_argument("compile: monomial index off lattice");
      j.for_each_run([&](const Index& s, int mult, std::size_t pos) {
        CompiledPoly::Op op;
        op.out = std::int32_t(lat.index_flat(s.conjugate()));
        op.factor = cplx(0.0, double(s.delta)) * c * double(mult);
        for (std::size_t i = 0; i < j.entries().size(); ++i)
          if (i != pos) op.in.push_back(std::int32_t(lat.index_flat(j.entries()[i])));
        cp.ops.push_back(std::move(op));
      });
    }
  }
  return cp;
}

CompiledPoly compile_sum(const std::vector<Polynomial>& ps, const Lattice& lat) {
  Polynomial total(ps.empty() ? kDefaultDegreeCap : ps.front().degree_cap());
  for (const Polynomial& p : ps) total += p;
  return compile(total, lat);
}

void apply_field_serial(const CompiledPoly& cp, const std::vector<cplx>& z,
                        std::vector<cplx>& out) {
  for (const auto& op : cp.ops) {
    cplx prod = op.factor;
    for (std::int32_t slot : op.in) prod *= z[static_cast<size_t>(slot)];
    out[static_cast<size_t>(op.out)] += prod;
  }
}

void apply_field(const CompiledPoly& cp, const std::vector<cplx>& z, std::vector<cplx>& out) {
  int nthreads = effective_threads();
  if (nthreads <= 1 || cp.ops.size() < 2048) {
    apply_field_serial(cp, z, out);
    return;
  }
  std::vector<std::vector<cplx>> buf(static_cast<size_t>(nthreads),
                                     std::vector<cplx>(out.size(), cplx(0.0)));
#pragma omp parallel num_threads(nthreads)
  {
    int t = omp_get_thread_num();
    int nt = omp_get_num_threads();
    std::size_t lo = cp.ops.size() * std::size_t(t) / std::size_t(nt);
    std::size_t hi = cp.ops.size() * std::size_t(t + 1) / std::size_t(nt);
    auto& local = buf[static_cast<size_t>(t)];
    for (std::size_t i = lo; i < hi; ++i) {
      const auto& op = cp.ops[i];
      cplx prod = op.factor;
      for (std::int32_t slot : op.in) prod *= z[static_cast<size_t>(slot)];
      local[static_cast<size_t>(op.out)] += prod;
    }
  }
  for (const auto& local : buf)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += local[i];
}

cplx evaluate_dense(const Polynomial& p, const DenseState& z) {
  KahanSum re, im;
  for (int deg : p.degrees()) {
    for (const auto& [j, c] : p.bucket(deg)) {
      cplx prod = c;
      for (const Index& ix : j.entries()) prod *= z.v[static_cast<size_t>(z.lat.index_flat(ix))];
      re.add(prod.real());
      im.add(prod.imag());
    }
  }
  return {re.value(), im.value()};
}

void rk4_flow(const DenseField& field, std::vector<cplx>& z, double t_total, int nsteps,
              double guard_factor) {
  if (nsteps <= 0) throw std::invalid_argument("rk4_flow: nsteps must be positive");
  const double h = t_total / nsteps;
  const std::size_t n = z.size();
  std::vector<cplx> k1(n), k2(n), k3(n), k4(n), tmp(n);
  double initial_mass = 0.0;
  if (guard_factor > 0.0)
    for (const cplx& v : z) initial_mass += std::abs(v);

  for (int step = 0; step < nsteps; ++step) {
    std::fill(k1.begin(), k1.end(), cplx(0.0));
    field(z, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k1[i];
    std::fill(k2.begin(), k2.end(), cplx(0.0));
    field(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k2[i];
    std::fill(k3.begin(), k3.end(), cplx(0.0));
    field(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + h * k3[i];
    std::fill(k4.begin(), k4.end(), cplx(0.0));
    field(tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      z[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    if (guard_factor > 0.0) {
      double mass = 0.0;
      for (const cplx& v : z) mass += std::abs(v);
      if (mass > guard_factor * initial_mass && mass > 1e-300)
        throw std::runtime_error("rk4_flow: divergence guard tripped at step " +
                                 std::to_string(step + 1));
    }
  }
}

}  // namespace nlsnf

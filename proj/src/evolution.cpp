#include "knscatter/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "knscatter/fft.hpp"
#include "knscatter/jost.hpp"
#include "knscatter/parallel.hpp"

namespace kn {

namespace {

double outer_mass(const Potential& q, double fraction) {
  const GridSpec& g = q.grid;
  const double edge = (1.0 - fraction) * g.L;
  double s = 0.0;
  for (std::size_t j = 0; j < g.n; ++j)
    if (std::abs(g.x(j)) >= edge) s += std::norm(q.samples[j]);
  return s * g.dx();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

Drift relative_drift(const Conserved& c0, const Conserved& c) {
  if (c0.M == 0.0) return {};
  // Energies that vanish initially (the algebraic soliton) are measured against M.
  auto scaled = [&](double h, double h0) {
    return std::abs(h0) < 1e-6 * c0.M ? std::abs(h - h0) / c0.M : rel(h, h0);
  };
  return {rel(c.M, c0.M), scaled(c.H1, c0.H1), scaled(c.H2, c0.H2)};
}

EvolutionState evolve(const Potential& q0, double T, const EvolutionOptions& opts) {
  const GridSpec& g = q0.grid;
  const std::size_t n = g.n;
  const double sup0 = q0.sup_norm();
  const double xi_cut = opts.dealias * g.nyquist();
  double dt = opts.dt;
  if (dt <= 0.0) dt = sup0 > 0.0 ? std::min(1e-3, 0.25 / (sup0 * sup0 * xi_cut)) : 1e-3;
  if (dt * sup0 * sup0 * xi_cut > 1.0)
    throw Error(Errc::precondition, "time step violates dt ||q||_inf^2 xi_max <= 1");
  const std::size_t steps = T == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(std::abs(T) / dt - 1e-9));
  const double h = steps ? T / static_cast<double>(steps) : 0.0;

  std::vector<double> xi(n), mask(n);
  std::vector<cplx> E(n), E2(n);
  for (std::size_t m = 0; m < n; ++m) {
    xi[m] = g.xi(m);
    mask[m] = std::abs(xi[m]) < xi_cut ? 1.0 : 0.0;
    E[m] = std::exp(cplx(0.0, -xi[m] * xi[m] * h));
    E2[m] = std::exp(cplx(0.0, -xi[m] * xi[m] * h / 2.0));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  // h times the nonlinear term -(|q|^2 q)' in Fourier variables.
  std::vector<cplx> u(n);
  auto nonlinear = [&](const std::vector<cplx>& qh, std::vector<cplx>& out) {
    for (std::size_t m = 0; m < n; ++m) u[m] = qh[m] * mask[m] * inv_n;
    fft::inverse(u);
    for (auto& v : u) v *= std::norm(v);
    fft::forward(u);
    out.resize(n);
    for (std::size_t m = 0; m < n; ++m) out[m] = cplx(0.0, -xi[m] * h) * u[m] * mask[m];
  };

  EvolutionState st;
  st.q = q0;
  st.dt = h;
  const Conserved c0 = conserved(q0);
  const double edge0 = outer_mass(q0, opts.boundary_fraction);
  std::vector<cplx> qh = q0.samples;
  fft::forward(qh);
  std::vector<cplx> k1, k2, k3, k4, tmp(n);
  std::vector<double> snaps = opts.snapshot_times;
  std::sort(snaps.begin(), snaps.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  std::size_t next_snap = 0;

  auto to_physical = [&] {
    std::vector<cplx> s = qh;
    fft::inverse(s);
    for (auto& v : s) v *= inv_n;
    st.q.samples = std::move(s);
  };
  auto guards = [&] {
    if (st.q.sup_norm() > opts.blowup_factor * std::max(sup0, 1e-300) && sup0 > 0.0)
      throw Error(Errc::blowup, "sup norm of q exceeded the blowup guard");
    if (outer_mass(st.q, opts.boundary_fraction) - edge0 > opts.boundary_tol * std::max(c0.M, 1e-300))
      throw Error(Errc::boundary_contamination, "mass reached the periodic boundary");
  };
  auto take_snapshots = [&](double t, bool last) {
    while (next_snap < snaps.size() &&
           (std::abs(snaps[next_snap]) <= std::abs(t) + 0.5 * std::abs(h) || last)) {
      st.snapshots.push_back({t, st.q});
      ++next_snap;
    }
  };

  take_snapshots(0.0, false);
  for (std::size_t s = 0; s < steps; ++s) {
    nonlinear(qh, k1);
    for (std::size_t m = 0; m < n; ++m) tmp[m] = E2[m] * (qh[m] + 0.5 * k1[m]);
    nonlinear(tmp, k2);
    for (std::size_t m = 0; m < n; ++m) tmp[m] = E2[m] * qh[m] + 0.5 * k2[m];
    nonlinear(tmp, k3);
    for (std::size_t m = 0; m < n; ++m) tmp[m] = E[m] * qh[m] + E2[m] * k3[m];
    nonlinear(tmp, k4);
    for (std::size_t m = 0; m < n; ++m)
      qh[m] = E[m] * qh[m] + (E[m] * k1[m] + 2.0 * E2[m] * (k2[m] + k3[m]) + k4[m]) / 6.0;

    const double t = h * static_cast<double>(s + 1);
    const bool last = s + 1 == steps;
    const bool sample = opts.drift_every > 0 && ((s + 1) % static_cast<std::size_t>(opts.drift_every) == 0);
    const bool want_snap = next_snap < snaps.size() && std::abs(snaps[next_snap]) <= std::abs(t) + 0.5 * std::abs(h);
    if (sample || last || want_snap) {
      to_physical();
      guards();
      if (sample || last) st.history.push_back({t, relative_drift(c0, conserved(st.q))});
      take_snapshots(t, last);
    }
  }
  if (steps == 0) take_snapshots(0.0, true);
  st.t = steps ? h * static_cast<double>(steps) : 0.0;
  st.steps = steps;
  st.drift = relative_drift(c0, conserved(st.q));
  return st;
}

IsospectralReport isospectral_check(const Potential& q0, double T, const std::vector<cplx>& k,
                                    const std::vector<double>& lambda, const EvolutionOptions& opts) {
  IsospectralReport r;
  r.T = T;
  r.k = k;
  r.lambda = lambda;
  r.state = evolve(q0, T, opts);
  const EvolutionState& st = r.state;
  r.drift = st.drift;
  r.steps = st.steps;
  r.dt = st.dt;
  const JostSolver s0(q0), s1(st.q);
  r.a0.resize(k.size());
  r.aT.resize(k.size());
  parallel_for(2 * k.size(), [&](std::size_t i) {
    const std::size_t m = i / 2;
    if (i % 2 == 0) r.a0[m] = s0.transmission_value(k[m], 2);
    else r.aT[m] = s1.transmission_value(k[m], 2);
  });
  for (std::size_t m = 0; m < k.size(); ++m) r.a_residual = std::max(r.a_residual, std::abs(r.aT[m] - r.a0[m]));
  r.b0.resize(lambda.size());
  r.bT.resize(lambda.size());
  parallel_for(2 * lambda.size(), [&](std::size_t i) {
    const std::size_t m = i / 2;
    const auto p = SpectralPoint::from_lambda(cplx(lambda[m], 0.0));
    const JostData d = (i % 2 == 0 ? s0 : s1).jost_matrix(p, false);
    (i % 2 == 0 ? r.b0 : r.bT)[m] = d.b.value_or(cplx(0.0));
  });
  for (std::size_t m = 0; m < lambda.size(); ++m) {
    const double l4 = std::pow(lambda[m], 4);
    const cplx stated = std::exp(cplx(0.0, -4.0 * l4 * T)) * r.b0[m];
    const cplx conj_law = std::exp(cplx(0.0, 4.0 * l4 * T)) * r.b0[m];
    r.b_residual = std::max(r.b_residual, std::abs(r.bT[m] - stated));
    r.b_residual_conjugate = std::max(r.b_residual_conjugate, std::abs(r.bT[m] - conj_law));
  }
  return r;
}

}  // namespace kn

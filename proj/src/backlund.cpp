#include "knscatter/backlund.hpp"

#include <algorithm>
#include <cmath>

#include "knscatter/fredholm.hpp"
#include "knscatter/jost.hpp"
#include "knscatter/parallel.hpp"

namespace kn {

namespace {

double norm2(const std::array<cplx, 2>& v) { return std::norm(v[0]) + std::norm(v[1]); }

double cross_sine(const std::array<cplx, 2>& u, const std::array<cplx, 2>& v) {
  const double nu = std::sqrt(norm2(u)), nv = std::sqrt(norm2(v));
  if (nu == 0.0 || nv == 0.0) return 1.0;
  return std::abs(u[0] * v[1] - u[1] * v[0]) / (nu * nv);
}

}  // namespace

BoundState shoot(const Potential& q, cplx z, double match_tol) {
  const GridSpec& g = q.grid;
  const std::size_t n = g.n;
  const SpectralPoint p = SpectralPoint::from_k(z);
  const JostSolver solver(q, JostOptions{0.4, false});
  const ColumnProfile left = solver.left_column(p, n - 1, 2);
  const ColumnProfile right = solver.right_column(p, 0, 2);

  // Stripped columns: psi_L = e^{-izx} v, psi_R = e^{izx} u. v decays to the
  // right and u to the left; they are matched where their sizes cross.
  auto log_v = [&](std::size_t j) { return left.log_scale[j] + 0.5 * std::log(norm2(left.dir[j])); };
  auto log_u = [&](std::size_t j) { return right.log_scale[j] + 0.5 * std::log(norm2(right.dir[j])); };
  std::size_t jm = n / 2;
  {
    double best = INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      const double gap = std::abs(log_v(j) - log_u(j));
      if (gap < best) {
        best = gap;
        jm = j;
      }
    }
  }

  std::vector<double> log_abs(n);
  BoundState bs;
  bs.z = z;
  bs.match_index = jm;
  bs.dir.resize(n);
  const double kr = z.real(), ki = z.imag();
  for (std::size_t j = 0; j <= jm; ++j) {
    const double x = g.x(j);
    const cplx ph = std::exp(cplx(0.0, -kr * x));
    const auto& v = left.dir[j];
    const double nv = std::sqrt(norm2(v));
    bs.dir[j] = {ph * v[0] / nv, ph * v[1] / nv};
    log_abs[j] = ki * x + left.log_scale[j] + std::log(nv);
  }
  // Right piece, rescaled to agree with the left piece at jm.
  const auto& dl = bs.dir[jm];
  const double xm = g.x(jm);
  const cplx phm = std::exp(cplx(0.0, kr * xm));
  const std::array<cplx, 2> ur{phm * right.dir[jm][0], phm * right.dir[jm][1]};
  const double nur = std::sqrt(norm2(ur));
  const std::array<cplx, 2> dr{ur[0] / nur, ur[1] / nur};
  const cplx overlap = std::conj(dr[0]) * dl[0] + std::conj(dr[1]) * dl[1];
  const cplx c_phase = overlap / std::abs(overlap);
  const double c_log = log_abs[jm] - (-ki * xm + right.log_scale[jm] + std::log(nur));
  bs.match_residual = cross_sine(dl, dr);
  for (std::size_t j = jm + 1; j < n; ++j) {
    const double x = g.x(j);
    const cplx ph = std::exp(cplx(0.0, kr * x));
    const auto& u = right.dir[j];
    const double nu = std::sqrt(norm2(u));
    bs.dir[j] = {c_phase * ph * u[0] / nu, c_phase * ph * u[1] / nu};
    log_abs[j] = -ki * x + right.log_scale[j] + std::log(nu) + c_log;
  }

  // Normalize ||psi||_{L^2} = 1 in log form.
  const double top = *std::max_element(log_abs.begin(), log_abs.end());
  double s = 0.0;
  for (double la : log_abs) s += std::exp(2.0 * (la - top));
  const double shift = top + 0.5 * std::log(s * g.dx());
  bs.psi.resize(n);
  bs.min_abs_psi = INFINITY;
  for (std::size_t j = 0; j < n; ++j) {
    const double m = std::exp(log_abs[j] - shift);
    bs.psi[j] = {m * bs.dir[j][0], m * bs.dir[j][1]};
    bs.min_abs_psi = std::min(bs.min_abs_psi, m);
  }
  bs.end_abs_psi = std::max(std::exp(log_abs.front() - shift), std::exp(log_abs.back() - shift));
  if (!(bs.match_residual <= match_tol))
    throw Error(Errc::match_failure, "left and right shots disagree at the match point");
  return bs;
}

BoundState bound_state(const Transmission& a, cplx z_guess, const BoundStateOptions& opts) {
  const Zero zr = refine_zero(a, z_guess, opts.newton_tol);
  if (!(zr.abs_a <= opts.abs_a_floor))
    throw Error(Errc::not_a_zero, "|a| floor not reached at the refined point");
  if (std::arg(zr.z) < opts.min_arg || std::arg(zr.z) > pi - opts.min_arg)
    throw Error(Errc::precondition, "zero too close to the real axis for the bound-state solver");
  BoundState bs = shoot(a.potential(), zr.z, opts.match_tol);
  bs.abs_a = zr.abs_a;
  bs.newton_step = zr.newton_residual;
  if (opts.det_cross_check) {
    bs.abs_a_det = std::abs(det_a(a.potential(), zr.z).det);
    if (!(bs.abs_a_det <= opts.det_tol))
      throw Error(Errc::not_a_zero, "perturbation determinant does not vanish at the refined zero");
  }
  return bs;
}

BoundState bound_state(const Potential& q, cplx z_guess, const BoundStateOptions& opts) {
  const Transmission a(q);
  return bound_state(a, z_guess, opts);
}

BacklundFactors backlund_factors(cplx z, const std::vector<std::array<cplx, 2>>& psi) {
  const cplx mu = std::sqrt(z);
  const cplx mub = std::conj(mu);
  const double imz = z.imag();
  BacklundFactors f;
  const std::size_t n = psi.size();
  f.d.resize(n);
  f.G.resize(n);
  f.S.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = std::sqrt(norm2(psi[j]));
    const cplx p1 = psi[j][0] / s, p2 = psi[j][1] / s;
    const cplx d = mu * std::norm(p1) + mub * std::norm(p2);
    f.d[j] = d * (s * s);
    f.G[j] = std::conj(d) / d;
    f.S[j] = 4.0 * imz * p1 * std::conj(p2) / d;
  }
  return f;
}

Potential backlund_transform(const Potential& q, cplx, const BacklundFactors& f) {
  Potential B = q;
  for (std::size_t j = 0; j < q.samples.size(); ++j)
    B.samples[j] = f.G[j] * f.G[j] * q.samples[j] + f.G[j] * f.S[j];
  B.decay = DecayTag::schwartz;
  B.tail_scale = 1.0;
  return B;
}

Potential backlund_transform(const Potential& q, const BoundState& bs) {
  if (bs.dir.size() != q.grid.n) throw Error(Errc::precondition, "bound state is not on the grid of q");
  return backlund_transform(q, bs.z, backlund_factors(bs.z, bs.dir));
}

cplx blaschke_removal(cplx z, cplx k) { return (z / std::conj(z)) * (k - std::conj(z)) / (k - z); }

std::vector<cplx> rem_zeros_points(cplx z) {
  const double s = std::max(std::abs(z), 0.25);
  const cplx base[8] = {{0.0, 0.5}, {0.0, 2.0}, {0.0, 4.0}, {1.0, 1.0},
                        {-1.0, 1.0}, {2.0, 0.5}, {-2.0, 0.5}, {0.3, 0.3}};
  std::vector<cplx> out;
  for (cplx b : base) {
    cplx k = s * b;
    while (std::abs(k - z) < 0.2 * std::abs(z)) k *= 1.5;
    out.push_back(k);
  }
  return out;
}

BacklundChecks backlund_checks(const Potential& q, const BoundState& bs, const Potential& B,
                               const BacklundTolerances& tol) {
  const GridSpec& g = q.grid;
  const std::size_t n = g.n;
  const cplx z = bs.z;
  const cplx mu = std::sqrt(z);
  BacklundChecks c;
  c.z = z;
  c.mass_before = q.mass();
  c.mass_after = B.mass();
  c.mass_residual = std::abs(c.mass_after - c.mass_before + 4.0 * std::arg(z));
  c.mass_tol = tol.mass_rel * c.mass_before;

  // RemZeros at the test points.
  c.k = rem_zeros_points(z);
  const Transmission aq(q), aB(B);
  c.a_q.resize(c.k.size());
  c.a_B.resize(c.k.size());
  parallel_for(2 * c.k.size(), [&](std::size_t i) {
    const std::size_t m = i / 2;
    if (i % 2 == 0) c.a_q[m] = aq(c.k[m]);
    else c.a_B[m] = aB(c.k[m]);
  });
  for (std::size_t m = 0; m < c.k.size(); ++m) {
    const double r = std::abs(c.a_B[m] - blaschke_removal(z, c.k[m]) * c.a_q[m]) / (1.0 + std::abs(c.a_B[m]));
    c.rem_zeros_residual = std::max(c.rem_zeros_residual, r);
  }

  const BacklundFactors f = backlund_factors(z, bs.dir);
  const auto dG = derivative_nonperiodic(g, f.G);
  const auto dS = spectral_derivative(g, f.S);
  std::vector<cplx> rG(n), rS(n);
  double local = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const cplx qj = q.samples[j], Bj = B.samples[j];
    rG[j] = dG[j] - (std::conj(f.S[j]) * Bj + f.S[j] * std::conj(qj)) / (2.0 * I);
    rS[j] = dS[j] - (2.0 * std::abs(z) / I) * (Bj - qj);
    local += std::abs(std::norm(qj) - std::norm(Bj) + 2.0 * I * std::conj(f.G[j]) * dG[j]);

    const auto& v = bs.dir[j];
    const cplx p1 = v[0], p2 = v[1];
    const cplx d = mu * std::norm(p1) + std::conj(mu) * std::norm(p2);  // unit-scale d
    const cplx G2 = f.G[j] * f.G[j] - 1.0 + (2.0 * I * z.imag() / (d * d)) *
                                               (std::norm(p1) * std::norm(p1) - std::norm(p2) * std::norm(p2));
    c.identity_G2 = std::max(c.identity_G2, std::abs(G2));
    const double GS = std::norm(mu) * 2.0 * f.G[j].real() - 0.25 * std::norm(f.S[j]) - 2.0 * (mu * mu).real();
    c.identity_GS = std::max(c.identity_GS, std::abs(GS));
    c.unimodular = std::max(c.unimodular, std::abs(std::abs(f.G[j]) - 1.0));
    c.S_excess = std::max(c.S_excess, std::abs(f.S[j]) - 4.0 * std::abs(mu.imag()));
    c.d_lower_violation = std::max(c.d_lower_violation, std::abs(mu.real()) - std::abs(d));
  }
  c.dG_residual = std::sqrt(l2_norm_sq(g, rG));
  c.dS_residual = std::sqrt(l2_norm_sq(g, rS));
  c.local_mass = local * g.dx();
  c.G_left = std::abs(f.G.front() - std::conj(mu) / mu);
  c.G_right = std::abs(f.G.back() - mu / std::conj(mu));

  // The same transform from (2 + i) psi, using the stored L^2-normalized samples.
  std::vector<std::array<cplx, 2>> scaled(n);
  for (std::size_t j = 0; j < n; ++j) scaled[j] = {cplx(2, 1) * bs.psi[j][0], cplx(2, 1) * bs.psi[j][1]};
  const Potential B1 = backlund_transform(q, z, backlund_factors(z, bs.psi));
  const Potential B2 = backlund_transform(q, z, backlund_factors(z, scaled));
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(std::abs(B1.samples[j])) || !std::isfinite(std::abs(B2.samples[j]))) continue;
    c.normalization = std::max(c.normalization, std::abs(B1.samples[j] - B2.samples[j]));
  }

  c.passed = c.mass_residual <= c.mass_tol && c.rem_zeros_residual <= tol.rem_zeros && c.dG_residual <= tol.dGS &&
             c.dS_residual <= tol.dGS && c.identity_G2 <= tol.identities && c.identity_GS <= tol.identities &&
             c.local_mass <= tol.local_mass && c.unimodular <= tol.identities && c.S_excess <= tol.identities &&
             c.d_lower_violation <= tol.identities && c.G_left <= tol.asymptotics &&
             c.G_right <= tol.asymptotics && c.normalization <= tol.normalization;
  return c;
}

SurgeryReport tail_surgery_check(const Potential& q, const Potential& B, cplx z, double N, double constant) {
  SurgeryReport r;
  r.N = N;
  r.z_abs = std::abs(z);
  r.constant = constant;
  r.q_norm = std::sqrt(q.mass());
  const double hiB = std::sqrt(band_norm_sq(B, Band::above(N)));
  const double hiq = std::sqrt(band_norm_sq(q, Band::above(N)));
  const double loB = std::sqrt(band_norm_sq(B, Band::above(N / 8.0)));
  const double loq = std::sqrt(band_norm_sq(q, Band::above(N / 8.0)));
  r.lhs1 = hiB - loq;
  r.lhs2 = hiq - loB;
  const double t = std::sqrt(r.z_abs / N);
  r.bound = constant * t * r.q_norm * (t + r.q_norm);
  // Below |z| the estimate carries no information; above, it is still empty
  // once the bound passes the norms the left sides are made of.
  r.vacuous = N <= r.z_abs || r.bound >= r.q_norm + std::sqrt(B.mass());
  r.holds = r.lhs1 <= r.bound && r.lhs2 <= r.bound;
  return r;
}

double surgery_ratio(const Potential& q, const Potential& B, cplx z, double N) {
  const SurgeryReport r = tail_surgery_check(q, B, z, N, 1.0);
  return std::max({0.0, r.lhs1, r.lhs2}) / r.bound;
}

std::vector<ChainStep> reduce_to_order_zero(const Potential& q, const ReductionOptions& opts) {
  std::vector<ChainStep> chain;
  const int guard = int(std::floor(mass_report(q).total / pi)) + 1;
  Potential cur = q;
  auto a = std::make_unique<Transmission>(cur);
  OrderReport ord = order(*a);
  while (ord.order > 0) {
    if (int(chain.size()) >= guard) throw Error(Errc::chain_broken, "chain length exceeds floor(M/pi) + 1");
    const ZeroSet zs = locate_zeros(*a, ord.region, opts.locate_tol);
    if (zs.zeros.empty()) throw Error(Errc::chain_broken, "order is positive but no zero was located");
    const Zero& pick = *std::max_element(zs.zeros.begin(), zs.zeros.end(),
                                         [](const Zero& x, const Zero& y) { return std::arg(x.z) < std::arg(y.z); });
    ChainStep step;
    step.bound = bound_state(*a, pick.z, opts.bound);
    step.z = step.bound.z;
    step.arg_z = std::arg(step.z);
    step.order_before = ord.order;
    step.mass_before = cur.mass();
    step.match_residual = step.bound.match_residual;
    step.potential = backlund_transform(cur, step.bound);
    step.mass_after = step.potential.mass();

    auto next = std::make_unique<Transmission>(step.potential);
    for (cplx k : rem_zeros_points(step.z)) {
      const cplx aB = (*next)(k);
      step.rem_zeros_residual = std::max(
          step.rem_zeros_residual, std::abs(aB - blaschke_removal(step.z, k) * (*a)(k)) / (1.0 + std::abs(aB)));
    }
    const OrderReport next_ord = order(*next);
    step.order_after = next_ord.order;
    chain.push_back(step);
    if (step.order_after != ord.order - 1)
      throw Error(Errc::chain_broken, "order-mismatch: the transform did not remove exactly one zero");
    if (!(step.rem_zeros_residual <= opts.rem_zeros_tol))
      throw Error(Errc::chain_broken, "RemZeros identity fails after the transform");
    cur = step.potential;
    a = std::move(next);
    ord = next_ord;
  }
  return chain;
}

}  // namespace kn

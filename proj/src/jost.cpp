#include "knscatter/jost.hpp"

#include <algorithm>
#include <cmath>

namespace kn {

SpectralPoint SpectralPoint::from_k(cplx k) {
  cplx lam = std::sqrt(k);
  if (lam.real() < 0.0) lam = -lam;
  if (lam.real() == 0.0 && lam.imag() < 0.0) lam = -lam;
  return {k, lam};
}

SpectralPoint SpectralPoint::from_lambda(cplx lambda) { return {lambda * lambda, lambda}; }

const char* method_name(JostMethod m) {
  switch (m) {
    case JostMethod::gauged: return "gauged";
    case JostMethod::direct: return "direct";
    case JostMethod::wronskian: return "wronskian";
    case JostMethod::det: return "det";
  }
  return "gauged";
}

Mat2 operator*(const Mat2& x, const Mat2& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

Mat2 operator-(const Mat2& x, const Mat2& y) { return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d}; }

double max_abs(const Mat2& m) {
  return std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d)});
}

Mat2 expm(const Mat2& m) {
  const cplx t = 0.5 * (m.a + m.d);
  const cplx p = 0.5 * (m.a - m.d);
  const cplx s2 = p * p + m.b * m.c;
  const cplx s = std::sqrt(s2);
  cplx ch, sh;  // e^t cosh s, e^t sinh(s)/s
  if (std::abs(s) < 1e-2) {
    const cplx et = std::exp(t);
    ch = et * (1.0 + s2 * (0.5 + s2 * (1.0 / 24.0 + s2 * (1.0 / 720.0 + s2 / 40320.0))));
    sh = et * (1.0 + s2 * (1.0 / 6.0 + s2 * (1.0 / 120.0 + s2 * (1.0 / 5040.0 + s2 / 362880.0))));
  } else {
    const cplx ep = std::exp(t + s);
    const cplx em = std::exp(t - s);
    ch = 0.5 * (ep + em);
    sh = (ep - em) / (2.0 * s);
  }
  return {ch + sh * p, sh * m.b, sh * m.c, ch - sh * p};
}

namespace {

constexpr double kGauss1 = 0.5 - 0.28867513459481288225;  // 1/2 - sqrt(3)/6
constexpr double kGauss2 = 0.5 + 0.28867513459481288225;
constexpr double kMagnusC = 0.14433756729740644113;  // sqrt(3)/12

// Fourth-order Magnus propagator over a step H with A1, A2 at the Gauss nodes
// x + kGauss1*H and x + kGauss2*H.
inline Mat2 magnus_step(const Mat2& A1, const Mat2& A2, double H) {
  const Mat2 c = A2 * A1 - A1 * A2;
  const double h2 = kMagnusC * H * H;
  const double hh = 0.5 * H;
  return expm({hh * (A1.a + A2.a) + h2 * c.a, hh * (A1.b + A2.b) + h2 * c.b,
               hh * (A1.c + A2.c) + h2 * c.c, hh * (A1.d + A2.d) + h2 * c.d});
}

inline void propagate(const Mat2& E, std::array<cplx, 2>& y) {
  const cplx y0 = E.a * y[0] + E.b * y[1];
  const cplx y1 = E.c * y[0] + E.d * y[1];
  y = {y0, y1};
}

inline void renormalize(std::array<cplx, 2>& y, double& log_scale) {
  const double nrm = std::max(std::abs(y[0]), std::abs(y[1]));
  if (nrm > 1e100 || (nrm < 1e-100 && nrm > 0.0)) {
    y[0] /= nrm;
    y[1] /= nrm;
    log_scale += std::log(nrm);
  }
}

}  // namespace

JostSolver::JostSolver(const Potential& q, JostOptions opts)
    : q_(q),
      opts_(opts),
      qi_(q.grid, q.samples),
      qti_(q.grid, q.samples),
      rti_(q.grid, q.samples) {
  const GridSpec& g = q.grid;
  const auto dq = derivative(q);
  std::vector<cplx> rho(g.n);
  for (std::size_t j = 0; j < g.n; ++j) rho[j] = std::norm(q.samples[j]);
  const auto m = cumulative_integral(g, rho);
  std::vector<cplx> qt(g.n), rt(g.n);
  for (std::size_t j = 0; j < g.n; ++j) {
    const cplx qc = std::conj(q.samples[j]);
    const cplx r = 0.5 * I * std::conj(dq[j]) + 0.25 * rho[j].real() * qc;
    const cplx ph = std::exp(I * m[j].real());
    qt[j] = q.samples[j] * ph;
    rt[j] = r / ph;
    qmax_ = std::max(qmax_, std::abs(q.samples[j]));
    rmax_ = std::max(rmax_, std::abs(r));
  }
  qti_ = LocalInterpolator(g, std::move(qt));
  rti_ = LocalInterpolator(g, std::move(rt));

  // Outside [j0, j1] the coefficients vanish to roundoff and every route
  // evolves freely, so integration is restricted to that window.
  const double tq = 1e-17 * std::max(qmax_, 1e-300);
  const double tr = 1e-17 * std::max(rmax_, 1e-300);
  std::size_t first = g.n, last = 0;
  for (std::size_t j = 0; j < g.n; ++j) {
    if (std::abs(q.samples[j]) > tq || std::abs(rti_.values()[j]) > tr) {
      first = std::min(first, j);
      last = j;
    }
  }
  if (first == g.n) {
    j0_ = j1_ = 0;
  } else {
    constexpr std::size_t pad = 8;
    j0_ = first > pad ? first - pad : 0;
    j1_ = std::min(last + pad, g.n - 1);
  }
  gauge_mass_ = (m[j1_] - m[j0_]).real();
  if (q.decay == DecayTag::algebraic) gauge_mass_ += mass_report(q).tail;
}

int JostSolver::substeps(double rate, int refine) const {
  const double need = q_.grid.dx() * rate / opts_.step_scale;
  const int m = std::max(1, static_cast<int>(std::ceil(need)));
  return m * std::max(1, refine);
}

std::shared_ptr<const JostSolver::NodeWeights> JostSolver::weights(int m) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = weights_.find(m);
  if (it != weights_.end()) return it->second;
  auto nw = std::make_shared<NodeWeights>();
  nw->m = m;
  nw->w.resize(2 * static_cast<std::size_t>(m));
  for (int s = 0; s < m; ++s) {
    nw->w[2 * s] = LocalInterpolator::interior_weights((s + kGauss1) / m);
    nw->w[2 * s + 1] = LocalInterpolator::interior_weights((s + kGauss2) / m);
  }
  if (weights_.size() > 64) weights_.clear();
  weights_.emplace(m, nw);
  return nw;
}

cplx JostSolver::node_value(const LocalInterpolator& f, std::size_t cell, int node,
                            const NodeWeights& nw) const {
  constexpr int S = LocalInterpolator::kStencil;
  const std::size_t n = q_.grid.n;
  if (cell >= S / 2 - 1 && cell + S / 2 < n) {
    const auto& w = nw.w[node];
    const cplx* v = f.values().data() + (cell - (S / 2 - 1));
    cplx acc = 0.0;
    for (int i = 0; i < S; ++i) acc += w[i] * v[i];
    return acc;
  }
  const int s = node / 2;
  const double t = (s + (node % 2 == 0 ? kGauss1 : kGauss2)) / nw.m;
  return f.at(cell, t);
}

cplx JostSolver::transmission_value(cplx k, int refine) const {
  if (k.imag() < -1e-14 * std::max(1.0, std::abs(k)))
    throw Error(Errc::precondition, "transmission: Im k must be >= 0");
  const int m = substeps(std::max(2.0 * std::abs(k), qmax_ + rmax_), refine);
  const auto nw = weights(m);
  const double h = q_.grid.dx() / m;
  const cplx d = 2.0 * I * k;
  std::array<cplx, 2> y{1.0, 0.0};
  double log_scale = 0.0;
  for (std::size_t cell = j0_; cell < j1_; ++cell) {
    for (int s = 0; s < m; ++s) {
      const Mat2 A1{0.0, node_value(qti_, cell, 2 * s, *nw), node_value(rti_, cell, 2 * s, *nw), d};
      const Mat2 A2{0.0, node_value(qti_, cell, 2 * s + 1, *nw), node_value(rti_, cell, 2 * s + 1, *nw), d};
      propagate(magnus_step(A1, A2, h), y);
    }
    renormalize(y, log_scale);
  }
  return std::exp(-0.5 * I * gauge_mass_ + log_scale) * y[0];
}

JostData JostSolver::transmission(cplx k) const {
  JostData out;
  out.point = SpectralPoint::from_k(k);
  out.method = JostMethod::gauged;
  if (opts_.estimate_error) {
    const cplx a1 = transmission_value(k, 1);
    out.a = transmission_value(k, 2);
    out.err_est = std::abs(out.a - a1);
  } else {
    out.a = transmission_value(k, 1);
  }
  return out;
}

ColumnProfile JostSolver::left_column(const SpectralPoint& p, std::size_t j_stop, int refine) const {
  const std::size_t n = q_.grid.n;
  j_stop = std::min(j_stop, n - 1);
  const cplx lam = p.lambda;
  const int m = substeps(std::max(2.0 * std::abs(p.k), 2.0 * std::abs(lam) * qmax_), refine);
  const auto nw = weights(m);
  const double h = q_.grid.dx() / m;
  const cplx d = 2.0 * I * p.k;
  ColumnProfile prof;
  prof.j_first = 0;
  prof.dir.reserve(j_stop + 1);
  prof.log_scale.reserve(j_stop + 1);
  std::array<cplx, 2> y{1.0, 0.0};
  double log_scale = 0.0;
  for (std::size_t j = 0; j <= j_stop; ++j) {
    prof.dir.push_back(y);
    prof.log_scale.push_back(log_scale);
    if (j == j_stop) break;
    if (j < j0_ || j >= j1_) {
      // Free evolution: v_2' = 2ik v_2 with v_2 = 0 before the support.
      if (j >= j1_) y[1] *= std::exp(d * q_.grid.dx());
      continue;
    }
    for (int s = 0; s < m; ++s) {
      const cplx q1 = node_value(qi_, j, 2 * s, *nw);
      const cplx q2 = node_value(qi_, j, 2 * s + 1, *nw);
      const Mat2 A1{0.0, lam * q1, -lam * std::conj(q1), d};
      const Mat2 A2{0.0, lam * q2, -lam * std::conj(q2), d};
      propagate(magnus_step(A1, A2, h), y);
    }
    renormalize(y, log_scale);
  }
  return prof;
}

ColumnProfile JostSolver::right_column(const SpectralPoint& p, std::size_t j_stop, int refine) const {
  const std::size_t n = q_.grid.n;
  j_stop = std::min(j_stop, n - 1);
  const cplx lam = p.lambda;
  const int m = substeps(std::max(2.0 * std::abs(p.k), 2.0 * std::abs(lam) * qmax_), refine);
  const auto nw = weights(m);
  const double h = q_.grid.dx() / m;
  const cplx d = -2.0 * I * p.k;
  const std::size_t count = n - j_stop;
  ColumnProfile prof;
  prof.j_first = j_stop;
  prof.dir.resize(count);
  prof.log_scale.resize(count);
  std::array<cplx, 2> y{0.0, 1.0};
  double log_scale = 0.0;
  for (std::size_t j = n - 1;; --j) {
    prof.dir[j - j_stop] = y;
    prof.log_scale[j - j_stop] = log_scale;
    if (j == j_stop) break;
    const std::size_t cell = j - 1;  // from x_j down to x_{j-1}
    if (cell < j0_ || cell >= j1_) {
      if (cell < j0_) y[0] *= std::exp(-d * q_.grid.dx());
      continue;
    }
    for (int s = m - 1; s >= 0; --s) {
      // Backward step: the first Gauss node of the reversed step is the
      // second node of the forward substep.
      const cplx q1 = node_value(qi_, cell, 2 * s + 1, *nw);
      const cplx q2 = node_value(qi_, cell, 2 * s, *nw);
      const Mat2 A1{d, lam * q1, -lam * std::conj(q1), 0.0};
      const Mat2 A2{d, lam * q2, -lam * std::conj(q2), 0.0};
      propagate(magnus_step(A1, A2, -h), y);
    }
    renormalize(y, log_scale);
  }
  return prof;
}

JostData JostSolver::direct(const SpectralPoint& p) const {
  auto run = [&](int refine) {
    const auto col = left_column(p, j1_, refine);
    return std::exp(col.log_scale.back()) * col.dir.back()[0];
  };
  JostData out;
  out.point = p;
  out.method = JostMethod::direct;
  out.a = run(opts_.estimate_error ? 2 : 1);
  if (opts_.estimate_error) out.err_est = std::abs(out.a - run(1));
  return out;
}

JostData JostSolver::wronskian(const SpectralPoint& p, double x_match) const {
  const GridSpec& g = q_.grid;
  double u = std::round((x_match + g.L) / g.dx());
  u = std::clamp(u, 0.0, static_cast<double>(g.n - 1));
  const std::size_t jm = static_cast<std::size_t>(u);
  auto run = [&](int refine) {
    const auto l = left_column(p, jm, refine);
    const auto r = right_column(p, jm, refine);
    const auto& v = l.dir.back();
    const auto& w = r.dir.front();
    return std::exp(l.log_scale.back() + r.log_scale.front()) * (v[0] * w[1] - v[1] * w[0]);
  };
  JostData out;
  out.point = p;
  out.method = JostMethod::wronskian;
  out.a = run(opts_.estimate_error ? 2 : 1);
  if (opts_.estimate_error) out.err_est = std::abs(out.a - run(1));
  return out;
}

JostData JostSolver::jost_matrix(const SpectralPoint& p, bool keep_profile) const {
  if (std::abs(p.k.imag()) > 1e-12 * std::max(1.0, std::abs(p.k)))
    throw Error(Errc::precondition, "jost_matrix: k must be real");
  const GridSpec& g = q_.grid;
  const cplx lam = p.lambda;
  const double k = p.k.real();
  auto run = [&](int refine, JostProfile* prof) {
    const int m = substeps(std::max(2.0 * std::abs(k), 2.0 * std::abs(lam) * qmax_), refine);
    const auto nw = weights(m);
    const double h = g.dx() / m;
    const std::size_t a0 = prof ? 0 : j0_;
    const std::size_t a1 = prof ? g.n - 1 : j1_;
    const double x0 = g.x(a0);
    Mat2 Y{std::exp(-I * k * x0), 0.0, 0.0, std::exp(I * k * x0)};
    if (prof) {
      prof->x.reserve(g.n);
      prof->psi.reserve(g.n);
    }
    for (std::size_t j = a0;; ++j) {
      if (prof) {
        prof->x.push_back(g.x(j));
        prof->psi.push_back(Y);
      }
      if (j == a1) break;
      for (int s = 0; s < m; ++s) {
        const cplx q1 = node_value(qi_, j, 2 * s, *nw);
        const cplx q2 = node_value(qi_, j, 2 * s + 1, *nw);
        const Mat2 A1{-I * k, lam * q1, -lam * std::conj(q1), I * k};
        const Mat2 A2{-I * k, lam * q2, -lam * std::conj(q2), I * k};
        Y = magnus_step(A1, A2, h) * Y;
      }
    }
    const double xe = g.x(a1);
    return Mat2{std::exp(I * k * xe), 0.0, 0.0, std::exp(-I * k * xe)} * Y;
  };
  JostData out;
  out.point = p;
  out.method = JostMethod::direct;
  JostProfile prof;
  const int fine = opts_.estimate_error ? 2 : 1;
  const Mat2 S = run(fine, keep_profile ? &prof : nullptr);
  if (opts_.estimate_error) out.err_est = max_abs(S - run(1, nullptr));
  out.S = S;
  out.a = S.a;
  out.b = S.c;
  if (keep_profile) out.psi_minus = std::move(prof);
  return out;
}

JostData transmission_a_ode(const Potential& q, cplx k, const JostOptions& opts) {
  if (q.decay == DecayTag::algebraic && q.grid.L * q.tail_scale < 400.0)
    throw Error(Errc::precondition, "algebraic data needs L >= 400");
  return JostSolver(q, opts).transmission(k);
}

JostData wronskian_a(const Potential& q, const SpectralPoint& p, double x_match, const JostOptions& opts) {
  return JostSolver(q, opts).wronskian(p, x_match);
}

JostData jost_matrix(const Potential& q, const SpectralPoint& p, bool keep_profile, const JostOptions& opts) {
  return JostSolver(q, opts).jost_matrix(p, keep_profile);
}

Mat2 algebraic_soliton_jost(double x, cplx lam) {
  const cplx k = lam * lam;
  const cplx c = 4.0 * lam / (4.0 * k + 1.0);
  const cplx xm = cplx{x, -1.0};
  const cplx xp = cplx{x, 1.0};
  const cplx e1 = std::exp(-I * k * x);
  const cplx e2 = std::exp(I * k * x);
  const cplx h = std::exp(0.5 * I * x);
  const Mat2 P{2.0 * I * lam / xm, h / xm, -1.0 / (h * xp), -2.0 * I * lam / xp};
  return {e1 + c * P.a * e1, c * P.b * e2, c * P.c * e1, e2 + c * P.d * e2};
}

double IdentityReport::worst_symmetry() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max({w, e.sym_sigma3, e.sym_conj});
  return w;
}
double IdentityReport::worst_det() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max(w, e.det_dev);
  return w;
}
double IdentityReport::worst_unitarity() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max(w, e.unitarity);
  return w;
}
double IdentityReport::worst_real_line() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max(w, e.real_line);
  return w;
}

IdentityReport scattering_identities_report(const Potential& q, const std::vector<cplx>& lambdas,
                                            const JostOptions& opts) {
  JostOptions o = opts;
  o.estimate_error = false;
  JostSolver solver(q, o);
  IdentityReport rep;
  const Mat2 s3{1.0, 0.0, 0.0, -1.0};
  const Mat2 J{0.0, -1.0, 1.0, 0.0};   // sigma1 sigma3
  const Mat2 Ji{0.0, 1.0, -1.0, 0.0};  // sigma3 sigma1
  for (const cplx lam : lambdas) {
    const bool real_l = std::abs(lam.imag()) <= 1e-14 * std::abs(lam);
    const bool imag_l = std::abs(lam.real()) <= 1e-14 * std::abs(lam);
    if (!real_l && !imag_l)
      throw Error(Errc::precondition, "identities: lambda must be real or purely imaginary");
    const auto P = solver.jost_matrix(SpectralPoint::from_lambda(lam), true);
    const auto Pm = solver.jost_matrix(SpectralPoint::from_lambda(-lam), true);
    const auto Pc = solver.jost_matrix(SpectralPoint::from_lambda(std::conj(lam)), true);
    IdentityEntry e;
    e.lambda = lam;
    const auto& psi = P.psi_minus->psi;
    for (std::size_t j = 0; j < psi.size(); ++j) {
      const Mat2& A = psi[j];
      const Mat2& B = Pm.psi_minus->psi[j];
      Mat2 C = Pc.psi_minus->psi[j];
      C = {std::conj(C.a), std::conj(C.b), std::conj(C.c), std::conj(C.d)};
      const double scale = std::max(1.0, max_abs(A));
      e.sym_sigma3 = std::max(e.sym_sigma3, max_abs(A - s3 * B * s3) / scale);
      e.sym_conj = std::max(e.sym_conj, max_abs(A - J * C * Ji) / scale);
      e.det_dev = std::max(e.det_dev, std::abs(A.det() - 1.0));
    }
    e.a = P.a;
    e.b = *P.b;
    const double aa = std::norm(e.a);
    const double bb = std::norm(e.b);
    if (real_l) {
      e.unitarity = std::abs(aa + bb - 1.0);
      e.real_line = std::max(0.0, std::sqrt(aa) - 1.0);
    } else {
      e.unitarity = std::abs(aa - bb - 1.0);
      e.real_line = std::max(0.0, 1.0 - std::sqrt(aa));
    }
    rep.entries.push_back(e);
  }
  for (const double k : {1e-4, -1e-4}) rep.near_zero = std::max(rep.near_zero, std::abs(solver.transmission_value(k) - 1.0));
  return rep;
}

}  // namespace kn

#include "knscatter/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "knscatter/parallel.hpp"

namespace kn {

namespace {

constexpr double kNearRealArg = 1e-3;  // sectors reaching arg = pi stop this far short of it

double arg_step(cplx from, cplx to) { return std::arg(to / from); }

// Gauss-Legendre nodes/weights on [-1, 1].
const double kGL2x[2] = {-0.57735026918962576, 0.57735026918962576};
const double kGL8x[8] = {-0.96028985649753623, -0.79666647741362674, -0.52553240991632899,
                         -0.18343464249564980, 0.18343464249564980, 0.52553240991632899,
                         0.79666647741362674, 0.96028985649753623};
const double kGL8w[8] = {0.10122853629037626, 0.22238103445337447, 0.31370664587788729,
                         0.36268378337836198, 0.36268378337836198, 0.31370664587788729,
                         0.22238103445337447, 0.10122853629037626};

struct Edge {
  std::function<cplx(double)> k;    // t in [0, 1]
  std::function<cplx(double)> dk;   // dk/dt
};

std::vector<Edge> boundary(const Region& r) {
  std::vector<Edge> e;
  if (r.kind == Region::Kind::sector) {
    const double lr = std::log(r.r_max / r.r_min);
    const double dth = r.theta_max - r.theta_min;
    const double t0 = r.theta_min, t1 = r.theta_max, r0 = r.r_min, r1 = r.r_max;
    e.push_back({[=](double t) { return std::polar(r0 * std::exp(lr * t), t0); },
                 [=](double t) { return lr * std::polar(r0 * std::exp(lr * t), t0); }});
    e.push_back({[=](double t) { return std::polar(r1, t0 + dth * t); },
                 [=](double t) { return I * dth * std::polar(r1, t0 + dth * t); }});
    e.push_back({[=](double t) { return std::polar(r1 * std::exp(-lr * t), t1); },
                 [=](double t) { return -lr * std::polar(r1 * std::exp(-lr * t), t1); }});
    e.push_back({[=](double t) { return std::polar(r0, t1 - dth * t); },
                 [=](double t) { return -I * dth * std::polar(r0, t1 - dth * t); }});
  } else {
    const cplx c[4] = {r.lo, cplx(r.hi.real(), r.lo.imag()), r.hi, cplx(r.lo.real(), r.hi.imag())};
    for (int i = 0; i < 4; ++i) {
      const cplx a = c[i], b = c[(i + 1) % 4];
      e.push_back({[=](double t) { return a + (b - a) * t; }, [=](double) { return b - a; }});
    }
  }
  return e;
}

struct Segment {
  double t0, t1;
  cplx a0, a1;
  double darg;
};

// Adaptive sampling of a along a path until every segment changes arg a by
// at most max_arg_step, with a midpoint test against hidden wraps.
std::vector<Segment> track(const Transmission& a, const Edge& e, int n0, const ContourOptions& o,
                           double& min_abs) {
  std::vector<double> ts(std::size_t(n0) + 1);
  for (int i = 0; i <= n0; ++i) ts[std::size_t(i)] = double(i) / n0;
  std::vector<cplx> vals(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) { vals[i] = a(e.k(ts[i])); });
  for (const auto& v : vals) min_abs = std::min(min_abs, std::abs(v));

  std::vector<Segment> out;
  const double min_dt = std::ldexp(1.0, -int(o.max_depth)) / n0;
  std::function<void(double, double, cplx, cplx)> refine = [&](double t0, double t1, cplx a0, cplx a1) {
    const double tm = 0.5 * (t0 + t1);
    const cplx am = a(e.k(tm));
    min_abs = std::min(min_abs, std::abs(am));
    if (min_abs < o.zero_floor)
      throw Error(Errc::zero_on_contour, "zero on contour suspected near k = (" +
                                             std::to_string(e.k(tm).real()) + ", " +
                                             std::to_string(e.k(tm).imag()) + ")");
    const double d = arg_step(a0, a1);
    const double d0 = arg_step(a0, am), d1 = arg_step(am, a1);
    const bool ok = std::abs(d0) <= o.max_arg_step && std::abs(d1) <= o.max_arg_step &&
                    std::abs(d0 + d1 - d) < 1e-9 &&
                    std::abs(std::log(std::abs(a1) / std::abs(a0))) < 1.0;
    if (ok) {
      out.push_back({t0, tm, a0, am, d0});
      out.push_back({tm, t1, am, a1, d1});
      return;
    }
    if (t1 - t0 < min_dt)
      throw Error(Errc::count_not_integral, "contour refinement limit reached");
    refine(t0, tm, a0, am);
    refine(tm, t1, am, a1);
  };
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) refine(ts[i], ts[i + 1], vals[i], vals[i + 1]);
  return out;
}

double spectral_mass(const Potential& q) {
  const auto s = fourier(q);
  double m = 0.0;
  for (const auto& v : s) m += std::norm(v);
  return m * q.grid.dxi();
}

// First-order trace int i k/(2k + xi) |qhat|^2 dxi, the leading term of -log a.
cplx leading_trace(const Potential& q, cplx k) {
  const auto s = fourier(q);
  cplx t = 0.0;
  for (std::size_t m = 0; m < s.size(); ++m) t += I * k / (2.0 * k + q.grid.xi(m)) * std::norm(s[m]);
  return t * q.grid.dxi();
}

}  // namespace

// ---- Transmission -----------------------------------------------------------

Transmission::Transmission(const Potential& q, Route route, JostOptions jo, FredholmOptions fo)
    : q_(q), route_(route), fo_(fo) {
  jo.estimate_error = false;
  fo_.with_hs = false;
  solver_ = std::make_shared<JostSolver>(q_, jo);
  mass_ = mass_report(q_).total;
  sup_ = q_.sup_norm();
}

cplx Transmission::operator()(cplx k) const {
  if (k.imag() < 0.0) throw Error(Errc::precondition, "a(k) requested below the real axis");
  const auto key = std::make_pair(k.real(), k.imag());
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  cplx v;
  const double th = std::arg(k);
  const bool near_real = k.imag() <= 0.0 || th < pi * near_real_fraction ||
                         th > pi * (1.0 - near_real_fraction);
  if (route_ == Route::det && !near_real)
    v = det_a(q_, k, fo_).det;
  else
    v = solver_->transmission_value(k, 1);
  std::lock_guard<std::mutex> lock(mu_);
  cache_.emplace(key, v);
  return v;
}

double cauchy_radius(cplx k) { return std::max(1e-14, std::min(0.3 * k.imag(), 0.05 * std::abs(k))); }

cplx Transmission::derivative(cplx k, double radius) const {
  const double r = radius > 0.0 ? std::min(radius, cauchy_radius(k)) : cauchy_radius(k);
  constexpr int M = 8;
  cplx s = 0.0;
  for (int j = 0; j < M; ++j) {
    const cplx w = std::polar(1.0, 2.0 * pi * j / M);
    s += (*this)(k + r * w) / w;
  }
  return s / (double(M) * r);
}

std::size_t Transmission::evaluations() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.size();
}

// ---- regions ----------------------------------------------------------------

Region Region::sector(double theta_min, double theta_max, double r_min, double r_max) {
  if (!(0.0 <= theta_min && theta_min < theta_max && theta_max <= pi) ||
      !(0.0 < r_min && r_min < r_max))
    throw Error(Errc::precondition, "sector: need 0 <= theta_min < theta_max <= pi, 0 < r_min < r_max");
  Region r;
  r.kind = Kind::sector;
  r.theta_min = theta_min;
  r.theta_max = std::min(theta_max, pi - kNearRealArg);
  r.theta_min = std::max(theta_min, kNearRealArg);
  r.r_min = r_min;
  r.r_max = r_max;
  return r;
}

Region Region::rectangle(cplx lo, cplx hi) {
  if (!(lo.real() < hi.real() && 0.0 <= lo.imag() && lo.imag() < hi.imag()))
    throw Error(Errc::precondition, "rectangle: corners must be ordered and in the upper half-plane");
  Region r;
  r.kind = Kind::rectangle;
  r.lo = lo;
  r.hi = hi;
  return r;
}

bool Region::contains(cplx k) const {
  if (kind == Kind::rectangle)
    return k.real() > lo.real() && k.real() < hi.real() && k.imag() > lo.imag() && k.imag() < hi.imag();
  const double r = std::abs(k), t = std::arg(k);
  return r > r_min && r < r_max && t > theta_min && t < theta_max;
}

cplx Region::center() const {
  if (kind == Kind::rectangle) return 0.5 * (lo + hi);
  return std::polar(std::sqrt(r_min * r_max), 0.5 * (theta_min + theta_max));
}

double Region::diameter() const {
  if (kind == Kind::rectangle) return std::abs(hi - lo);
  return std::hypot(r_max - r_min, r_max * (theta_max - theta_min));
}

std::vector<Region> Region::split() const {
  std::vector<Region> c;
  if (kind == Kind::rectangle) {
    const cplx m = center();
    c.push_back(rectangle(lo, m));
    c.push_back(rectangle(cplx(m.real(), lo.imag()), cplx(hi.real(), m.imag())));
    c.push_back(rectangle(m, hi));
    c.push_back(rectangle(cplx(lo.real(), m.imag()), cplx(m.real(), hi.imag())));
    return c;
  }
  const double rm = std::sqrt(r_min * r_max), tm = 0.5 * (theta_min + theta_max);
  if (r_max > 4.0 * r_min) {
    // Elongated cells split radially only.
    Region inner = *this, outer = *this;
    inner.r_max = rm;
    outer.r_min = rm;
    return {inner, outer};
  }
  for (auto [t0, t1] : {std::pair{theta_min, tm}, std::pair{tm, theta_max}})
    for (auto [r0, r1] : {std::pair{r_min, rm}, std::pair{rm, r_max}}) {
      Region s = *this;
      s.theta_min = t0;
      s.theta_max = t1;
      s.r_min = r0;
      s.r_max = r1;
      c.push_back(s);
    }
  return c;
}

// ---- counting and locating ---------------------------------------------------

ContourCount count_zeros(const Transmission& a, const Region& region, const ContourOptions& o) {
  ContourCount out;
  out.min_abs_a = INFINITY;
  double winding = 0.0;
  cplx quad = 0.0;
  for (const Edge& e : boundary(region)) {
    const auto segs = track(a, e, o.min_segments_per_edge, o, out.min_abs_a);
    out.segments += segs.size();
    std::vector<cplx> contrib(segs.size());
    parallel_for(segs.size(), [&](std::size_t i) {
      const Segment& s = segs[i];
      const double h = 0.5 * (s.t1 - s.t0), c = 0.5 * (s.t0 + s.t1);
      const double seg_len = std::abs(e.k(s.t1) - e.k(s.t0));
      cplx acc = 0.0;
      for (double x : kGL2x) {
        const cplx k = e.k(c + h * x);
        const double r = std::min(cauchy_radius(k), 0.5 * seg_len);
        acc += a.derivative(k, r) / a(k) * e.dk(c + h * x);
      }
      contrib[i] = acc * h;
    });
    for (std::size_t i = 0; i < segs.size(); ++i) {
      winding += segs[i].darg;
      quad += contrib[i];
    }
  }
  out.arg_winding = winding / (2.0 * pi);
  out.unrounded = (quad / (2.0 * pi * I)).real();
  out.count = int(std::lround(out.unrounded));
  if (std::abs(out.unrounded - out.count) > o.integrality_tol ||
      int(std::lround(out.arg_winding)) != out.count)
    throw Error(Errc::count_not_integral,
                "argument-principle count not integral: " + std::to_string(out.unrounded) +
                    " (argument tracking " + std::to_string(out.arg_winding) + ")");
  return out;
}

Zero refine_zero(const Transmission& a, cplx guess, double step_tol, int max_iter, double trust) {
  cplx z = guess;
  double last = INFINITY;
  const double scale = std::max(1.0, std::abs(guess));
  for (int it = 0; it < max_iter; ++it) {
    const cplx v = a(z);
    const cplx d = a.derivative(z);
    if (d == 0.0) break;
    cplx step = v / d;
    // Damp steps that would leave the upper half-plane.
    while (z.imag() - step.imag() <= 0.0 && std::abs(step) > 1e-300) step *= 0.5;
    z -= step;
    const double s = std::abs(step);
    if (!std::isfinite(s) || std::abs(z - guess) > trust) break;
    if (s < step_tol * scale || (s < 1e-9 * scale && s >= 0.5 * last)) {
      Zero out;
      out.z = z;
      out.newton_residual = s;
      out.abs_a = std::abs(a(z));
      return out;
    }
    last = s;
  }
  throw Error(Errc::not_a_zero, "Newton iteration on a did not converge from the given guess");
}

namespace {

void locate_in(const Transmission& a, const Region& cell, int count, double tol,
               const ContourOptions& o, std::vector<Zero>& out) {
  if (count == 0) return;
  const bool compact = cell.kind == Region::Kind::rectangle || cell.r_max <= 4.0 * cell.r_min;
  if ((count == 1 && compact) || cell.diameter() < tol) {
    try {
      Zero z = refine_zero(a, cell.center(), 1e-12, 40, cell.diameter());
      if (cell.contains(z.z) || cell.diameter() < tol) {
        z.multiplicity = count;
        z.cluster_unresolved = count > 1;
        out.push_back(z);
        return;
      }
    } catch (const Error&) {
      if (cell.diameter() < tol) throw;
    }
  }
  const auto kids = cell.split();
  std::vector<int> counts;
  int total = 0;
  for (const auto& k : kids) {
    counts.push_back(count_zeros(a, k, o).count);
    total += counts.back();
  }
  if (total != count)
    throw Error(Errc::count_not_integral, "subcell counts do not add up to the parent count");
  for (std::size_t i = 0; i < kids.size(); ++i) locate_in(a, kids[i], counts[i], tol, o, out);
}

}  // namespace

ZeroSet locate_zeros(const Transmission& a, const Region& region, double tol, const ContourOptions& o) {
  ZeroSet zs;
  zs.region = region;
  zs.total_count = count_zeros(a, region, o).count;
  locate_in(a, region, zs.total_count, tol, o, zs.zeros);
  std::sort(zs.zeros.begin(), zs.zeros.end(),
            [](const Zero& x, const Zero& y) { return std::arg(x.z) > std::arg(y.z); });
  return zs;
}

double zero_radius_bound(double sup_norm, double theta) {
  const double s = std::sin(0.5 * theta);
  return std::pow(sup_norm / (2.0 * s), 2);
}

Region sigma_region(double r_min, double r_max) { return Region::sector(pi / 4, pi, r_min, r_max); }

RadialRange ray_range(const Potential& q) {
  return {1e-3 * spectral_floor(q), 1e3 * spectral_ceiling(q)};
}

// ---- mass identity ----------------------------------------------------------

MassIdentityReport mass_identity_check(const Transmission& a, double theta, const ContourOptions& o) {
  if (!(theta > 0.0 && theta <= pi)) throw Error(Errc::precondition, "mass identity: theta must lie in (0, pi]");
  const Potential& q = a.potential();
  MassIdentityReport rep;
  rep.theta = theta;
  rep.mass = a.mass();
  if (q.mass() == 0.0) return rep;
  const RadialRange rr = ray_range(q);
  rep.r_min = rr.r_min;
  rep.r_max = rr.r_max;

  const double lr = std::log(rr.r_max / rr.r_min);
  const cplx dir = std::polar(1.0, theta);
  Edge ray{[=](double t) { return rr.r_min * std::exp(lr * t) * dir; },
           [=](double t) { return lr * rr.r_min * std::exp(lr * t) * dir; }};
  double min_abs = INFINITY;
  ContourOptions ro = o;
  ro.zero_floor = 1e-6;
  const int n0 = int(std::ceil(8.0 * lr));
  const auto segs = track(a, ray, n0, ro, min_abs);
  rep.min_abs_a = min_abs;
  double d = 0.0;
  for (const auto& s : segs) {
    d += s.darg;
    rep.profile.emplace_back(std::abs(ray.k(s.t0)), s.a0);
  }
  rep.profile.emplace_back(std::abs(ray.k(1.0)), segs.back().a1);

  // Near 0, a -> 1 and the measured arg a(k_min) is the change from the
  // limit. Near infinity log a ~ -(leading trace), whose limit is -iM/2.
  const cplx a_min = a(ray.k(0.0));
  if (std::abs(a_min - 1.0) > 0.1)
    throw Error(Errc::unresolved_tails, "mass identity: a(k_min) is not close to its limit 1");
  const double low = std::arg(a_min);
  const double high = -0.5 * spectral_mass(q) + leading_trace(q, ray.k(1.0)).imag();
  rep.low_correction = -2.0 * low;
  rep.high_correction = -2.0 * high;
  rep.ray_integral = -2.0 * (low + d + high);
  if (std::abs(rep.low_correction) > 1e-2 * rep.mass || std::abs(rep.high_correction) > 1e-2 * rep.mass)
    throw Error(Errc::unresolved_tails, "mass identity: endpoint corrections exceed 1% of the mass");

  const double th_lo = theta;
  if (th_lo < pi - kNearRealArg) {
    const double rb = std::max(1.05 * zero_radius_bound(a.sup_norm(), th_lo), 2.0 * rr.r_min);
    rep.ell = count_zeros(a, Region::sector(th_lo, pi, rr.r_min, rb), o).count;
  }
  rep.zero_term = 4.0 * pi * rep.ell;
  rep.residual = std::abs(rep.mass - rep.zero_term - rep.ray_integral);
  return rep;
}

// ---- trace formula -----------------------------------------------------------

BoundaryMeasure boundary_measure(const Transmission& a, double s_max) {
  const Potential& q = a.potential();
  BoundaryMeasure mu;
  if (q.mass() == 0.0) return mu;
  if (s_max <= 0.0) s_max = 4.0 * spectral_ceiling(q);
  const double s_min = 1e-4 * spectral_floor(q);
  const double u0 = std::log(s_min), u1 = std::log(s_max);

  auto nodes = [&](double width, std::vector<double>& s, std::vector<double>& w) {
    const int panels = int(std::ceil((u1 - u0) / width));
    const double h = (u1 - u0) / panels;
    for (int sign : {1, -1})
      for (int p = 0; p < panels; ++p)
        for (int j = 0; j < 8; ++j) {
          const double u = u0 + h * (p + 0.5 + 0.5 * kGL8x[j]);
          s.push_back(sign * std::exp(u));
          w.push_back(0.5 * h * kGL8w[j]);
        }
  };
  auto integrate = [&](const std::vector<double>& s, const std::vector<double>& w,
                       std::vector<double>& la, std::vector<double>& arg, double& min_abs) {
    la.resize(s.size());
    arg.resize(s.size());
    parallel_for(s.size(), [&](std::size_t i) {
      const cplx v = a(cplx(s[i], 0.0));
      la[i] = std::log(std::abs(v));
      arg[i] = std::arg(v);
    });
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      acc += w[i] * (s[i] > 0 ? -la[i] : la[i]);
      min_abs = std::min(min_abs, std::exp(la[i]));
    }
    return acc;
  };
  mu.min_abs_a = INFINITY;
  nodes(0.25, mu.s, mu.w);
  mu.integral = integrate(mu.s, mu.w, mu.log_abs, mu.arg, mu.min_abs_a);
  std::vector<double> cs, cw, cl, ca;
  nodes(0.5, cs, cw);
  mu.coarse_integral = integrate(cs, cw, cl, ca, mu.min_abs_a);
  return mu;
}

TraceReport trace_formula_check(const Transmission& a, double arg_floor, double rel_tol) {
  const Potential& q = a.potential();
  TraceReport rep;
  rep.mass = a.mass();
  rep.arg_floor = arg_floor;
  if (q.mass() == 0.0) return rep;
  const RadialRange rr = ray_range(q);
  const double rb = std::max(1.05 * zero_radius_bound(a.sup_norm(), arg_floor), 2.0 * rr.r_min);
  try {
    rep.zeros = locate_zeros(a, Region::sector(arg_floor, pi, rr.r_min, rb));
  } catch (const Error&) {
    rep.count_failed = true;
  }
  for (const auto& z : rep.zeros.zeros) {
    rep.zero_sum += 4.0 * z.multiplicity * std::arg(z.z);
    // Only truncated slow tails make the box part of the problem.
    if (q.decay == DecayTag::algebraic && z.z.imag() * q.grid.L < 1.0) rep.near_real_zero = true;
  }

  rep.measure = boundary_measure(a);
  rep.winding_term = 2.0 / pi * rep.measure.integral;
  rep.residual = std::abs(rep.mass - rep.zero_sum - rep.winding_term);
  rep.quadrature_converged =
      std::abs(rep.measure.integral - rep.measure.coarse_integral) <= 1e-3 * std::max(rep.mass, 1e-300);
  const bool singular_point = rep.measure.min_abs_a < 1e-6;
  rep.sigma_flag = singular_point || rep.count_failed || rep.near_real_zero ||
                   (rep.quadrature_converged && rep.residual > rel_tol * rep.mass);
  return rep;
}

cplx blaschke_product(const std::vector<Zero>& zeros, cplx k) {
  cplx p = 1.0;
  for (const auto& z : zeros)
    for (int m = 0; m < z.multiplicity; ++m)
      p *= std::conj(z.z) / z.z * (k - z.z) / (k - std::conj(z.z));
  return p;
}

cplx outer_factor(const BoundaryMeasure& mu, cplx k) {
  cplx e = 0.0;
  for (std::size_t i = 0; i < mu.s.size(); ++i) {
    const double dmu = mu.w[i] * (mu.s[i] > 0 ? -mu.log_abs[i] : mu.log_abs[i]);
    e += k / (k - mu.s[i]) * dmu;
  }
  return std::exp(e / (I * pi));
}

ReconstructionReport blaschke_outer_reconstruct(const Potential& q, const TraceReport& trace,
                                                const std::vector<cplx>& k_eval) {
  if (trace.sigma_flag)
    throw Error(Errc::precondition, "reconstruction invalid: possible singular boundary measure");
  ReconstructionReport rep;
  rep.k = k_eval;
  rep.det.resize(k_eval.size());
  FredholmOptions fo;
  fo.with_hs = false;
  parallel_for(k_eval.size(), [&](std::size_t i) { rep.det[i] = det_a(q, k_eval[i], fo).det; });
  for (std::size_t i = 0; i < k_eval.size(); ++i) {
    const cplx outer = outer_factor(trace.measure, k_eval[i]);
    rep.outer_only.push_back(outer);
    rep.reconstructed.push_back(blaschke_product(trace.zeros.zeros, k_eval[i]) * outer);
    const double scale = 1.0 + std::abs(rep.det[i]);
    rep.max_error = std::max(rep.max_error, std::abs(rep.reconstructed[i] - rep.det[i]) / scale);
    rep.max_error_outer_only = std::max(rep.max_error_outer_only, std::abs(outer - rep.det[i]) / scale);
  }
  return rep;
}

// ---- lower bounds and order ---------------------------------------------------

std::pair<double, double> ray_minimum(const Transmission& a, int samples_per_decade) {
  const RadialRange rr = ray_range(a.potential());
  const int n = std::max(2, int(std::ceil(samples_per_decade * std::log10(rr.r_max / rr.r_min))));
  std::vector<double> kap(std::size_t(n) + 1), v(kap.size());
  for (int i = 0; i <= n; ++i) kap[std::size_t(i)] = rr.r_min * std::pow(rr.r_max / rr.r_min, double(i) / n);
  parallel_for(kap.size(), [&](std::size_t i) { v[i] = std::abs(a(cplx(0.0, kap[i]))); });
  const auto it = std::min_element(v.begin(), v.end());
  return {*it, kap[std::size_t(it - v.begin())]};
}

LowerBoundReport lower_bound_and_zero_free_checks(const Transmission& a, int ord, double eps, double N,
                                                  const std::vector<Zero>& zeros, double arg_constant) {
  LowerBoundReport rep;
  rep.order = ord;
  rep.eps = eps;
  rep.N = N;
  rep.arg_constant = arg_constant;
  const double M = a.mass();
  rep.bound = std::exp(-M / std::sqrt(2.0) - M / 2.0);
  if (a.potential().mass() == 0.0) {
    rep.min_abs_a = 1.0;
  } else {
    std::tie(rep.min_abs_a, rep.kappa_at_min) = ray_minimum(a);
  }
  rep.holds = ord != 0 || rep.min_abs_a >= rep.bound;
  for (const auto& z : zeros)
    if (std::abs(z.z) > N / (eps * eps) && std::arg(z.z) > arg_constant * eps) rep.violations.push_back(z);
  return rep;
}

OrderReport order(const Transmission& a, const ContourOptions& o) {
  OrderReport rep;
  const double M = a.mass();
  rep.mass_budget = int(std::floor(M / pi));
  if (a.potential().mass() == 0.0) return rep;
  const RadialRange rr = ray_range(a.potential());
  const double rb = std::max(1.05 * zero_radius_bound(a.sup_norm(), pi / 4), 2.0 * rr.r_min);
  rep.region = sigma_region(rr.r_min, rb);
  rep.count = count_zeros(a, rep.region, o);
  rep.order = rep.count.count;
  if (rep.order > rep.mass_budget)
    throw Error(Errc::non_convergence, "order exceeds the mass budget floor(M/pi)");
  return rep;
}

// ---- frequency separation -----------------------------------------------------

double factorization_residual(const Potential& q, double N, double kappa_lo, double kappa_hi, int samples,
                              Transmission::Route route) {
  const Transmission full(q, route);
  const Transmission low(littlewood_paley(q, Band::at_most(N)), route);
  const Transmission high(littlewood_paley(q, Band::above(N)), route);
  std::vector<double> res(static_cast<std::size_t>(samples));
  parallel_for(res.size(), [&](std::size_t i) {
    const double t = samples > 1 ? double(i) / (samples - 1) : 0.0;
    const cplx k(0.0, kappa_lo * std::pow(kappa_hi / kappa_lo, t));
    res[i] = std::abs(full(k) - low(k) * high(k));
  });
  return *std::max_element(res.begin(), res.end());
}

WindingReport winding_asymptotics_check(const Potential& q, double eps, double N, Transmission::Route route,
                                        double calibration) {
  WindingReport rep;
  rep.eps = eps;
  rep.N = N;
  rep.mass = q.mass();
  rep.comparison = eps * eps * calibration;
  if (rep.mass == 0.0) return rep;
  rep.high_tail = band_norm_sq(q, Band::above(N)) / rep.mass;
  rep.low_tail = band_norm_sq(q, Band::at_most(N)) / rep.mass;
  rep.hf_holds = rep.high_tail <= eps * eps;
  rep.lf_holds = rep.low_tail <= eps * eps;
  const Transmission a(q, route);
  auto ray_max = [&](double k0, double k1, auto&& target) {
    double m = 0.0;
    for (int i = 0; i <= 6; ++i) {
      const cplx k(0.0, k0 * std::pow(k1 / k0, i / 6.0));
      m = std::max(m, std::abs(a(k) - target));
    }
    return m;
  };
  if (rep.hf_holds) rep.part_i = ray_max(N / (eps * eps), 100.0 * N / (eps * eps), std::exp(-0.5 * I * rep.mass));
  if (rep.lf_holds) rep.part_ii = ray_max(eps * eps * N / 100.0, eps * eps * N, cplx(1.0));

  // (Gap) at N itself: the annulus eps^3 N < |xi| <= N / eps^3.
  const double e3 = eps * eps * eps;
  rep.gap.N0 = N;
  rep.gap.N1 = N;
  rep.gap.threshold = eps * std::sqrt(rep.mass);
  rep.gap.annulus_norm = std::sqrt(band_norm_sq(q, Band::annulus(e3 * N, N / e3)));
  rep.gap.search_hi = N;
  rep.gap_holds = rep.gap.annulus_norm <= rep.gap.threshold;
  rep.factorization = factorization_residual(q, N, N / 100.0, 100.0 * N, 25, route);
  return rep;
}

}  // namespace kn

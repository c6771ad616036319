#include "knscatter/grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "knscatter/fft.hpp"
#include "knscatter/sampler.hpp"

namespace kn {

GridSpec GridSpec::make(double L, std::size_t n) {
  if (!(L > 0.0) || !std::isfinite(L)) throw Error(Errc::precondition, "grid: L must be positive");
  if (n < 16 || (n & (n - 1)) != 0)
    throw Error(Errc::precondition, "grid: n must be a power of two >= 16");
  return GridSpec{L, n};
}

long GridSpec::signed_bin(std::size_t m) const {
  const long lm = static_cast<long>(m);
  const long ln = static_cast<long>(n);
  return (2 * lm < ln) ? lm : lm - ln;
}

double GridSpec::xi(std::size_t m) const { return static_cast<double>(signed_bin(m)) * dxi(); }

const char* decay_name(DecayTag t) {
  switch (t) {
    case DecayTag::schwartz: return "schwartz";
    case DecayTag::algebraic: return "algebraic";
    case DecayTag::bandlimited: return "bandlimited";
  }
  return "schwartz";
}

DecayTag decay_from_name(const std::string& s) {
  if (s == "schwartz") return DecayTag::schwartz;
  if (s == "algebraic") return DecayTag::algebraic;
  if (s == "bandlimited") return DecayTag::bandlimited;
  throw Error(Errc::io, "unknown decay_tag '" + s + "'");
}

double Potential::mass() const { return l2_norm_sq(grid, samples); }

double Potential::sup_norm() const {
  double m = 0.0;
  for (const auto& v : samples) m = std::max(m, std::abs(v));
  return m;
}

Potential operator+(const Potential& a, const Potential& b) {
  if (!(a.grid == b.grid)) throw Error(Errc::precondition, "potential sum: grids differ");
  Potential out = a;
  for (std::size_t j = 0; j < out.samples.size(); ++j) out.samples[j] += b.samples[j];
  if (a.decay != b.decay) out.decay = DecayTag::schwartz;
  return out;
}

Potential operator*(cplx c, const Potential& q) {
  Potential out = q;
  for (auto& v : out.samples) v *= c;
  return out;
}

Family modulated(Family base, double carrier) {
  return Family{ModulatedFamily{std::make_shared<const Family>(std::move(base)), carrier}};
}

cplx algebraic_soliton(double x) {
  const cplx one_ix{1.0, x};
  return 2.0 * cplx{1.0, -x} / (one_ix * one_ix) * std::exp(cplx{0.0, x / 2.0});
}

namespace {

struct Sampler {
  const GridSpec& g;

  Potential operator()(const ZeroFamily&) const {
    return Potential{g, std::vector<cplx>(g.n, 0.0), DecayTag::schwartz, 1.0};
  }

  Potential operator()(const GaussianFamily& f) const {
    if (!(f.width > 0.0)) throw Error(Errc::precondition, "gaussian: width must be positive");
    Potential q{g, std::vector<cplx>(g.n), DecayTag::schwartz, 1.0};
    for (std::size_t j = 0; j < g.n; ++j) {
      const double y = g.x(j) - f.center;
      // int_{-inf}^{x} |q|^2 in closed form
      const double cum = 0.5 * f.amplitude * f.amplitude * f.width * std::sqrt(pi) *
                         (1.0 + std::erf(y / f.width));
      q.samples[j] = f.amplitude * std::exp(-y * y / (2.0 * f.width * f.width)) *
                     std::exp(cplx{0.0, f.chirp * y * y + f.twist * cum});
    }
    return q;
  }

  Potential operator()(const AlgebraicSolitonFamily&) const {
    Potential q{g, std::vector<cplx>(g.n), DecayTag::algebraic, 1.0};
    for (std::size_t j = 0; j < g.n; ++j) q.samples[j] = algebraic_soliton(g.x(j));
    return q;
  }

  Potential operator()(const RandomBandlimitedFamily& f) const {
    if (f.band >= g.nyquist())
      throw Error(Errc::unresolved_frequency, "random_bandlimited: band exceeds Nyquist");
    std::mt19937_64 rng(f.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<cplx> spec(g.n, 0.0);
    for (std::size_t m = 0; m < g.n; ++m) {
      const double re = normal(rng);
      const double im = normal(rng);
      if (std::abs(g.xi(m)) <= f.band) spec[m] = cplx{re, im};
    }
    fft::inverse(spec);
    double sup = 0.0;
    for (const auto& v : spec) sup = std::max(sup, std::abs(v));
    if (sup > 0.0)
      for (auto& v : spec) v *= f.amplitude / sup;
    return Potential{g, std::move(spec), DecayTag::bandlimited, 1.0};
  }

  Potential operator()(const ModulatedFamily& f) const {
    if (!f.base) throw Error(Errc::precondition, "modulated: missing base family");
    if (std::abs(f.carrier) >= g.nyquist())
      throw Error(Errc::unresolved_frequency, "modulated: carrier exceeds Nyquist");
    Potential q = std::visit(*this, f.base->v);
    for (std::size_t j = 0; j < g.n; ++j) q.samples[j] *= std::exp(cplx{0.0, f.carrier * g.x(j)});
    return q;
  }
};

}  // namespace

Potential sample_potential(const Family& f, const GridSpec& g) {
  return std::visit(Sampler{g}, f.v);
}

std::vector<cplx> fourier(const Potential& q) {
  const GridSpec& g = q.grid;
  std::vector<cplx> s = q.samples;
  fft::forward(s);
  const double c = g.dx() / std::sqrt(2.0 * pi);
  for (std::size_t m = 0; m < g.n; ++m) s[m] *= c * std::exp(cplx{0.0, g.xi(m) * g.L});
  return s;
}

std::vector<cplx> inverse_fourier(const GridSpec& g, std::vector<cplx> spec) {
  const double c = g.dxi() / std::sqrt(2.0 * pi);
  for (std::size_t m = 0; m < g.n; ++m) spec[m] *= c * std::exp(cplx{0.0, -g.xi(m) * g.L});
  fft::inverse(spec);
  return spec;
}

std::vector<cplx> spectral_derivative(const GridSpec& g, std::vector<cplx> f) {
  fft::forward(f);
  const double inv_n = 1.0 / static_cast<double>(g.n);
  for (std::size_t m = 0; m < g.n; ++m) {
    const bool nyq = (2 * m == g.n);
    f[m] *= nyq ? cplx{0.0} : cplx{0.0, g.xi(m)} * inv_n;
  }
  fft::inverse(f);
  return f;
}

std::vector<cplx> fd_derivative(const GridSpec& g, const std::vector<cplx>& f) {
  constexpr int S = 9;  // eighth order
  const std::size_t n = g.n;
  std::vector<cplx> d(n);
  const double dx = g.dx();
  std::vector<std::vector<double>> cache(S);
  for (std::size_t j = 0; j < n; ++j) {
    long s = static_cast<long>(j) - S / 2;
    s = std::clamp(s, 0L, static_cast<long>(n) - S);
    const long off = static_cast<long>(j) - s;
    auto& w = cache[off];
    if (w.empty()) {
      std::vector<double> nodes(S);
      for (int i = 0; i < S; ++i) nodes[i] = static_cast<double>(i);
      w = fornberg_weights(static_cast<double>(off), nodes, 1)[1];
    }
    cplx acc = 0.0;
    for (int i = 0; i < S; ++i) acc += w[i] * f[s + i];
    d[j] = acc / dx;
  }
  return d;
}

std::vector<cplx> derivative(const Potential& q) {
  if (q.decay == DecayTag::algebraic) return fd_derivative(q.grid, q.samples);
  return spectral_derivative(q.grid, q.samples);
}

std::vector<cplx> derivative_nonperiodic(const GridSpec& g, const std::vector<cplx>& f) {
  const cplx f0 = f.front();
  const cplx f1 = f.back();
  const double w = g.L / 16.0;
  std::vector<cplx> rem(g.n);
  std::vector<cplx> step_d(g.n);
  for (std::size_t j = 0; j < g.n; ++j) {
    const double t = std::tanh(g.x(j) / w);
    rem[j] = f[j] - (f0 + (f1 - f0) * 0.5 * (1.0 + t));
    step_d[j] = (f1 - f0) * 0.5 * (1.0 - t * t) / w;
  }
  auto d = spectral_derivative(g, std::move(rem));
  for (std::size_t j = 0; j < g.n; ++j) d[j] += step_d[j];
  return d;
}

double l2_norm_sq(const GridSpec& g, const std::vector<cplx>& f) {
  double s = 0.0;
  for (const auto& v : f) s += std::norm(v);
  return s * g.dx();
}

namespace {

// Tail integrals of the unit algebraic soliton over |x| > X (both sides).
struct AlgebraicTails {
  double M, H1, H2;
};

AlgebraicTails algebraic_tails(double X) {
  const double u = 1.0 + X * X;
  const double i1 = pi / 2.0 - std::atan(X);
  const double i2 = pi / 4.0 - X / (2.0 * u) - std::atan(X) / 2.0;
  const double i3 = 3.0 * pi / 16.0 - X / (4.0 * u * u) - 3.0 * X / (8.0 * u) - 3.0 * std::atan(X) / 8.0;
  // |q|^2 = 4/u; H1 density 4/u - 8/u^2 (times -1/2); H2 density 1/u + 4/u^2 - 8/u^3.
  return {2.0 * 4.0 * i1, -0.5 * 2.0 * (4.0 * i1 - 8.0 * i2), 2.0 * (i1 + 4.0 * i2 - 8.0 * i3)};
}

}  // namespace

MassReport mass_report(const Potential& q) {
  MassReport r;
  r.interior = q.mass();
  if (q.decay == DecayTag::algebraic) r.tail = algebraic_tails(q.tail_scale * q.grid.L).M;
  r.total = r.interior + r.tail;
  const auto spec = fourier(q);
  double ps = 0.0;
  for (const auto& v : spec) ps += std::norm(v);
  r.parseval_residual = std::abs(r.interior - ps * q.grid.dxi());
  return r;
}

Conserved conserved(const Potential& q) {
  const auto dq = derivative(q);
  const GridSpec& g = q.grid;
  double h1 = 0.0;
  double h2 = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double rho = std::norm(q.samples[j]);
    const double flux = 2.0 * std::imag(std::conj(q.samples[j]) * dq[j]);  // i(q qbar' - qbar q')
    h1 += flux + rho * rho;
    h2 += std::norm(dq[j]) + 0.75 * rho * flux + 0.5 * rho * rho * rho;
  }
  Conserved c;
  c.M = mass_report(q).total;
  c.H1 = -0.5 * h1 * g.dx();
  c.H2 = h2 * g.dx();
  if (q.decay == DecayTag::algebraic) {
    const double h = q.tail_scale;
    const auto t = algebraic_tails(h * g.L);
    c.H1 += h * t.H1;
    c.H2 += h * h * t.H2;
  }
  return c;
}

// ---- Littlewood-Paley -------------------------------------------------------

double lp_cutoff(double xi) {
  const double a = std::abs(xi);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  auto f = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  const double t = a - 1.0;
  return f(1.0 - t) / (f(1.0 - t) + f(t));
}

bool is_dyadic(double N) {
  if (!(N > 0.0) || !std::isfinite(N)) return false;
  int e = 0;
  return std::frexp(N, &e) == 0.5;
}

double lp_multiplier(const Band& b, double xi) {
  switch (b.kind) {
    case Band::Kind::at_most: return lp_cutoff(xi / b.lo);
    case Band::Kind::above: return 1.0 - lp_cutoff(xi / b.lo);
    case Band::Kind::piece: return lp_cutoff(xi / b.lo) - lp_cutoff(2.0 * xi / b.lo);
    case Band::Kind::annulus: return lp_cutoff(xi / b.hi) - lp_cutoff(xi / b.lo);
  }
  return 0.0;
}

namespace {

void check_band(const Band& b, const GridSpec& g) {
  if (!is_dyadic(b.lo) || !is_dyadic(b.hi))
    throw Error(Errc::precondition, "Littlewood-Paley: band edges must be dyadic");
  if (b.kind == Band::Kind::annulus && !(b.lo < b.hi))
    throw Error(Errc::precondition, "Littlewood-Paley: annulus needs lo < hi");
  if (2.0 * std::max(b.lo, b.hi) > g.nyquist() * (1.0 + 1e-12))
    throw Error(Errc::unresolved_frequency, "Littlewood-Paley: band edge beyond Nyquist");
}

}  // namespace

Potential littlewood_paley(const Potential& q, const Band& b) {
  check_band(b, q.grid);
  std::vector<cplx> s = q.samples;
  fft::forward(s);
  const double inv_n = 1.0 / static_cast<double>(q.grid.n);
  for (std::size_t m = 0; m < q.grid.n; ++m) s[m] *= lp_multiplier(b, q.grid.xi(m)) * inv_n;
  fft::inverse(s);
  Potential out = q;
  out.samples = std::move(s);
  if (out.decay == DecayTag::algebraic) out.decay = DecayTag::schwartz;
  return out;
}

double band_norm_sq(const Potential& q, const Band& b) {
  check_band(b, q.grid);
  const auto spec = fourier(q);
  double s = 0.0;
  for (std::size_t m = 0; m < q.grid.n; ++m) {
    const double w = lp_multiplier(b, q.grid.xi(m));
    s += w * w * std::norm(spec[m]);
  }
  return s * q.grid.dxi();
}

namespace {

double smallest_dyadic_at_least(double x) { return std::exp2(std::ceil(std::log2(x))); }
double largest_dyadic_at_most(double x) { return std::exp2(std::floor(std::log2(x))); }

// Fraction ||P_{>N} q||^2 / ||q||^2 without re-transforming for every N.
struct SpectrumView {
  const GridSpec& g;
  std::vector<double> power;
  double total = 0.0;

  explicit SpectrumView(const Potential& q) : g(q.grid) {
    const auto s = fourier(q);
    power.resize(s.size());
    for (std::size_t m = 0; m < s.size(); ++m) {
      power[m] = std::norm(s[m]);
      total += power[m];
    }
  }
  double fraction(const Band& b) const {
    double acc = 0.0;
    for (std::size_t m = 0; m < power.size(); ++m) {
      const double w = lp_multiplier(b, g.xi(m));
      acc += w * w * power[m];
    }
    return total > 0.0 ? acc / total : 0.0;
  }
  double N_min() const { return smallest_dyadic_at_least(g.dxi() / 2.0); }
  double N_max() const { return largest_dyadic_at_most(g.nyquist() / 2.0); }
};

}  // namespace

std::vector<TailEntry> tail_profile(const Potential& q) {
  SpectrumView sv(q);
  std::vector<TailEntry> out;
  for (double N = sv.N_min(); N <= sv.N_max(); N *= 2.0)
    out.push_back({N, sv.fraction(Band::above(N))});
  return out;
}

double equicontinuity_threshold(const Potential& q, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(Errc::precondition, "eps must lie in (0,1)");
  SpectrumView sv(q);
  for (double N = sv.N_min(); N <= sv.N_max(); N *= 2.0)
    if (sv.fraction(Band::above(N)) <= eps * eps) return N;
  throw Error(Errc::unresolved_frequency, "equicontinuity threshold beyond Nyquist");
}

double spectral_ceiling(const Potential& q, double rel) {
  SpectrumView sv(q);
  for (double N = sv.N_min(); N <= sv.N_max(); N *= 2.0)
    if (sv.fraction(Band::above(N)) <= rel) return N;
  return sv.N_max();
}

double spectral_floor(const Potential& q, double rel) {
  SpectrumView sv(q);
  double best = sv.N_min();
  for (double N = sv.N_min(); N <= sv.N_max(); N *= 2.0) {
    if (sv.fraction(Band::at_most(N)) <= rel)
      best = N;
    else
      break;
  }
  return best;
}

GapResult find_spectral_gap(const Potential& q, double eps, double N0) {
  if (!is_dyadic(eps) || eps > 0.25) throw Error(Errc::precondition, "gap search: eps must be dyadic <= 1/4");
  if (!is_dyadic(N0)) throw Error(Errc::precondition, "gap search: N0 must be dyadic");
  SpectrumView sv(q);
  const double e3 = eps * eps * eps;
  const double lo = N0 / (e3 * eps);
  // Upper end N0 eps^{-4} eps^{-6/eps^2}, capped so the annulus stays below Nyquist.
  const double log2_hi = std::log2(lo) + (-6.0 / (eps * eps)) * std::log2(eps);
  const double cap = largest_dyadic_at_most(e3 * sv.N_max());
  const double hi = std::min(std::exp2(std::min(log2_hi, 1000.0)), cap);
  GapResult r;
  r.N0 = N0;
  r.threshold = eps * std::sqrt(sv.total * sv.g.dxi());
  r.search_hi = hi;
  const double total = sv.total * sv.g.dxi();
  for (double N1 = lo; N1 <= hi; N1 *= 2.0) {
    const double frac = sv.fraction(Band::annulus(e3 * N1, N1 / e3));
    if (std::sqrt(frac * total) <= r.threshold) {
      r.N1 = N1;
      r.annulus_norm = std::sqrt(frac * total);
      return r;
    }
  }
  throw Error(Errc::no_gap_found, "no spectral gap in [N0/eps^4, " + std::to_string(hi) + "]");
}

Potential rescale(const Potential& q, double h) {
  if (!(h > 0.0)) throw Error(Errc::precondition, "rescale: h must be positive");
  Potential out = q;
  out.grid = GridSpec{q.grid.L / h, q.grid.n};
  const double s = std::sqrt(h);
  for (auto& v : out.samples) v *= s;
  out.tail_scale = q.tail_scale * h;
  return out;
}

Potential resample(const Potential& q, const GridSpec& target) {
  const auto spec = fourier(q);
  Potential out{target, std::vector<cplx>(target.n, 0.0), q.decay, q.tail_scale};
  const double c = q.grid.dxi() / std::sqrt(2.0 * pi);
  for (std::size_t j = 0; j < target.n; ++j) {
    const double x = target.x(j);
    cplx acc = 0.0;
    for (std::size_t m = 0; m < q.grid.n; ++m) acc += spec[m] * std::exp(cplx{0.0, q.grid.xi(m) * x});
    out.samples[j] = c * acc;
  }
  const double lost = std::abs(out.mass() - q.mass());
  if (lost > 1e-10 * std::max(q.mass(), 1e-300))
    throw Error(Errc::unresolved_frequency, "resample: content outside the target window");
  return out;
}

}  // namespace kn

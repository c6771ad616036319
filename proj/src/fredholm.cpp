#include "knscatter/fredholm.hpp"

#include <algorithm>
#include <cmath>

namespace kn {

namespace {

constexpr double kSupportRel = 1e-15;  // |qhat| below this fraction of the peak counts as zero

void require_upper(cplx k) {
  if (!(k.imag() > 0.0))
    throw Error(Errc::precondition, "fredholm: Im k must be strictly positive");
}

double quartic_norm(const Potential& q) {
  double s = 0.0;
  for (const auto& v : q.samples) s += std::norm(v) * std::norm(v);
  return s * q.grid.dx();
}

// Factors F = k D1 Q and G = D2 conj(Q') of K = F G on xi bins -B..B and the
// zeta bins they couple to.
struct Factors {
  long B = 0;
  long z_lo = 0;
  Eigen::MatrixXcd F, G;
};

Factors build_factors(const BoxSpectrum& f, const BoxSpectrum& h, cplx k, long B) {
  const double dxi = f.dxi();
  const double c = dxi / std::sqrt(2.0 * pi);
  const long lo = std::min(f.bin_lo, h.bin_lo);
  const long hi = std::max(f.bin_hi, h.bin_hi);
  Factors out;
  out.B = B;
  out.z_lo = -B - hi;
  const long nxi = 2 * B + 1;
  const long nz = 2 * B + 1 + (hi - lo);
  out.F = Eigen::MatrixXcd::Zero(nxi, nz);
  out.G = Eigen::MatrixXcd::Zero(nz, nxi);
  for (long i = 0; i < nxi; ++i) {
    const long xb = i - B;
    const double xi = double(xb) * dxi;
    const cplx d1 = k * I / (k + xi);
    for (long w = lo; w <= hi; ++w) {
      const long j = xb - w - out.z_lo;
      out.F(i, j) = d1 * f.at(w) * c;
      const double zeta = double(xb - w) * dxi;
      out.G(j, i) = -I / (zeta - k) * std::conj(h.at(w)) * c;
    }
  }
  return out;
}

// Sum over xi in dxi*Z of dxi / ((xi + k)(xi - w - k)), symmetric summation.
cplx lattice_sum(double w, cplx k, double dxi) {
  const cplx c = w + k;
  auto cot = [](cplx z) { return 1.0 / std::tan(z); };
  return -pi * (cot(pi * c / dxi) + cot(pi * k / dxi)) / (2.0 * k + w);
}

// int dt / (sqrt(t^2 + kap^2) sqrt((t - D)^2 + kap^2)) by the trapezoid rule
// after t = D/2 + kap sinh(u); the integrand is analytic and decays like e^{-|u|}.
double pair_integral(double D, double kap) {
  const double h = 0.02;
  const double umax = 60.0;
  double s = 0.0;
  for (double u = -umax; u <= umax; u += h) {
    const double t = 0.5 * D + kap * std::sinh(u);
    const double jac = kap * std::cosh(u);
    s += jac / (std::hypot(t, kap) * std::hypot(t - D, kap));
  }
  return s * h;
}

cplx determinant(const Eigen::MatrixXcd& K) {
  const long n = K.rows();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(n, n) - K;
  return Eigen::PartialPivLU<Eigen::MatrixXcd>(A).determinant();
}

}  // namespace

cplx BoxSpectrum::at(long bin) const {
  if (bin < bin_lo || bin > bin_hi) return 0.0;
  return qhat[static_cast<std::size_t>(bin + offset)];
}

BoxSpectrum box_spectrum(const Potential& q, double min_half_length) {
  std::size_t factor = 1;
  while (q.grid.L * double(factor) < min_half_length) factor *= 2;
  Potential padded;
  padded.grid = GridSpec::make(q.grid.L * double(factor), q.grid.n * factor);
  padded.decay = q.decay;
  padded.tail_scale = q.tail_scale;
  padded.samples.assign(padded.grid.n, 0.0);
  const std::size_t shift = (padded.grid.n - q.grid.n) / 2;
  std::copy(q.samples.begin(), q.samples.end(), padded.samples.begin() + long(shift));

  const auto spec = fourier(padded);
  BoxSpectrum s;
  s.box = padded.grid;
  const std::size_t n = padded.grid.n;
  s.offset = long(n / 2);
  s.qhat.assign(n, 0.0);
  double peak = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    s.qhat[std::size_t(padded.grid.signed_bin(m) + s.offset)] = spec[m];
    peak = std::max(peak, std::abs(spec[m]));
  }
  s.bin_lo = 1;
  s.bin_hi = 0;
  if (peak > 0.0) {
    for (long b = -s.offset; b < s.offset; ++b) {
      if (std::abs(s.qhat[std::size_t(b + s.offset)]) > kSupportRel * peak) {
        if (s.bin_lo > s.bin_hi) s.bin_lo = s.bin_hi = b;
        s.bin_lo = std::min(s.bin_lo, b);
        s.bin_hi = std::max(s.bin_hi, b);
      }
    }
  }
  if (s.bin_lo > s.bin_hi) s.bin_lo = s.bin_hi = 0;  // q = 0: single zero bin
  return s;
}

Discretization assemble(const BoxSpectrum& s, cplx k, double xi_cutoff) {
  require_upper(k);
  if (xi_cutoff > s.box.nyquist() * (1.0 + 1e-12))
    throw Error(Errc::precondition, "fredholm: cutoff beyond the grid Nyquist frequency");
  const double dxi = s.dxi();
  const long B = std::max(1L, long(std::floor(xi_cutoff / dxi)));
  const Factors fac = build_factors(s, s, k, B);
  Discretization d;
  d.k = k;
  d.dxi = dxi;
  d.xi_cutoff = double(B) * dxi;
  d.xi.resize(std::size_t(2 * B + 1));
  for (long i = 0; i <= 2 * B; ++i) d.xi[std::size_t(i)] = double(i - B) * dxi;
  d.K = fac.F * fac.G;

  double total = 0.0, outside = 0.0;
  for (long b = s.bin_lo; b <= s.bin_hi; ++b) {
    const double w = std::norm(s.at(b));
    total += w;
    if (std::abs(double(b) * dxi) > d.xi_cutoff) outside += w;
  }
  d.cutoff_too_small = outside > 1e-10 * total;
  return d;
}

Discretization assemble(const Potential& q, cplx k, double xi_cutoff, const FredholmOptions& opts) {
  require_upper(k);
  return assemble(box_spectrum(q, opts.periodization / k.imag()), k, xi_cutoff);
}

double nuclear_norm(const Discretization& d) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(d.K);
  return svd.singularValues().sum();
}

cplx trace_quadrature(const BoxSpectrum& f, const BoxSpectrum& h, cplx k) {
  const double dxi = f.dxi();
  cplx s = 0.0;
  const long lo = std::max(f.bin_lo, h.bin_lo);
  const long hi = std::min(f.bin_hi, h.bin_hi);
  for (long b = lo; b <= hi; ++b) {
    const double w = double(b) * dxi;
    s += I * k / (2.0 * k + w) * f.at(b) * std::conj(h.at(b));
  }
  return s * dxi;
}

FredholmReport det_a(const Potential& q, cplx k, const FredholmOptions& opts) {
  require_upper(k);
  const BoxSpectrum s = box_spectrum(q, opts.periodization / k.imag());
  const double dxi = s.dxi();
  FredholmReport rep;
  rep.k = k;
  rep.trace_exact = trace_quadrature(s, s, k);

  const double band = double(std::max(std::abs(s.bin_lo), std::abs(s.bin_hi))) * dxi;
  double xi_cut = opts.xi_cutoff;
  if (xi_cut <= 0.0) {
    const double base = 4.0 * (std::abs(k.real()) + band);
    const double tol = std::cbrt(std::norm(k) * quartic_norm(q) / (3.0 * pi * opts.rel_tol));
    xi_cut = std::max(base, tol);
    const double cap_size = double(opts.max_size / 2) * dxi;
    xi_cut = std::min({xi_cut, cap_size, s.box.nyquist()});
  }
  if (std::abs(q.mass()) == 0.0) {
    rep.det = rep.det_raw = 1.0;
    rep.xi_cutoff = xi_cut;
    return rep;
  }

  // Finite sections at two cutoffs; after the trace correction the
  // truncation error decays like cutoff^{-3}.
  const long B2 = std::max(2L, long(std::floor(xi_cut / dxi)));
  const long B1 = std::max(1L, long(std::lround(0.7 * double(B2))));
  auto corrected = [&](long B, Discretization& keep) {
    keep = assemble(s, k, double(B) * dxi + 0.5 * dxi);
    const cplx tr = keep.K.trace();
    return std::pair<cplx, cplx>(determinant(keep.K), tr);
  };
  Discretization d1, d2;
  const auto [raw1, tr1] = corrected(B1, d1);
  const auto [raw2, tr2] = corrected(B2, d2);
  const cplx c1 = raw1 * std::exp(-(rep.trace_exact - tr1));
  const cplx c2 = raw2 * std::exp(-(rep.trace_exact - tr2));
  const double r = (double(B2) + 0.5) / (double(B1) + 0.5);
  const double r3 = r * r * r;
  rep.det = (r3 * c2 - c1) / (r3 - 1.0);
  rep.err_est = std::abs(c2 - c1) / (r3 - 1.0);
  rep.det_raw = raw2;
  rep.trace_matrix = tr2;
  rep.xi_cutoff = d2.xi_cutoff;
  rep.size = std::size_t(d2.K.rows());
  rep.cutoff_too_small = d2.cutoff_too_small;
  if (opts.with_hs) {
    const HsReport hs = hs_report(s, k);
    rep.hs_norm = std::sqrt(hs.hs_norm_sq);
    rep.paper_bound = hs.bound_integral;
  }
  return rep;
}

TracePairing trace_pairing(const Potential& f, const Potential& h, cplx k, double xi_cutoff) {
  require_upper(k);
  if (!(f.grid == h.grid)) throw Error(Errc::precondition, "trace_pairing: grids differ");
  const double box_len = 11.0 / k.imag();
  const BoxSpectrum fs = box_spectrum(f, box_len);
  const BoxSpectrum hs = box_spectrum(h, box_len);
  const double dxi = fs.dxi();
  TracePairing out;
  out.quadrature = trace_quadrature(fs, hs, k);
  if (xi_cutoff <= 0.0) {
    const double band =
        double(std::max({std::abs(fs.bin_lo), std::abs(fs.bin_hi), std::abs(hs.bin_lo),
                         std::abs(hs.bin_hi)})) *
        dxi;
    xi_cutoff = 4.0 * (std::abs(k.real()) + band);
  }
  xi_cutoff = std::min(xi_cutoff, fs.box.nyquist());
  const long B = std::max(1L, long(std::floor(xi_cutoff / dxi)));
  const Factors fac = build_factors(fs, hs, k, B);
  cplx tr = 0.0;
  for (long i = 0; i < fac.F.rows(); ++i) tr += (fac.F.row(i).transpose().cwiseProduct(fac.G.col(i))).sum();
  out.matrix = tr;

  // Diagonal beyond the cutoff: full-lattice sum minus the retained bins,
  // both in closed form.
  const double c = dxi / std::sqrt(2.0 * pi);
  const long lo = std::max(fs.bin_lo, hs.bin_lo);
  const long hi = std::min(fs.bin_hi, hs.bin_hi);
  cplx tail = 0.0;
  for (long b = lo; b <= hi; ++b) {
    const double w = double(b) * dxi;
    const cplx weight = k * fs.at(b) * std::conj(hs.at(b)) * c * c;
    cplx inside = 0.0;
    for (long x = -B; x <= B; ++x) {
      const double xi = double(x) * dxi;
      inside += 1.0 / ((k + xi) * (xi - w - k));
    }
    tail += weight * (lattice_sum(w, k, dxi) / dxi - inside);
  }
  out.lattice_tail = tail;
  return out;
}

HsReport hs_report(const BoxSpectrum& s, cplx k) {
  require_upper(k);
  const double dxi = s.dxi();
  const double kap = k.imag();
  HsReport out;
  for (long b = s.bin_lo; b <= s.bin_hi; ++b) {
    const double w2 = std::norm(s.at(b));
    if (w2 == 0.0) continue;
    const double xi = double(b) * dxi + 2.0 * k.real();
    out.hs_norm_sq += w2 * pair_integral(std::abs(xi), kap);
    out.bound_integral += std::log(4.0 + xi * xi / (kap * kap)) * w2 / std::sqrt(4.0 * kap * kap + xi * xi);
  }
  out.hs_norm_sq *= dxi / (2.0 * pi);
  out.bound_integral *= dxi;
  return out;
}

std::vector<BandNorm> localized_norms(const BoxSpectrum& s, cplx k, double xi_cutoff,
                                      const std::vector<double>& Ns) {
  require_upper(k);
  const double dxi = s.dxi();
  const long B = std::max(1L, long(std::floor(std::min(xi_cutoff, s.box.nyquist()) / dxi)));
  const long n = 2 * B + 1;
  const double c = dxi / std::sqrt(2.0 * pi);
  std::vector<BandNorm> out;
  for (double N : Ns) {
    BoxSpectrum piece = s;
    for (long b = s.bin_lo; b <= s.bin_hi; ++b)
      piece.qhat[std::size_t(b + s.offset)] *= lp_multiplier(Band::piece(N), double(b) * dxi);
    BandNorm bn;
    bn.N = N;
    bn.hs_norm = std::sqrt(hs_report(piece, k).hs_norm_sq);

    // Symmetrized kernel m1(xi)^{-1/2} qhat(xi - eta) m2(eta)^{-1/2}.
    Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(n, n);
    for (long i = 0; i < n; ++i) {
      const double xi = double(i - B) * dxi;
      const cplx m1 = std::sqrt(-I * (k + xi));
      for (long j = 0; j < n; ++j) {
        const cplx v = piece.at(i - j);
        if (v == 0.0) continue;
        const double eta = double(j - B) * dxi;
        L(i, j) = v * c / (m1 * std::sqrt(I * (eta - k)));
      }
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n) / std::sqrt(double(n));
    double sigma = 0.0;
    for (int it = 0; it < 60; ++it) {
      Eigen::VectorXcd w = L.adjoint() * (L * v);
      const double nw = w.norm();
      if (nw == 0.0) break;
      sigma = std::sqrt(nw);
      v = w / nw;
    }
    bn.op_norm = sigma;
    out.push_back(bn);
  }
  return out;
}

}  // namespace kn

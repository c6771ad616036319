#pragma once
// Independent reference computations for tests. Nothing here calls into the
// library's numerics: potentials are evaluated from closed forms and ODEs use
// an adaptive Dormand-Prince 5(4) integrator.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;

template <std::size_t N>
using State = std::array<cplx, N>;

// Integrates y' = f(x, y) from x0 to x1 with absolute/relative tolerance tol.
template <std::size_t N>
State<N> dopri(const std::function<State<N>(double, const State<N>&)>& f, State<N> y, double x0,
               double x1, double tol, double h0 = 1e-3) {
  static const double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1, 1};
  static const double a[7][6] = {{0},
                                 {1.0 / 5},
                                 {3.0 / 40, 9.0 / 40},
                                 {44.0 / 45, -56.0 / 15, 32.0 / 9},
                                 {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
                                 {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
                                 {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static const double b5[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
  static const double b4[7] = {5179.0 / 57600, 0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200,
                               187.0 / 2100, 1.0 / 40};
  const double dir = x1 > x0 ? 1.0 : -1.0;
  double x = x0;
  double h = dir * std::abs(h0);
  while (dir * (x1 - x) > 0) {
    if (dir * (x + h - x1) > 0) h = x1 - x;
    State<N> k[7];
    for (int s = 0; s < 7; ++s) {
      State<N> ys = y;
      for (int r = 0; r < s; ++r)
        for (std::size_t i = 0; i < N; ++i) ys[i] += h * a[s][r] * k[r][i];
      k[s] = f(x + c[s] * h, ys);
    }
    State<N> y5 = y;
    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      cplx d5 = 0.0, d4 = 0.0;
      for (int s = 0; s < 7; ++s) {
        d5 += b5[s] * k[s][i];
        d4 += b4[s] * k[s][i];
      }
      y5[i] += h * d5;
      const double sc = tol * (1.0 + std::abs(y5[i]));
      err = std::max(err, std::abs(h * (d5 - d4)) / sc);
    }
    if (err <= 1.0) {
      x += h;
      y = y5;
    }
    const double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::min(5.0, std::max(0.2, fac));
  }
  return y;
}

// a(k) for Im k >= 0 via the left decaying column v (Psi_1^- = e^{-ikx} v):
// v1' = lambda q v2, v2' = 2ik v2 - lambda conj(q) v1, a = v1(+inf).
inline cplx transmission(const std::function<cplx(double)>& q, cplx lambda, double x0, double x1,
                         double tol = 1e-12) {
  const cplx k = lambda * lambda;
  auto f = [&](double x, const State<2>& v) -> State<2> {
    const cplx qx = q(x);
    return {lambda * qx * v[1], cplx(0, 2) * k * v[1] - lambda * std::conj(qx) * v[0]};
  };
  return dopri<2>(f, {1.0, 0.0}, x0, x1, tol)[0];
}

// Scattering matrix S = lim e^{ikx sigma3} Psi^- for real k, as [a, S12, b, S22].
inline std::array<cplx, 4> scattering(const std::function<cplx(double)>& q, cplx lambda, double x0,
                                      double x1, double tol = 1e-12) {
  const cplx k = lambda * lambda;
  // U = e^{ikx sigma3} Psi in the interaction picture.
  auto f = [&](double x, const State<4>& u) -> State<4> {
    const cplx e = std::exp(cplx(0, 2) * k * x);
    const cplx up = lambda * q(x) * e;
    const cplx lo = -lambda * std::conj(q(x)) / e;
    return {up * u[2], up * u[3], lo * u[0], lo * u[1]};
  };
  return dopri<4>(f, {1.0, 0.0, 0.0, 1.0}, x0, x1, tol);
}

inline cplx gaussian(double x, double A, double w, double x0 = 0.0, double chirp = 0.0,
                     double twist = 0.0) {
  const double y = x - x0;
  const double cum = 0.5 * A * A * w * std::sqrt(kPi) * std::erfc(-y / w);
  return A * std::exp(-y * y / (2 * w * w)) * std::exp(cplx(0, chirp * y * y + twist * cum));
}

// Continuous transform (2 pi)^{-1/2} int e^{-i x xi} A e^{-x^2/(2w^2)} dx.
inline cplx gaussian_hat(double xi, double A, double w) {
  return A * w * std::exp(-xi * xi * w * w / 2);
}

// Direct O(n^2) DFT, e^{-2 pi i jm/n}.
inline std::vector<cplx> naive_dft(const std::vector<cplx>& v, int sign = -1) {
  const std::size_t n = v.size();
  std::vector<cplx> out(n);
  for (std::size_t m = 0; m < n; ++m) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      acc += v[j] * std::polar(1.0, sign * 2 * kPi * double((j * m) % n) / double(n));
    out[m] = acc;
  }
  return out;
}

}  // namespace oracle

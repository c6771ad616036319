#include "knscatter/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace kn {

std::vector<std::vector<double>> fornberg_weights(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

LocalInterpolator::LocalInterpolator(const GridSpec& g, std::vector<cplx> values)
    : grid_(g), values_(std::move(values)) {
  if (values_.size() != g.n || g.n < static_cast<std::size_t>(kStencil))
    throw Error(Errc::precondition, "interpolator: sample count does not match grid");
}

std::size_t LocalInterpolator::stencil_start(std::size_t cell) const {
  const long half = kStencil / 2 - 1;  // cell j uses j-3 .. j+4
  long s = static_cast<long>(cell) - half;
  s = std::clamp(s, 0L, static_cast<long>(grid_.n) - kStencil);
  return static_cast<std::size_t>(s);
}

std::array<double, LocalInterpolator::kStencil> LocalInterpolator::interior_weights(double t) {
  std::vector<double> nodes(kStencil);
  for (int i = 0; i < kStencil; ++i) nodes[i] = static_cast<double>(i - (kStencil / 2 - 1));
  auto w = fornberg_weights(t, nodes, 0);
  std::array<double, kStencil> out{};
  std::copy(w[0].begin(), w[0].end(), out.begin());
  return out;
}

cplx LocalInterpolator::at(std::size_t cell, double t) const {
  const std::size_t s = stencil_start(cell);
  std::vector<double> nodes(kStencil);
  for (int i = 0; i < kStencil; ++i)
    nodes[i] = static_cast<double>(static_cast<long>(s) + i - static_cast<long>(cell));
  auto w = fornberg_weights(t, nodes, 0);
  cplx acc = 0.0;
  for (int i = 0; i < kStencil; ++i) acc += w[0][i] * values_[s + i];
  return acc;
}

cplx LocalInterpolator::at(double x) const {
  const double u = (x + grid_.L) / grid_.dx();
  double cf = std::floor(u);
  cf = std::clamp(cf, 0.0, static_cast<double>(grid_.n - 2));
  return at(static_cast<std::size_t>(cf), u - cf);
}

std::vector<cplx> cumulative_integral(const GridSpec& g, const std::vector<cplx>& f) {
  constexpr int S = LocalInterpolator::kStencil;
  const std::size_t n = g.n;
  std::vector<cplx> F(n, 0.0);
  // Gauss-Legendre 4 points integrate the degree-7 interpolant exactly.
  static const double gx[4] = {0.0694318442029737, 0.3300094782075719, 0.6699905217924281,
                               0.9305681557970263};
  static const double gw[4] = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                               0.1739274225687269};
  auto cell_weights = [&](long offset) {
    // offset = cell - stencil_start
    std::vector<double> nodes(S);
    for (int i = 0; i < S; ++i) nodes[i] = static_cast<double>(i - offset);
    std::array<double, S> w{};
    for (int q = 0; q < 4; ++q) {
      auto fw = fornberg_weights(gx[q], nodes, 0);
      for (int i = 0; i < S; ++i) w[i] += gw[q] * fw[0][i];
    }
    return w;
  };
  std::array<std::array<double, S>, S> table{};
  for (long o = 0; o < S; ++o) table[o] = cell_weights(o);
  LocalInterpolator probe(g, f);
  const double dx = g.dx();
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const std::size_t s = probe.stencil_start(j);
    const auto& w = table[j - s];
    cplx acc = 0.0;
    for (int i = 0; i < S; ++i) acc += w[i] * f[s + i];
    F[j + 1] = F[j] + dx * acc;
  }
  return F;
}

}  // namespace kn

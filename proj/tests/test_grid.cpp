#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "knscatter/grid.hpp"
#include "oracle.hpp"

using namespace kn;

namespace {

Potential gauss(const GridSpec& g, double A = 1.0, double w = 1.0, double chirp = 0.0, double twist = 0.0) {
  return sample_potential(Family{GaussianFamily{A, w, 0.0, chirp, twist}}, g);
}

std::vector<double> resolvable_dyadics(const GridSpec& g) {
  std::vector<double> Ns;
  for (double N = std::exp2(std::ceil(std::log2(g.dxi()))); 2.0 * N < g.nyquist(); N *= 2.0) Ns.push_back(N);
  return Ns;
}

double dist(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s = std::max(s, std::abs(a[j] - b[j]));
  return s;
}

}  // namespace

TEST_CASE("grid spec rejects bad sizes") {
  CHECK_THROWS_AS(GridSpec::make(8.0, 100), Error);
  CHECK_THROWS_AS(GridSpec::make(8.0, 8), Error);
  CHECK_THROWS_AS(GridSpec::make(-1.0, 64), Error);
  const auto g = GridSpec::make(8.0, 256);
  CHECK(g.dx() == doctest::Approx(1.0 / 16));
  CHECK(g.dxi() == doctest::Approx(pi / 8));
}

TEST_CASE("family samples") {
  const auto g = GridSpec::make(8.0, 256);
  SUBCASE("zero family") {
    const auto q = sample_potential(Family{ZeroFamily{}}, g);
    for (auto v : q.samples) CHECK(v == cplx(0.0));
  }
  SUBCASE("gaussian at 0 and 1") {
    const auto q = gauss(g);
    const std::size_t j0 = g.n / 2, j1 = j0 + 16;
    REQUIRE(g.x(j0) == 0.0);
    REQUIRE(g.x(j1) == doctest::Approx(1.0));
    CHECK(std::abs(q.samples[j0] - 1.0) < 1e-15);
    CHECK(std::abs(q.samples[j1] - std::exp(-0.5)) < 1e-15);
  }
  SUBCASE("phased gaussian matches the closed form") {
    const auto q = sample_potential(Family{GaussianFamily{1.5, 0.8, 0.3, 0.2, -0.4}}, g);
    double err = 0.0;
    for (std::size_t j = 0; j < g.n; ++j)
      err = std::max(err, std::abs(q.samples[j] - oracle::gaussian(g.x(j), 1.5, 0.8, 0.3, 0.2, -0.4)));
    CHECK(err < 1e-10);
  }
  SUBCASE("algebraic soliton at the origin") {
    CHECK(std::abs(algebraic_soliton(0.0) - 2.0) < 1e-15);
    const auto ga = GridSpec::make(400.0, 1 << 15);
    const auto q = sample_potential(Family{AlgebraicSolitonFamily{}}, ga);
    CHECK(q.decay == DecayTag::algebraic);
    CHECK(std::abs(q.samples[ga.n / 2] - 2.0) < 1e-15);
  }
  SUBCASE("carrier beyond Nyquist") {
    CHECK_THROWS_AS(sample_potential(modulated(Family{GaussianFamily{}}, 2.0 * g.nyquist()), g), Error);
  }
  SUBCASE("random family is deterministic in the seed") {
    const auto a = sample_potential(Family{RandomBandlimitedFamily{7, 2.0, 1.0}}, g);
    const auto b = sample_potential(Family{RandomBandlimitedFamily{7, 2.0, 1.0}}, g);
    const auto c = sample_potential(Family{RandomBandlimitedFamily{8, 2.0, 1.0}}, g);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
    CHECK(a.sup_norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("mass report") {
  SUBCASE("zero") {
    const auto g = GridSpec::make(8.0, 64);
    const auto c = conserved(sample_potential(Family{ZeroFamily{}}, g));
    CHECK(c.M == 0.0);
    CHECK(c.H1 == 0.0);
    CHECK(c.H2 == 0.0);
  }
  SUBCASE("gaussian mass is A^2 w sqrt(pi)") {
    const auto g = GridSpec::make(16.0, 1024);
    for (double A : {0.5, 1.0, 2.0})
      for (double w : {0.7, 1.0, 1.5}) {
        const auto m = mass_report(gauss(g, A, w));
        CHECK(std::abs(m.total - A * A * w * std::sqrt(pi)) < 1e-10 * m.total);
      }
  }
  SUBCASE("gaussian energies against quadrature of the closed form") {
    // H1 = -1/2 int i(q qbar' - qbar q') + |q|^4 ; H2 = int |q'|^2 + 3/4 i |q|^2 (q qbar' - qbar q') + 1/2 |q|^6
    const double A = 1.2, w = 0.9, chirp = 0.3;
    const auto g = GridSpec::make(16.0, 2048);
    const auto c = conserved(gauss(g, A, w, chirp));
    double h1 = 0.0, h2 = 0.0;
    const double dx = 1e-3;
    for (double x = -16.0; x < 16.0; x += dx) {
      const cplx q = oracle::gaussian(x, A, w, 0.0, chirp);
      const cplx qp = q * cplx(-x / (w * w), 2.0 * chirp * x);
      const cplx cross = q * std::conj(qp) - std::conj(q) * qp;
      h1 += (-0.5 * (cplx(0, 1) * cross + std::norm(q) * std::norm(q))).real() * dx;
      h2 += (std::norm(qp) + 0.75 * cplx(0, 1) * std::norm(q) * cross + 0.5 * std::pow(std::norm(q), 3)).real() * dx;
    }
    CHECK(c.H1 == doctest::Approx(h1).epsilon(1e-8));
    CHECK(c.H2 == doctest::Approx(h2).epsilon(1e-8));
  }
  SUBCASE("algebraic soliton with the tail correction") {
    const auto g = GridSpec::make(400.0, 1 << 15);
    const auto q = sample_potential(Family{AlgebraicSolitonFamily{}}, g);
    const auto m = mass_report(q);
    const auto c = conserved(q);
    CHECK(m.tail > 0.0);
    CHECK(std::abs(m.total - 4.0 * pi) <= 1e-4);
    CHECK(std::abs(c.H1) <= 1e-3);
    CHECK(std::abs(c.H2) <= 1e-3);
  }
}

TEST_CASE("Parseval on every family") {
  const auto g = GridSpec::make(16.0, 1024);
  std::vector<Potential> qs = {gauss(g, 1.0, 1.0, 0.4, 0.5),
                               sample_potential(Family{RandomBandlimitedFamily{3, 4.0, 1.0}}, g),
                               sample_potential(modulated(Family{GaussianFamily{}}, 20.0), g)};
  for (const auto& q : qs) {
    const auto m = mass_report(q);
    CHECK(m.parseval_residual <= 1e-10 * m.interior);
  }
  // The library transform against a direct DFT on a small grid.
  const auto gs = GridSpec::make(4.0, 64);
  const auto q = gauss(gs, 1.0, 0.7, 0.3);
  const auto spec = fourier(q);
  auto naive = oracle::naive_dft(q.samples);
  double err = 0.0;
  for (std::size_t m = 0; m < gs.n; ++m) {
    // qhat(xi_m) = dx / sqrt(2 pi) e^{-i x_0 xi_m} DFT_m
    const cplx ref = gs.dx() / std::sqrt(2 * pi) * std::exp(cplx(0, -gs.x(0) * gs.xi(m))) * naive[m];
    err = std::max(err, std::abs(spec[m] - ref));
  }
  CHECK(err < 1e-12);
}

TEST_CASE("Littlewood-Paley") {
  const auto g = GridSpec::make(16.0, 1024);
  const auto q = sample_potential(Family{RandomBandlimitedFamily{11, 30.0, 1.0}}, g);
  SUBCASE("low plus high reproduces q for every resolvable N") {
    for (double N : resolvable_dyadics(g)) {
      const auto lo = littlewood_paley(q, Band::at_most(N));
      const auto hi = littlewood_paley(q, Band::above(N));
      std::vector<cplx> sum(g.n);
      for (std::size_t j = 0; j < g.n; ++j) sum[j] = lo.samples[j] + hi.samples[j];
      CHECK(dist(sum, q.samples) < 1e-13);
    }
  }
  SUBCASE("pieces sum to P_{<=N}") {
    const double N = 8.0;
    auto acc = littlewood_paley(q, Band::at_most(0.25));
    for (double K = 0.5; K <= N; K *= 2.0) acc = acc + littlewood_paley(q, Band::piece(K));
    CHECK(dist(acc.samples, littlewood_paley(q, Band::at_most(N)).samples) < 1e-13);
  }
  SUBCASE("spectrum inside N/4 has no high part") {
    const double N = 16.0;
    const auto low = sample_potential(Family{RandomBandlimitedFamily{5, N / 4, 1.0}}, g);
    const auto hi = littlewood_paley(low, Band::above(N));
    double s = 0.0;
    for (auto v : hi.samples) s = std::max(s, std::abs(v));
    CHECK(s < 1e-14);
  }
  SUBCASE("modulated gaussian at carrier 8N sits above N") {
    const double N = 4.0;
    const auto qm = sample_potential(modulated(Family{GaussianFamily{1.0, 1.0}}, 8.0 * N), g);
    // Direct spectral mass from the DFT with the library multiplier.
    const auto spec = fourier(qm);
    double hi = 0.0, all = 0.0;
    for (std::size_t m = 0; m < g.n; ++m) {
      all += std::norm(spec[m]);
      hi += std::norm(spec[m] * lp_multiplier(Band::above(N), g.xi(m)));
    }
    CHECK(hi / all >= 0.99);
    CHECK(band_norm_sq(qm, Band::above(N)) / qm.mass() >= 0.99);
  }
  SUBCASE("band past Nyquist") {
    CHECK_THROWS_AS(littlewood_paley(q, Band::piece(g.nyquist())), Error);
  }
  SUBCASE("tail profile non-increasing and bounded by M") {
    const auto tp = tail_profile(q);
    REQUIRE(tp.size() > 3);
    for (std::size_t i = 0; i < tp.size(); ++i) {
      CHECK(tp[i].high_fraction <= 1.0 + 1e-12);
      if (i) CHECK(tp[i].high_fraction <= tp[i - 1].high_fraction + 1e-14);
    }
  }
}

TEST_CASE("rescale") {
  const auto g = GridSpec::make(16.0, 1024);
  const auto q = gauss(g, 1.0, 1.0, 0.2);
  SUBCASE("h = 1 is the identity") {
    const auto r = rescale(q, 1.0);
    CHECK(r.grid == q.grid);
    CHECK(r.samples == q.samples);
  }
  SUBCASE("mass is scale invariant") {
    for (double h : {0.5, 2.0, 4.0}) CHECK(std::abs(mass_report(rescale(q, h)).total - q.mass()) <= 1e-8 * q.mass());
  }
  SUBCASE("unit gaussian at h = 4 is the gaussian of amplitude 2 and width 1/4") {
    const auto r = rescale(gauss(g), 4.0);
    double err = 0.0;
    for (std::size_t j = 0; j < r.grid.n; ++j)
      err = std::max(err, std::abs(r.samples[j] - oracle::gaussian(r.grid.x(j), 2.0, 0.25)));
    CHECK(err < 1e-13);
  }
  SUBCASE("resample onto a finer grid is exact for resolved data") {
    const auto r = resample(q, GridSpec::make(16.0, 2048));
    double err = 0.0;
    for (std::size_t j = 0; j < r.grid.n; ++j)
      err = std::max(err, std::abs(r.samples[j] - oracle::gaussian(r.grid.x(j), 1.0, 1.0, 0.0, 0.2)));
    CHECK(err < 1e-10);
  }
}

TEST_CASE("spectral gap search") {
  const double eps = 0.25;
  SUBCASE("band-limited data: the first candidate has an empty annulus") {
    // The first annulus reaches N0 / eps^7 = 512; its multiplier support stays below Nyquist.
    const auto g = GridSpec::make(256.0, 1 << 19);
    const double N0 = 1.0 / 32;
    const auto q = sample_potential(Family{RandomBandlimitedFamily{2, N0 / 2, 1.0}}, g);
    const auto r = find_spectral_gap(q, eps, N0);
    CHECK(r.N1 == N0 / std::pow(eps, 4));
    CHECK(r.annulus_norm < 1e-12);
  }
  SUBCASE("two clumps: the annulus lands between them") {
    const auto g = GridSpec::make(64.0, 1 << 19);
    const double N0 = 1.0 / 16;
    const double carrier = 65536.0 * N0;
    // Low clump: spectrum e^{-128 xi^2}, essentially below 1/8. Bump: width 1 around the carrier.
    const auto q = sample_potential(Family{GaussianFamily{0.25, 16.0}}, g) +
                   sample_potential(modulated(Family{GaussianFamily{1.0, 1.0}}, carrier), g);
    const auto r = find_spectral_gap(q, eps, N0);
    // Exhaustive scan: every earlier candidate fails, the returned one passes.
    const double e3 = eps * eps * eps, M = q.mass();
    for (double N1 = N0 / std::pow(eps, 4); N1 < r.N1; N1 *= 2.0)
      CHECK(std::sqrt(band_norm_sq(q, Band::annulus(e3 * N1, N1 / e3))) > eps * std::sqrt(M));
    CHECK(std::sqrt(band_norm_sq(q, Band::annulus(e3 * r.N1, r.N1 / e3))) <= eps * std::sqrt(M));
    // The annulus multiplier lives on (e3 N1 / 2, 2 N1 / e3), between the clumps.
    CHECK(2.0 * r.N1 / e3 <= carrier - 8.0);
    CHECK(e3 * r.N1 / 2.0 >= 1.0 / 8);
  }
  SUBCASE("spectrum spread over every octave") {
    const auto g = GridSpec::make(64.0, 1 << 14);
    // Equal mass per octave from dxi up to Nyquist/2.
    std::vector<cplx> spec(g.n, 0.0);
    for (std::size_t m = 0; m < g.n; ++m) {
      const double xi = std::abs(g.xi(m));
      if (xi > 0.0 && xi < g.nyquist() / 2) spec[m] = 1.0 / std::sqrt(xi);
    }
    Potential q{g, inverse_fourier(g, spec), DecayTag::bandlimited, 1.0};
    CHECK_THROWS_AS(find_spectral_gap(q, eps, 1.0 / 64), Error);
    try {
      find_spectral_gap(q, eps, 1.0 / 64);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::no_gap_found);
    }
  }
  SUBCASE("eps must be dyadic and at most 1/4") {
    const auto g = GridSpec::make(16.0, 256);
    CHECK_THROWS_AS(find_spectral_gap(gauss(g), 0.3, 1.0), Error);
    CHECK_THROWS_AS(find_spectral_gap(gauss(g), 0.5, 1.0), Error);
  }
}

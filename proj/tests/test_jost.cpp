#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "knscatter/fredholm.hpp"
#include "knscatter/jost.hpp"
#include "oracle.hpp"

using namespace kn;

namespace {

const GridSpec kGrid = GridSpec::make(16.0, 2048);

Potential gauss(double A = 1.0, double w = 1.0, double chirp = 0.0, double twist = 0.0) {
  return sample_potential(Family{GaussianFamily{A, w, 0.0, chirp, twist}}, kGrid);
}

Potential zero() { return sample_potential(Family{ZeroFamily{}}, kGrid); }

}  // namespace

TEST_CASE("spectral point branch") {
  for (cplx k : {cplx(0, 1), cplx(-1, 0), cplx(1, 0), cplx(-3, 0.5), cplx(2, 2), cplx(0, 0)}) {
    const auto p = SpectralPoint::from_k(k);
    CHECK(std::abs(p.lambda * p.lambda - k) < 1e-14);
    CHECK(p.lambda.real() >= 0.0);
    CHECK(p.lambda.imag() >= 0.0);
  }
  const auto p = SpectralPoint::from_lambda(cplx(0, 1));
  CHECK(std::abs(p.k - cplx(-1, 0)) < 1e-15);
}

TEST_CASE("zero potential") {
  const auto q = zero();
  const JostSolver s(q);
  for (cplx k : {cplx(0, 1), cplx(1, 1), cplx(-2, 0.3), cplx(0, 10)}) {
    CHECK(std::abs(s.transmission_value(k) - 1.0) < 1e-15);
    CHECK(std::abs(s.wronskian(SpectralPoint::from_k(k), 0.0).a - 1.0) < 1e-12);
  }
  const auto p = SpectralPoint::from_lambda(1.3);
  const JostData d = s.jost_matrix(p, true);
  CHECK(std::abs(d.a - 1.0) < 1e-12);
  REQUIRE(d.b);
  CHECK(std::abs(*d.b) < 1e-12);
  REQUIRE(d.psi_minus);
  double err = 0.0;
  for (std::size_t i = 0; i < d.psi_minus->x.size(); ++i) {
    const double x = d.psi_minus->x[i];
    const Mat2& m = d.psi_minus->psi[i];
    err = std::max({err, std::abs(m.a - std::exp(-I * p.k * x)), std::abs(m.d - std::exp(I * p.k * x)),
                    std::abs(m.b), std::abs(m.c)});
  }
  CHECK(err < 1e-12);
  const auto rep = scattering_identities_report(q, {0.5, 1.0, cplx(0, 1)});
  CHECK(rep.worst_symmetry() < 1e-12);
  CHECK(rep.worst_det() < 1e-12);
  CHECK(rep.worst_unitarity() < 1e-12);
}

TEST_CASE("gauged route against an adaptive ODE oracle") {
  const double A = 1.2, w = 0.9, chirp = 0.3, twist = 0.4;
  const auto q = gauss(A, w, chirp, twist);
  const JostSolver s(q);
  auto qf = [&](double x) { return oracle::gaussian(x, A, w, 0.0, chirp, twist); };
  for (cplx k : {cplx(0, 0.25), cplx(0, 1), cplx(1, 1), cplx(-1, 2), cplx(0, 4)}) {
    const cplx lam = SpectralPoint::from_k(k).lambda;
    const cplx ref = oracle::transmission(qf, lam, -12.0, 12.0, 1e-12);
    const JostData d = s.transmission(k);
    CHECK(std::abs(d.a - ref) < 1e-8 * (1 + std::abs(ref)));
    CHECK(d.err_est < 1e-6);
  }
}

TEST_CASE("Jost matrix on the real line against the oracle") {
  const double A = 1.0, w = 1.0, chirp = 0.2;
  const auto q = gauss(A, w, chirp);
  auto qf = [&](double x) { return oracle::gaussian(x, A, w, 0.0, chirp); };
  for (cplx lam : {cplx(0.5, 0), cplx(1, 0), cplx(0, 0.7)}) {
    const auto S = oracle::scattering(qf, lam, -12.0, 12.0, 1e-12);
    const JostData d = jost_matrix(q, SpectralPoint::from_lambda(lam), false);
    REQUIRE(d.b);
    CHECK(std::abs(d.a - S[0]) < 1e-8);
    CHECK(std::abs(*d.b - S[2]) < 1e-8);
  }
}

TEST_CASE("gaussian at k = i: ODE route matches the determinant") {
  const auto q = gauss();
  const cplx a = transmission_a_ode(q, cplx(0, 1)).a;
  const cplx d = det_a(q, cplx(0, 1)).det;
  CHECK(std::abs(a - d) <= 1e-6);
}

TEST_CASE("unitarity on the real line") {
  const auto q = gauss(1.5, 1.0, 0.3);
  SUBCASE("lambda = 1: |a|^2 + |b|^2 = 1") {
    const JostData d = jost_matrix(q, SpectralPoint::from_lambda(1.0), false);
    CHECK(std::abs(std::norm(d.a) + std::norm(*d.b) - 1.0) <= 1e-8);
  }
  SUBCASE("lambda on the imaginary axis: |a|^2 - |b|^2 = 1") {
    const JostData d = jost_matrix(q, SpectralPoint::from_lambda(cplx(0, 1)), false);
    CHECK(std::abs(std::norm(d.a) - std::norm(*d.b) - 1.0) <= 1e-8);
  }
  SUBCASE("grid of lambdas") {
    std::vector<cplx> ls;
    for (double l = 0.1; l <= 3.0; l += 0.3) {
      ls.push_back(l);
      ls.push_back(cplx(0, l));
    }
    const auto rep = scattering_identities_report(q, ls);
    CHECK(rep.worst_unitarity() <= 1e-6);
    CHECK(rep.worst_real_line() <= 1e-12);
  }
}

TEST_CASE("symmetries and det Psi") {
  const auto q = gauss(1.0, 1.0, 0.25, 0.3);
  const auto rep = scattering_identities_report(q, {0.5, 1.0, 2.0});
  CHECK(rep.worst_symmetry() <= 1e-8);
  CHECK(rep.worst_det() <= 1e-8);
  CHECK(rep.near_zero < 1e-3);
}

TEST_CASE("large mass, k = -1: |a| >= 1") {
  // M = A^2 w sqrt(pi) = 10
  const double A = std::sqrt(10.0 / std::sqrt(pi));
  const auto q = gauss(A, 1.0);
  CHECK(q.mass() == doctest::Approx(10.0).epsilon(1e-10));
  const JostData d = jost_matrix(q, SpectralPoint::from_lambda(cplx(0, 1)), false);
  CHECK(std::abs(d.a) >= 1.0);
  const auto rep = scattering_identities_report(q, {cplx(0, 1), cplx(0, 0.5), 1.0, 0.5});
  CHECK(rep.worst_real_line() <= 1e-12);
}

TEST_CASE("Wronskian route") {
  const auto q = gauss(1.0, 1.0, 0.2, -0.3);
  const JostSolver s(q);
  SUBCASE("independent of the match point at k = i") {
    const auto p = SpectralPoint::from_k(cplx(0, 1));
    const cplx w0 = s.wronskian(p, 0.0).a;
    CHECK(std::abs(s.wronskian(p, -1.0).a - w0) <= 1e-8);
    CHECK(std::abs(s.wronskian(p, 1.0).a - w0) <= 1e-8);
  }
  SUBCASE("agrees with the gauged route") {
    for (cplx k : {cplx(0, 0.25), cplx(0, 1), cplx(0, 2), cplx(0, 4), cplx(1, 1)}) {
      const cplx a = s.transmission_value(k);
      const cplx w = s.wronskian(SpectralPoint::from_k(k), 0.0).a;
      CHECK(std::abs(a - w) <= 1e-6 * (1.0 + std::abs(a)));
    }
  }
}

TEST_CASE("direct route carries the left column") {
  const auto q = gauss(0.8, 1.2, 0.1);
  const JostSolver s(q);
  for (cplx k : {cplx(0, 1), cplx(1, 0.5)}) {
    const cplx a = s.transmission_value(k);
    CHECK(std::abs(s.direct(SpectralPoint::from_k(k)).a - a) <= 1e-6 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("closed-form Jost matrix of the algebraic soliton solves the system") {
  // Finite-difference check of Psi' = (-i k s3 + lambda Q) Psi on the closed form.
  const cplx lam = 1.0;
  const double h = 1e-5;
  double err = 0.0, det_err = 0.0;
  for (double x = -5.0; x <= 5.0; x += 0.37) {
    const Mat2 P = algebraic_soliton_jost(x, lam);
    const Mat2 Pp = algebraic_soliton_jost(x + h, lam), Pm = algebraic_soliton_jost(x - h, lam);
    const cplx qx = algebraic_soliton(x);
    const Mat2 U{-I * lam * lam, lam * qx, -lam * std::conj(qx), I * lam * lam};
    const Mat2 rhs = U * P;
    const Mat2 lhs{(Pp.a - Pm.a) / (2 * h), (Pp.b - Pm.b) / (2 * h), (Pp.c - Pm.c) / (2 * h),
                   (Pp.d - Pm.d) / (2 * h)};
    err = std::max(err, max_abs(lhs - rhs));
    det_err = std::max(det_err, std::abs(P.det() - 1.0));
  }
  CHECK(err < 1e-6);
  CHECK(det_err < 1e-12);
}

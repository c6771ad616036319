#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "knscatter/analytic.hpp"
#include "knscatter/backlund.hpp"

using namespace kn;

namespace {

// One zero near -0.2313 + 0.2277i. L = 32 so psi has decayed at the box ends.
const GridSpec kGrid = GridSpec::make(32.0, 8192);
const cplx kOneZero(-0.2312661720, 0.2277009490);

Potential one_zero() { return sample_potential(Family{GaussianFamily{2.5, 1.0, 0.0, 0.0, -0.5}}, kGrid); }

struct Fixture {
  Potential q;
  BoundState bs;
  Potential B;
  BacklundChecks checks;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture r;
    r.q = one_zero();
    r.bs = bound_state(r.q, kOneZero);
    r.B = backlund_transform(r.q, r.bs);
    r.checks = backlund_checks(r.q, r.bs, r.B);
    return r;
  }();
  return f;
}

}  // namespace

TEST_CASE("zero potential has no bound state") {
  const auto q = sample_potential(Family{ZeroFamily{}}, kGrid);
  for (cplx z : {cplx(0, 1), cplx(-0.5, 0.5), cplx(1, 2)}) CHECK_THROWS_AS(bound_state(q, z), Error);
  try {
    bound_state(q, cplx(0, 1));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_a_zero);
  }
  CHECK(reduce_to_order_zero(q).empty());
}

TEST_CASE("bound state at the one-zero fixture") {
  const auto& f = fixture();
  const BoundState& bs = f.bs;
  CHECK(std::abs(bs.z - kOneZero) < 1e-6);
  CHECK(bs.match_residual <= 1e-6);
  CHECK(bs.abs_a <= 1e-8);
  CHECK(bs.min_abs_psi > 0.0);
  CHECK(bs.end_abs_psi <= 1e-3);

  // Norm and ODE residual by central differences, away from the ends.
  const double dx = f.q.grid.dx();
  double nrm = 0.0;
  for (const auto& p : bs.psi) nrm += (std::norm(p[0]) + std::norm(p[1])) * dx;
  CHECK(nrm == doctest::Approx(1.0).epsilon(1e-8));
  const cplx mu = std::sqrt(bs.z);
  double res = 0.0, scale = 0.0;
  for (std::size_t i = 1; i + 1 < bs.psi.size(); ++i) {
    const cplx q = f.q.samples[i];
    const auto& p = bs.psi[i];
    const cplx r0 = (bs.psi[i + 1][0] - bs.psi[i - 1][0]) / (2 * dx) - (-I * bs.z * p[0] + mu * q * p[1]);
    const cplx r1 = (bs.psi[i + 1][1] - bs.psi[i - 1][1]) / (2 * dx) - (I * bs.z * p[1] - mu * std::conj(q) * p[0]);
    res = std::max(res, std::hypot(std::abs(r0), std::abs(r1)));
    scale = std::max(scale, std::hypot(std::abs(p[0]), std::abs(p[1])));
  }
  CHECK(res <= 1e-3 * scale);
}

TEST_CASE("Backlund factors") {
  const auto& f = fixture();
  const auto fac = backlund_factors(f.bs.z, f.bs.psi);
  const cplx mu = std::sqrt(f.bs.z);
  double g = 0.0, s = 0.0, d = 0.0;
  for (std::size_t i = 0; i < fac.G.size(); ++i) {
    g = std::max(g, std::abs(std::abs(fac.G[i]) - 1.0));
    s = std::max(s, std::abs(fac.S[i]) - 4.0 * std::abs(mu.imag()));
    const double p2 = std::norm(f.bs.psi[i][0]) + std::norm(f.bs.psi[i][1]);
    d = std::max(d, std::abs(mu.real()) * p2 - std::abs(fac.d[i]));
  }
  CHECK(g <= 1e-12);
  CHECK(s <= 1e-12);
  CHECK(d <= 1e-14);
  // G tends to conj(mu)/mu on the left and mu/conj(mu) on the right.
  CHECK(std::abs(fac.G.front() - std::conj(mu) / mu) <= 1e-3);
  CHECK(std::abs(fac.G.back() - mu / std::conj(mu)) <= 1e-3);
}

TEST_CASE("Backlund identities on the one-zero fixture") {
  const auto& c = fixture().checks;
  CHECK(c.mass_residual <= 1e-4 * c.mass_before);
  CHECK(c.mass_after == doctest::Approx(c.mass_before - 4.0 * std::arg(c.z)).epsilon(1e-4));
  REQUIRE(c.k.size() == 8);
  CHECK(c.rem_zeros_residual <= 1e-4);
  CHECK(c.dG_residual <= 1e-4);
  CHECK(c.dS_residual <= 1e-4);
  CHECK(c.identity_G2 <= 1e-8);
  CHECK(c.identity_GS <= 1e-8);
  CHECK(c.local_mass <= 1e-4);
  CHECK(c.unimodular <= 1e-12);
  CHECK(c.S_excess == 0.0);
  CHECK(c.d_lower_violation == 0.0);
  CHECK(c.G_left <= 1e-3);
  CHECK(c.G_right <= 1e-3);
  CHECK(c.normalization <= 1e-10);
  CHECK(c.passed);
}

TEST_CASE("RemZeros against a direct evaluation") {
  const auto& f = fixture();
  const Transmission aq(f.q), aB(f.B);
  for (cplx k : {cplx(0, 1), cplx(1, 0.5), cplx(-2, 0.3)}) {
    const cplx want = blaschke_removal(f.bs.z, k) * aq(k);
    CHECK(std::abs(aB(k) - want) <= 1e-4 * (1.0 + std::abs(want)));
  }
  // The transformed potential has lost its zero.
  CHECK(order(aB).order == 0);
}

TEST_CASE("tail surgery") {
  const auto& f = fixture();
  const double za = std::abs(f.bs.z);
  SUBCASE("N below |z| is vacuous") {
    const auto r = tail_surgery_check(f.q, f.B, f.bs.z, 0.25);
    CHECK(r.vacuous);
  }
  SUBCASE("N = 64 |z|") {
    const double N = std::exp2(std::ceil(std::log2(64.0 * za)));
    const auto r = tail_surgery_check(f.q, f.B, f.bs.z, N);
    CHECK_FALSE(r.vacuous);
    CHECK(r.holds);
    CHECK(surgery_ratio(f.q, f.B, f.bs.z, N) <= kSurgeryConstant);
  }
  SUBCASE("high N: both differences go to zero") {
    double prev = INFINITY;
    for (double N : {16.0, 32.0, 64.0}) {
      const auto r = tail_surgery_check(f.q, f.B, f.bs.z, N);
      const double m = std::max(r.lhs1, r.lhs2);
      CHECK(m <= r.bound);
      CHECK(r.bound < prev);
      prev = r.bound;
    }
    const auto r = tail_surgery_check(f.q, f.B, f.bs.z, 64.0);
    CHECK(std::max(r.lhs1, r.lhs2) <= 1e-8);
  }
}

TEST_CASE("reduction chains") {
  SUBCASE("order zero: empty chain") {
    const auto q = sample_potential(Family{GaussianFamily{1.0, 1.0}}, GridSpec::make(16.0, 4096));
    CHECK(reduce_to_order_zero(q).empty());
  }
  SUBCASE("one zero") {
    const auto q = sample_potential(Family{GaussianFamily{2.5, 1.0, 0.0, 0.0, -0.5}}, GridSpec::make(16.0, 4096));
    const auto chain = reduce_to_order_zero(q);
    REQUIRE(chain.size() == 1);
    CHECK(chain[0].order_before == 1);
    CHECK(chain[0].order_after == 0);
    CHECK(chain[0].mass_after == doctest::Approx(q.mass() - 4.0 * std::arg(chain[0].z)).epsilon(1e-4));
    const Transmission a(chain.back().potential);
    CHECK(lower_bound_and_zero_free_checks(a, 0, 0.25, 4.0, {}).holds);
  }
  SUBCASE("two zeros") {
    const auto q = sample_potential(Family{GaussianFamily{3.0, 1.0, 0.0, 0.0, -0.75}}, GridSpec::make(16.0, 4096));
    const auto chain = reduce_to_order_zero(q);
    REQUIRE(chain.size() == 2);
    double m = q.mass();
    for (const auto& st : chain) {
      CHECK(st.mass_before == doctest::Approx(m).epsilon(1e-12));
      CHECK(st.mass_after < st.mass_before);
      CHECK(st.mass_after == doctest::Approx(st.mass_before - 4.0 * std::arg(st.z)).epsilon(1e-4));
      CHECK(st.order_after == st.order_before - 1);
      CHECK(st.rem_zeros_residual <= 1e-4);
      m = st.mass_after;
    }
    CHECK(chain.back().order_after == 0);
  }
}

#pragma once

#include <array>
#include <vector>

#include "knscatter/analytic.hpp"
#include "knscatter/core.hpp"
#include "knscatter/grid.hpp"

namespace kn {

// Decaying solution of psi' = -i sigma3 z psi + sqrt(z) [[0, q], [-conj q, 0]] psi.
struct BoundState {
  cplx z;
  std::vector<std::array<cplx, 2>> psi;  // on q's grid, ||psi||_{L^2} = 1
  std::vector<std::array<cplx, 2>> dir;  // psi / |psi| pointwise, immune to underflow
  double match_residual = 0.0;  // |sin| of the angle between left and right shots at the match
  std::size_t match_index = 0;
  double abs_a = 0.0;           // |a(z)| after refinement (ode route)
  double abs_a_det = -1.0;      // |det_a(z)| cross-check, < 0 when not computed
  double newton_step = 0.0;
  double min_abs_psi = 0.0;
  double end_abs_psi = 0.0;     // max(|psi(-L)|, |psi(x_{n-1})|)
};

struct BoundStateOptions {
  double newton_tol = 1e-12;
  double match_tol = 1e-6;
  double min_arg = 1e-4;        // refuse zeros closer than this to the real axis (radians)
  bool det_cross_check = true;  // one det_a evaluation at the refined zero
  double abs_a_floor = 1e-8;    // |a(z)| the refined zero must reach
  double det_tol = 1e-4;        // required |det_a(z)|
};

// Newton refinement of z_guess followed by two-sided renormalized shooting.
// Throws not_a_zero or match_failure.
BoundState bound_state(const Transmission& a, cplx z_guess, const BoundStateOptions& opts = {});
BoundState bound_state(const Potential& q, cplx z_guess, const BoundStateOptions& opts = {});
// Shooting only, at a given z (no refinement).
BoundState shoot(const Potential& q, cplx z, double match_tol = 1e-6);

struct BacklundFactors {
  std::vector<cplx> d, G, S;
};

// psi may carry any pointwise nonzero scale; the factors are homogeneous of degree 0.
BacklundFactors backlund_factors(cplx z, const std::vector<std::array<cplx, 2>>& psi);
// G^2 q + G S.
Potential backlund_transform(const Potential& q, const BoundState& bs);
Potential backlund_transform(const Potential& q, cplx z, const BacklundFactors& f);

// The eight test points of the RemZeros identity for a zero z.
std::vector<cplx> rem_zeros_points(cplx z);
// (z / conj z) (k - conj z) / (k - z)
cplx blaschke_removal(cplx z, cplx k);

struct BacklundChecks {
  cplx z;
  double mass_before = 0.0, mass_after = 0.0;
  double mass_residual = 0.0;      // | ||B||^2 - ||q||^2 + 4 arg z |
  double mass_tol = 0.0;           // 1e-4 M
  std::vector<cplx> k;
  std::vector<cplx> a_q, a_B;
  double rem_zeros_residual = 0.0; // max |a_B - factor a_q| / (1 + |a_B|)
  double dG_residual = 0.0;        // L^2 norm of G' - (S^ B + S q^)/(2i)
  double dS_residual = 0.0;        // L^2 norm of S' - (2|z|/i)(B - q)
  double identity_G2 = 0.0;        // sup |G^2 - 1 + (2i Im z / d^2)(|psi1|^4 - |psi2|^4)|
  double identity_GS = 0.0;        // sup ||mu|^2 (G + G^) - |S|^2/4 - 2 Re mu^2|
  double local_mass = 0.0;         // L^1 norm of |q|^2 - |B|^2 + 2i G^ G'
  double unimodular = 0.0;         // sup ||G| - 1|
  double S_excess = 0.0;           // max(0, sup |S| - 4 |Im sqrt z|)
  double d_lower_violation = 0.0;  // max(0, sup |Re sqrt z| |psi|^2 - |d|)
  double G_left = 0.0, G_right = 0.0;  // |G(-L) - conj mu/mu|, |G(L) - mu/conj mu|
  double normalization = 0.0;      // sup |B(psi) - B((2+i) psi)|
  bool passed = false;
};

struct BacklundTolerances {
  double mass_rel = 1e-4;
  double rem_zeros = 1e-4;
  double dGS = 1e-4;
  double identities = 1e-8;
  double local_mass = 1e-4;
  double asymptotics = 1e-3;
  double normalization = 1e-10;
};

BacklundChecks backlund_checks(const Potential& q, const BoundState& bs, const Potential& B,
                               const BacklundTolerances& tol = {});

struct SurgeryReport {
  double N = 0.0;
  double z_abs = 0.0;
  double q_norm = 0.0;
  double lhs1 = 0.0;     // ||P_{>N} B|| - ||P_{>N/8} q||
  double lhs2 = 0.0;     // ||P_{>N} q|| - ||P_{>N/8} B||
  double bound = 0.0;    // C sqrt(|z|/N) ||q|| (sqrt(|z|/N) + ||q||)
  double constant = 0.0;
  bool vacuous = false;  // N <= |z|, or the right side exceeds the norms involved
  bool holds = false;
};

// Constant of the surgery bound: the largest ratio seen on the reference
// one-zero gaussian (A = 2, twist -0.5) over all dyadic N was 0.19.
inline constexpr double kSurgeryConstant = 0.25;

SurgeryReport tail_surgery_check(const Potential& q, const Potential& B, cplx z, double N,
                                 double constant = kSurgeryConstant);
// Smallest constant for which both surgery inequalities hold at N.
double surgery_ratio(const Potential& q, const Potential& B, cplx z, double N);

struct ChainStep {
  cplx z;
  double arg_z = 0.0;
  double mass_before = 0.0, mass_after = 0.0;
  int order_before = 0, order_after = 0;
  double rem_zeros_residual = 0.0;
  double match_residual = 0.0;
  Potential potential;  // after the step
  BoundState bound;
};

struct ReductionOptions {
  double locate_tol = 1e-3;
  double rem_zeros_tol = 1e-4;
  BoundStateOptions bound;
};

// Strips zeros of a in the sector pi/4 < arg k < pi one at a time until the
// order is 0. Throws chain_broken when the order does not drop by one, or when
// the chain exceeds floor(M/pi) + 1 steps.
std::vector<ChainStep> reduce_to_order_zero(const Potential& q, const ReductionOptions& opts = {});

}  // namespace kn

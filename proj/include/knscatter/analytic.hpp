#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "knscatter/core.hpp"
#include "knscatter/fredholm.hpp"
#include "knscatter/grid.hpp"
#include "knscatter/jost.hpp"

namespace kn {

// a(k; q) on the closed upper half-plane with memoized samples. The ode route
// works everywhere; the det route falls back to the ode one on near-real
// points, where the resolvents degenerate.
class Transmission {
 public:
  enum class Route { ode, det };

  explicit Transmission(const Potential& q, Route route = Route::ode, JostOptions jo = {},
                        FredholmOptions fo = {});

  cplx operator()(cplx k) const;
  // a'(k) from a Cauchy integral on a circle of the given radius (0: automatic).
  cplx derivative(cplx k, double radius = 0.0) const;

  const Potential& potential() const { return q_; }
  Route route() const { return route_; }
  double mass() const { return mass_; }          // total mass, tails included
  double sup_norm() const { return sup_; }
  std::size_t evaluations() const;
  // Points with arg k < pi * near_real_fraction or above pi(1 - ...) use the ode route.
  double near_real_fraction = 0.02;

 private:
  Potential q_;
  Route route_;
  FredholmOptions fo_;
  std::shared_ptr<JostSolver> solver_;
  double mass_ = 0.0;
  double sup_ = 0.0;
  mutable std::mutex mu_;
  mutable std::map<std::pair<double, double>, cplx> cache_;
};

// Cauchy-circle radius used for a' at k when none is given.
double cauchy_radius(cplx k);

struct Region {
  enum class Kind { sector, rectangle } kind = Kind::sector;
  // sector: theta_min < arg k < theta_max, r_min < |k| < r_max
  double theta_min = 0.0, theta_max = 0.0, r_min = 0.0, r_max = 0.0;
  // rectangle: lo.real < Re k < hi.real, lo.imag < Im k < hi.imag
  cplx lo, hi;

  static Region sector(double theta_min, double theta_max, double r_min, double r_max);
  static Region rectangle(cplx lo, cplx hi);
  bool contains(cplx k) const;
  cplx center() const;
  double diameter() const;
  std::vector<Region> split() const;  // quadrants, or two radial halves of a long sector
};

struct ContourOptions {
  int min_segments_per_edge = 12;
  double max_arg_step = 0.4;      // radians of arg a per accepted segment
  double max_depth = 18;
  double zero_floor = 1e-8;       // |a| below this on the contour: zero on contour
  double integrality_tol = 0.1;
};

struct ContourCount {
  int count = 0;
  double unrounded = 0.0;    // (1/2 pi i) of the a'/a quadrature
  double arg_winding = 0.0;  // net continuous change of arg a over 2 pi
  double min_abs_a = 0.0;
  std::size_t segments = 0;
};

ContourCount count_zeros(const Transmission& a, const Region& region, const ContourOptions& opts = {});

struct Zero {
  cplx z;
  int multiplicity = 1;
  double newton_residual = 0.0;  // size of the last Newton step
  double abs_a = 0.0;
  bool cluster_unresolved = false;
};

struct ZeroSet {
  std::vector<Zero> zeros;
  Region region;
  int total_count = 0;
};

ZeroSet locate_zeros(const Transmission& a, const Region& region, double tol = 1e-3,
                     const ContourOptions& opts = {});

// Newton iteration on a with the Cauchy derivative. Throws not_a_zero, also
// as soon as an iterate leaves the disc of radius trust around the guess.
Zero refine_zero(const Transmission& a, cplx guess, double step_tol = 1e-12, int max_iter = 40,
                 double trust = INFINITY);

// Zeros z with arg z >= theta obey Im sqrt(z) <= ||q||_inf / 2, hence
// |z| <= (||q||_inf / (2 sin(theta/2)))^2.
double zero_radius_bound(double sup_norm, double theta);

// The sector {pi/4 < arg k < pi} truncated to the given radii.
Region sigma_region(double r_min, double r_max);

struct RadialRange {
  double r_min = 0.0;  // 1e-3 times the spectral floor
  double r_max = 0.0;  // 1e3 times the spectral ceiling
};
RadialRange ray_range(const Potential& q);

struct MassIdentityReport {
  double theta = 0.0;
  double mass = 0.0;
  int ell = 0;                 // zeros with theta < arg k < pi
  double zero_term = 0.0;      // 4 pi ell
  double ray_integral = 0.0;   // -(2/i) int a'/a dk along the ray
  double low_correction = 0.0;   // part of the ray integral below r_min
  double high_correction = 0.0;  // part beyond r_max, from the limit e^{-iM/2}
  double r_min = 0.0, r_max = 0.0;
  double min_abs_a = 0.0;
  double residual = 0.0;       // |mass - zero_term - ray_integral|
  std::vector<std::pair<double, cplx>> profile;  // (|k|, a) along the ray
};

MassIdentityReport mass_identity_check(const Transmission& a, double theta = pi / 2,
                                       const ContourOptions& opts = {});

// Samples of log|a(s)| on the real line with quadrature weights for ds / s.
struct BoundaryMeasure {
  std::vector<double> s;
  std::vector<double> w;        // weights for int f(s) ds / |s|
  std::vector<double> log_abs;  // log|a(s)|
  std::vector<double> arg;      // arg a(s)
  double integral = 0.0;        // int -(1/s) log|a(s)| ds
  double coarse_integral = 0.0; // same at half resolution
  double min_abs_a = 0.0;
};
BoundaryMeasure boundary_measure(const Transmission& a, double s_max = 0.0);

struct TraceReport {
  double mass = 0.0;
  double zero_sum = 0.0;      // 4 sum arg z_j
  double winding_term = 0.0;  // (2/pi) int dmu
  double residual = 0.0;
  bool sigma_flag = false;
  bool quadrature_converged = true;
  // For algebraically decaying data cut at +-L, a zero closer to the real axis
  // than 1/L cannot be told apart from a spectral singularity; it raises sigma_flag.
  bool near_real_zero = false;
  bool count_failed = false;  // argument principle broke down, forces sigma_flag
  double arg_floor = 0.0;     // zeros below this argument are not searched
  ZeroSet zeros;
  BoundaryMeasure measure;
};

TraceReport trace_formula_check(const Transmission& a, double arg_floor = 0.05,
                                double rel_tol = 1e-2);

struct ReconstructionReport {
  std::vector<cplx> k;
  std::vector<cplx> det;           // reference values
  std::vector<cplx> reconstructed; // Blaschke product times outer factor
  std::vector<cplx> outer_only;
  double max_error = 0.0;          // max |reconstructed - det| / (1 + |det|)
  double max_error_outer_only = 0.0;
};

// Evaluates prod_j (conj(z_j)/z_j)(k - z_j)/(k - conj(z_j)) exp[(1/(i pi)) int k/(k-s) dmu(s)].
cplx blaschke_product(const std::vector<Zero>& zeros, cplx k);
cplx outer_factor(const BoundaryMeasure& mu, cplx k);
ReconstructionReport blaschke_outer_reconstruct(const Potential& q, const TraceReport& trace,
                                                const std::vector<cplx>& k_eval);

struct LowerBoundReport {
  int order = 0;
  double min_abs_a = 0.0;   // over the ray i kappa
  double kappa_at_min = 0.0;
  double bound = 0.0;       // exp(-M/sqrt 2 - M/2)
  bool holds = false;
  // zero-free region dichotomy
  double eps = 0.0, N = 0.0, arg_constant = 0.0;
  std::vector<Zero> violations;
};

// Minimum of |a(i kappa)| over a log grid between the ray range endpoints.
std::pair<double, double> ray_minimum(const Transmission& a, int samples_per_decade = 24);

LowerBoundReport lower_bound_and_zero_free_checks(const Transmission& a, int order, double eps,
                                                  double N, const std::vector<Zero>& zeros,
                                                  double arg_constant = 10.0);

struct OrderReport {
  int order = 0;
  int mass_budget = 0;  // floor(M / pi)
  Region region;
  ContourCount count;
};
// Zeros in the sector {pi/4 < arg k < pi} truncated radially; throws
// non_convergence when the count exceeds the mass budget.
OrderReport order(const Transmission& a, const ContourOptions& opts = {});

// Asymptotics of a(i kappa) under frequency separation.
struct WindingReport {
  double eps = 0.0, N = 0.0, mass = 0.0;
  double high_tail = 0.0;   // ||q_{>N}||^2 / M
  double low_tail = 0.0;    // ||q_{<=N}||^2 / M
  bool hf_holds = false;    // high_tail <= eps^2: part (i) applies
  bool lf_holds = false;    // low_tail <= eps^2: part (ii) applies
  std::optional<double> part_i;   // max |a(i kappa) - e^{-iM/2}|, kappa >= N/eps^2
  std::optional<double> part_ii;  // max |a(i kappa) - 1|, kappa <= eps^2 N
  GapResult gap;            // annulus around N itself
  bool gap_holds = false;
  double factorization = 0.0;  // max |a - a_low a_high| over kappa in [N/100, 100 N]
  double comparison = 0.0;  // eps^2 times the calibration constant
};

WindingReport winding_asymptotics_check(const Potential& q, double eps, double N,
                                        Transmission::Route route = Transmission::Route::ode,
                                        double calibration = 1.0);

// max over the kappa grid of |a(q) - a(q_{<=N}) a(q_{>N})|.
double factorization_residual(const Potential& q, double N, double kappa_lo, double kappa_hi,
                              int samples = 25,
                              Transmission::Route route = Transmission::Route::ode);

}  // namespace kn

#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "knscatter/core.hpp"
#include "knscatter/grid.hpp"
#include "knscatter/sampler.hpp"

namespace kn {

// k = lambda^2; lambda is the principal square root (first quadrant for Im k >= 0).
struct SpectralPoint {
  cplx k;
  cplx lambda;
  static SpectralPoint from_k(cplx k);
  static SpectralPoint from_lambda(cplx lambda);
};

enum class JostMethod { gauged, direct, wronskian, det };
const char* method_name(JostMethod m);

// Plain 2x2 complex matrix, row major: [[a, b], [c, d]].
struct Mat2 {
  cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};
  static Mat2 identity() { return {}; }
  cplx det() const { return a * d - b * c; }
};
Mat2 operator*(const Mat2& x, const Mat2& y);
Mat2 operator-(const Mat2& x, const Mat2& y);
double max_abs(const Mat2& m);
// exp of a 2x2 matrix via its two eigenvalues; stable when one mode decays fast.
Mat2 expm(const Mat2& m);

struct JostProfile {
  std::vector<double> x;
  std::vector<Mat2> psi;  // Psi^-(x)
};

struct JostData {
  SpectralPoint point{};
  cplx a{1.0};
  std::optional<cplx> b;
  std::optional<Mat2> S;  // lim e^{i k x sigma3} Psi^-
  std::optional<JostProfile> psi_minus;
  JostMethod method = JostMethod::gauged;
  double err_est = 0.0;
};

struct JostOptions {
  // Magnus steps satisfy h * rate <= step_scale, rate = the local frequency scale.
  double step_scale = 0.4;
  // Re-run with halved steps and report the difference as err_est.
  bool estimate_error = true;
};

// Decaying column sampled on grid points j_first .. j_first + dir.size() - 1.
// Value at a point is exp(log_scale) * dir.
struct ColumnProfile {
  std::size_t j_first = 0;
  std::vector<std::array<cplx, 2>> dir;
  std::vector<double> log_scale;
};

// Precomputed coefficient fields of one potential; all Jost routes share it.
class JostSolver {
 public:
  explicit JostSolver(const Potential& q, JostOptions opts = {});

  const Potential& potential() const { return q_; }
  const JostOptions& options() const { return opts_; }
  // Mass entering the gauge phase: interior integral, plus the analytic tail
  // for algebraic data.
  double gauge_mass() const { return gauge_mass_; }
  std::size_t support_first() const { return j0_; }
  std::size_t support_last() const { return j1_; }

  // Gauged Volterra route; valid for Im k >= 0.
  JostData transmission(cplx k) const;
  cplx transmission_value(cplx k, int refine = 1) const;

  // Left decaying column carried to the right end: a = v_1(+inf).
  JostData direct(const SpectralPoint& p) const;
  // det[Psi_1^-, Psi_2^+] at the grid point nearest x_match.
  JostData wronskian(const SpectralPoint& p, double x_match) const;
  // Full 2x2 Jost solution for real k (lambda real or purely imaginary).
  JostData jost_matrix(const SpectralPoint& p, bool keep_profile) const;

  // Renormalized decaying columns for the eigenvalue problem at p:
  // Psi_1^- = e^{-ikx} v from the left end up to grid point j_stop, and
  // Psi_2^+ = e^{ikx} u from the right end down to j_stop.
  ColumnProfile left_column(const SpectralPoint& p, std::size_t j_stop, int refine = 1) const;
  ColumnProfile right_column(const SpectralPoint& p, std::size_t j_stop, int refine = 1) const;

  int substeps(double rate, int refine) const;

 private:
  struct NodeWeights {
    int m = 1;
    std::vector<std::array<double, LocalInterpolator::kStencil>> w;  // per node (2 per substep)
  };
  std::shared_ptr<const NodeWeights> weights(int m) const;
  cplx node_value(const LocalInterpolator& f, std::size_t cell, int node, const NodeWeights& nw) const;

  Potential q_;
  JostOptions opts_;
  LocalInterpolator qi_;
  LocalInterpolator qti_;  // q e^{i m}
  LocalInterpolator rti_;  // r e^{-i m}
  double qmax_ = 0.0;
  double rmax_ = 0.0;
  double gauge_mass_ = 0.0;
  std::size_t j0_ = 0;
  std::size_t j1_ = 0;
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<const NodeWeights>> weights_;
};

JostData transmission_a_ode(const Potential& q, cplx k, const JostOptions& opts = {});
JostData wronskian_a(const Potential& q, const SpectralPoint& p, double x_match,
                     const JostOptions& opts = {});
JostData jost_matrix(const Potential& q, const SpectralPoint& p, bool keep_profile,
                     const JostOptions& opts = {});

// Closed-form Jost solution of the unit algebraic soliton at spectral parameter lambda.
Mat2 algebraic_soliton_jost(double x, cplx lambda);

struct IdentityEntry {
  cplx lambda;
  double sym_sigma3 = 0.0;   // max_x |Psi(l) - s3 Psi(-l) s3|
  double sym_conj = 0.0;     // max_x |Psi(l) - s1 s3 conj(Psi(conj l)) s3 s1|
  double det_dev = 0.0;      // max_x |det Psi - 1|
  double unitarity = 0.0;    // | |a|^2 +- |b|^2 - 1 |
  double real_line = 0.0;    // violation of |a| <= 1 (k > 0) or |a| >= 1 (k < 0)
  cplx a, b;
};

struct IdentityReport {
  std::vector<IdentityEntry> entries;
  double near_zero = 0.0;  // max |a(k) - 1| over |k| = 1e-4 on the real line
  double worst_symmetry() const;
  double worst_det() const;
  double worst_unitarity() const;
  double worst_real_line() const;
};

IdentityReport scattering_identities_report(const Potential& q, const std::vector<cplx>& lambdas,
                                            const JostOptions& opts = {});

}  // namespace kn

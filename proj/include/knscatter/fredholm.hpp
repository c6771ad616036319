#pragma once

#include <Eigen/Dense>
#include <vector>

#include "knscatter/core.hpp"
#include "knscatter/grid.hpp"

namespace kn {

struct FredholmOptions {
  double xi_cutoff = 0.0;        // 0 selects the cutoff from rel_tol
  double rel_tol = 1e-4;         // target for the uncorrected truncation error
  std::size_t max_size = 2048;   // cap on retained frequencies
  double periodization = 11.0;   // box half-length >= periodization / Im k
  bool with_hs = true;           // compute the Hilbert-Schmidt diagnostics
};

// Potential zero-padded onto a box long enough that wrap-around couplings
// e^{-2 Im k L_box} are negligible, with its transform on the box bins.
struct BoxSpectrum {
  GridSpec box;
  std::vector<cplx> qhat;      // indexed by signed bin + offset
  long bin_lo = 0, bin_hi = 0; // significant spectral support, signed bins
  long offset = 0;             // storage index of signed bin 0
  double dxi() const { return box.dxi(); }
  cplx at(long bin) const;     // zero outside the stored range
};
BoxSpectrum box_spectrum(const Potential& q, double min_half_length);

// Finite section of K = k (-ik - d)^{-1} q (-ik + d)^{-1} conj(q) on the
// frequency bins |xi| <= xi_cutoff; a(k) = det(1 - K) on the line.
struct Discretization {
  cplx k;
  double dxi = 0.0;
  double xi_cutoff = 0.0;
  std::vector<double> xi;
  Eigen::MatrixXcd K;
  bool cutoff_too_small = false;  // spectral mass of q beyond the cutoff above 1e-10 M
};
Discretization assemble(const BoxSpectrum& s, cplx k, double xi_cutoff);
Discretization assemble(const Potential& q, cplx k, double xi_cutoff,
                        const FredholmOptions& opts = {});

// Sum of singular values of the finite section.
double nuclear_norm(const Discretization& d);

// Exact line trace int i k/(2k + xi) fhat conj(hhat) d xi by quadrature.
cplx trace_quadrature(const BoxSpectrum& f, const BoxSpectrum& h, cplx k);

struct FredholmReport {
  cplx k;
  cplx det;               // trace-corrected, extrapolated in the cutoff
  double err_est = 0.0;
  double xi_cutoff = 0.0;
  std::size_t size = 0;
  bool cutoff_too_small = false;
  cplx det_raw;           // det(1 - K) of the finite section alone
  cplx trace_exact;
  cplx trace_matrix;
  double hs_norm = 0.0;       // ||Lambda||_HS
  double paper_bound = 0.0;   // the log-weighted spectral integral it is compared to
};

FredholmReport det_a(const Potential& q, cplx k, const FredholmOptions& opts = {});

struct TracePairing {
  cplx quadrature;       // continuous pairing
  cplx matrix;           // trace of the assembled finite section
  cplx lattice_tail;     // closed-form diagonal sum over the bins beyond the cutoff
  cplx matrix_total() const { return matrix + lattice_tail; }
};
TracePairing trace_pairing(const Potential& f, const Potential& h, cplx k, double xi_cutoff);

struct HsReport {
  double hs_norm_sq = 0.0;
  double bound_integral = 0.0;
  double ratio() const { return bound_integral > 0 ? hs_norm_sq / bound_integral : 0.0; }
};
HsReport hs_report(const BoxSpectrum& s, cplx k);

// ||Lambda||_HS^2 / bound_integral on the reference gaussian (A = 1, w = 1, k = i).
inline constexpr double kHsCalibration = 0.6901177755;
// Allowed relative excess of hs_norm^2 over kHsCalibration * bound_integral.
inline constexpr double kHsTolerance = 0.1;

// Norms of Lambda(k; P_N q) for each dyadic N: the Hilbert-Schmidt norm by
// quadrature and the operator norm of the finite section by power iteration.
struct BandNorm {
  double N = 0.0;
  double hs_norm = 0.0;
  double op_norm = 0.0;
};
std::vector<BandNorm> localized_norms(const BoxSpectrum& s, cplx k, double xi_cutoff,
                                      const std::vector<double>& Ns);

}  // namespace kn

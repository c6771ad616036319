#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "knscatter/core.hpp"

namespace kn {

// Uniform periodic grid x_j = -L + j*dx on [-L, L), dx = 2L/n.
struct GridSpec {
  double L = 0.0;
  std::size_t n = 0;

  static GridSpec make(double L, std::size_t n);

  double dx() const { return 2.0 * L / static_cast<double>(n); }
  double dxi() const { return pi / L; }
  double nyquist() const { return pi / dx(); }
  double x(std::size_t j) const { return -L + static_cast<double>(j) * dx(); }
  // Frequency of DFT bin m (FFT ordering; the Nyquist bin counts as negative).
  double xi(std::size_t m) const;
  // Signed bin index of DFT bin m.
  long signed_bin(std::size_t m) const;

  bool operator==(const GridSpec&) const = default;
};

// schwartz: rapid decay; algebraic: 1/x tails of the (rescaled) algebraic
// soliton, which the functionals complete analytically beyond |x| = L;
// bandlimited: periodic trigonometric data.
enum class DecayTag { schwartz, algebraic, bandlimited };

const char* decay_name(DecayTag t);
DecayTag decay_from_name(const std::string& s);

struct Potential {
  GridSpec grid;
  std::vector<cplx> samples;
  DecayTag decay = DecayTag::schwartz;
  // For algebraic data: q = sqrt(h) q_a(h x); h enters the tail corrections.
  double tail_scale = 1.0;

  double mass() const;  // sum |q_j|^2 dx, no tail correction
  double sup_norm() const;
};

Potential operator+(const Potential& a, const Potential& b);
Potential operator*(cplx c, const Potential& q);

// ---- families ---------------------------------------------------------------

struct Family;

struct ZeroFamily {};
struct GaussianFamily {
  double amplitude = 1.0;
  double width = 1.0;
  double center = 0.0;
  double chirp = 0.0;  // phase chirp * (x - center)^2
  double twist = 0.0;  // phase twist * int_{-inf}^x |q|^2, the soliton-like phase
};
struct AlgebraicSolitonFamily {};
struct RandomBandlimitedFamily {
  std::uint64_t seed = 0;
  double band = 1.0;
  double amplitude = 1.0;  // sup of |q| after scaling
};
struct ModulatedFamily {
  std::shared_ptr<const Family> base;
  double carrier = 0.0;
};

struct Family {
  std::variant<ZeroFamily, GaussianFamily, AlgebraicSolitonFamily, RandomBandlimitedFamily,
               ModulatedFamily>
      v;
};

Family modulated(Family base, double carrier);

// Exact value of the unit algebraic soliton 2(1-ix)/(1+ix)^2 e^{ix/2}.
cplx algebraic_soliton(double x);

Potential sample_potential(const Family& f, const GridSpec& g);

// ---- spectral helpers -------------------------------------------------------

// Samples of qhat(xi) = (2 pi)^{-1/2} int e^{-i x xi} q(x) dx on the DFT bins.
std::vector<cplx> fourier(const Potential& q);
std::vector<cplx> inverse_fourier(const GridSpec& g, std::vector<cplx> spec);

// d/dx of q. Spectral for periodic/decaying data, eighth-order finite
// differences for algebraic data (the periodic extension has a jump).
std::vector<cplx> derivative(const Potential& q);
// Spectral derivative of a field that tends to different constants at the two
// ends; a smooth step carries the jump so the remainder is periodic.
std::vector<cplx> derivative_nonperiodic(const GridSpec& g, const std::vector<cplx>& f);
std::vector<cplx> spectral_derivative(const GridSpec& g, std::vector<cplx> f);
std::vector<cplx> fd_derivative(const GridSpec& g, const std::vector<cplx>& f);

double l2_norm_sq(const GridSpec& g, const std::vector<cplx>& f);

// ---- mass and conserved functionals -----------------------------------------

struct MassReport {
  double interior = 0.0;        // sum |q_j|^2 dx
  double tail = 0.0;            // analytic completion beyond |x| = L (algebraic only)
  double total = 0.0;
  double parseval_residual = 0.0;  // |sum |q|^2 dx - sum |qhat|^2 dxi|
};
MassReport mass_report(const Potential& q);

struct Conserved {
  double M = 0.0;
  double H1 = 0.0;
  double H2 = 0.0;
};
Conserved conserved(const Potential& q);

// ---- Littlewood-Paley -------------------------------------------------------

// Smooth cutoff: 1 on |xi| <= 1, 0 on |xi| >= 2, monotone in between.
double lp_cutoff(double xi);

struct Band {
  enum class Kind { at_most, above, piece, annulus } kind = Kind::at_most;
  double lo = 0.0;  // N, or the lower dyadic edge for an annulus
  double hi = 0.0;  // upper dyadic edge for an annulus

  static Band at_most(double N) { return {Kind::at_most, N, N}; }
  static Band above(double N) { return {Kind::above, N, N}; }
  static Band piece(double N) { return {Kind::piece, N, N}; }
  // Frequencies lo < |xi| <= hi in the dyadic sense: P_{<=hi} - P_{<=lo}.
  static Band annulus(double lo, double hi) { return {Kind::annulus, lo, hi}; }
};

bool is_dyadic(double N);
double lp_multiplier(const Band& b, double xi);
// Throws unresolved_frequency when the multiplier's support passes Nyquist.
Potential littlewood_paley(const Potential& q, const Band& b);
double band_norm_sq(const Potential& q, const Band& b);

struct TailEntry {
  double N = 0.0;
  double high_fraction = 0.0;  // ||P_{>N} q||^2 / ||q||^2
};
std::vector<TailEntry> tail_profile(const Potential& q);

// Smallest dyadic N with ||P_{>N} q|| <= eps ||q||.
double equicontinuity_threshold(const Potential& q, double eps);
// Smallest dyadic N with ||P_{>N} q||^2 <= rel ||q||^2.
double spectral_ceiling(const Potential& q, double rel = 1e-10);
// Largest dyadic N with ||P_{<=N} q||^2 <= rel ||q||^2, or the smallest
// resolvable dyadic frequency when none qualifies.
double spectral_floor(const Potential& q, double rel = 1e-2);

struct GapResult {
  double N0 = 0.0;
  double N1 = 0.0;
  double annulus_norm = 0.0;  // ||P_{eps^3 N1 < . <= N1/eps^3} q||
  double threshold = 0.0;     // eps ||q||
  double search_hi = 0.0;     // largest candidate tried
};
// First dyadic N1 >= N0/eps^4 whose annulus carries at most eps ||q||; the
// search window is capped at Nyquist. Throws no_gap_found.
GapResult find_spectral_gap(const Potential& q, double eps, double N0);

// sqrt(h) q(h x) on the grid scaled by 1/h (exact, no interpolation).
Potential rescale(const Potential& q, double h);
// Trigonometric interpolation of q onto another grid. Throws
// unresolved_frequency if more than 1e-10 of the mass is lost.
Potential resample(const Potential& q, const GridSpec& target);

}  // namespace kn

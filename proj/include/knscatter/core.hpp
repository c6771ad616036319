#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kn {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

enum class Errc {
  usage,
  precondition,
  unresolved_frequency,
  no_gap_found,
  non_convergence,
  count_not_integral,
  not_a_zero,
  match_failure,
  non_isolated_zero,
  chain_broken,
  blowup,
  boundary_contamination,
  unresolved_tails,
  zero_on_contour,
  io
};

// Every library failure is an Error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::usage: return "usage";
    case Errc::precondition: return "precondition";
    case Errc::unresolved_frequency: return "unresolved-frequency";
    case Errc::no_gap_found: return "no-gap-found";
    case Errc::non_convergence: return "non-convergence";
    case Errc::count_not_integral: return "count-not-integral";
    case Errc::not_a_zero: return "not-a-zero";
    case Errc::match_failure: return "match-failure";
    case Errc::non_isolated_zero: return "non-isolated-zero";
    case Errc::chain_broken: return "chain-broken";
    case Errc::blowup: return "blowup";
    case Errc::boundary_contamination: return "boundary-contamination";
    case Errc::unresolved_tails: return "unresolved-tails";
    case Errc::zero_on_contour: return "zero-on-contour";
    case Errc::io: return "io";
  }
  return "unknown";
}

inline constexpr const char* kVersion = "1.0.0";

}  // namespace kn

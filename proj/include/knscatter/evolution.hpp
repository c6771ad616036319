#pragma once

#include <vector>

#include "knscatter/core.hpp"
#include "knscatter/grid.hpp"

namespace kn {

struct EvolutionOptions {
  double dt = 0.0;                 // 0: min(1e-3, 0.25 / (||q||_inf^2 xi_cut))
  double dealias = 2.0 / 3.0;      // fraction of Nyquist kept in the nonlinear term
  double blowup_factor = 2.0;      // guard: ||q||_inf above this times its initial value
  double boundary_fraction = 0.05; // outer part of [-L, L) watched for contamination
  double boundary_tol = 1e-6;      // allowed growth of the mass there, relative to M
  int drift_every = 10;            // steps between drift samples
  std::vector<double> snapshot_times;
};

struct Drift {
  double dM = 0.0, dH1 = 0.0, dH2 = 0.0;  // relative to the initial values
};

struct DriftSample {
  double t = 0.0;
  Drift drift;
};

struct Snapshot {
  double t = 0.0;
  Potential q;
};

struct EvolutionState {
  double t = 0.0;
  Potential q;
  Drift drift;
  std::size_t steps = 0;
  double dt = 0.0;
  std::vector<DriftSample> history;
  std::vector<Snapshot> snapshots;
};

// Integrating-factor RK4 for i q_t + q'' + i(|q|^2 q)' = 0 on the periodic grid
// of q0. Negative T runs backwards. Throws precondition, blowup or
// boundary_contamination.
EvolutionState evolve(const Potential& q0, double T, const EvolutionOptions& opts = {});

Drift relative_drift(const Conserved& c0, const Conserved& c);

struct IsospectralReport {
  double T = 0.0;
  std::vector<cplx> k;
  std::vector<cplx> a0, aT;
  double a_residual = 0.0;            // max_k |a(k; q(T)) - a(k; q0)|
  std::vector<double> lambda;
  std::vector<cplx> b0, bT;
  double b_residual = 0.0;            // max |b(T) - e^{-4i lambda^4 T} b(0)|
  double b_residual_conjugate = 0.0;  // same against e^{+4i lambda^4 T}
  Drift drift;
  std::size_t steps = 0;
  double dt = 0.0;
  EvolutionState state;  // the evolved potential and its drift history
};

IsospectralReport isospectral_check(const Potential& q0, double T, const std::vector<cplx>& k,
                                    const std::vector<double>& lambda, const EvolutionOptions& opts = {});

}  // namespace kn

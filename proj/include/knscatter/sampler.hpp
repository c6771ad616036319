#pragma once

#include <array>
#include <vector>

#include "knscatter/core.hpp"
#include "knscatter/grid.hpp"

namespace kn {

// Finite-difference weights (Fornberg): w[k][i] approximates the k-th
// derivative at z from values at nodes x[i], for k = 0..m.
std::vector<std::vector<double>> fornberg_weights(double z, const std::vector<double>& x, int m);

// Local 8-point Lagrange interpolation of gridded samples. Stencils shift
// inward near the ends, so no data beyond the grid is assumed.
class LocalInterpolator {
 public:
  static constexpr int kStencil = 8;

  LocalInterpolator(const GridSpec& g, std::vector<cplx> values);

  // Value at cell j (between x_j and x_{j+1}) and fractional offset t in [0,1].
  cplx at(std::size_t cell, double t) const;
  cplx at(double x) const;

  const std::vector<cplx>& values() const { return values_; }
  const GridSpec& grid() const { return grid_; }

  // Weights for a fixed offset t inside interior cells, plus the stencil start.
  static std::array<double, kStencil> interior_weights(double t);
  std::size_t stencil_start(std::size_t cell) const;

 private:
  GridSpec grid_;
  std::vector<cplx> values_;
};

// Cumulative integral F(x_j) = int_{x_0}^{x_j} f, eighth order per cell.
std::vector<cplx> cumulative_integral(const GridSpec& g, const std::vector<cplx>& f);

}  // namespace kn

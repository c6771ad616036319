#pragma once

#include <vector>

#include "knscatter/core.hpp"

namespace kn::fft {

// Unnormalized DFTs: forward uses e^{-2 pi i jm/n}, inverse e^{+2 pi i jm/n}.
// Any n is accepted; plans are cached per (n, direction).
void forward(std::vector<cplx>& data);
void inverse(std::vector<cplx>& data);

}  // namespace kn::fft

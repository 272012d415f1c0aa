#pragma once

#include "badtime/dataset.hpp"

#include <cstdint>
#include <vector>

namespace badtime {

/// target(t) += gain * source(t - lag)
struct Coupling {
  Index source = 0;
  Index target = 0;
  Index lag = 0;
  double gain = 1.0;
};

/// Sinusoid-mixture variables with planted lagged couplings. Every variable
/// mixes 2-3 sinusoids with periods from {24, 37, 61} scaled per variable
/// (coupled targets get one) over a weak AR(1) texture; coupled targets add
/// their sources' delayed signal. Gaussian noise of `noise_sigma` is added
/// to every cell.
SeriesMatrix make_coupled_dataset(Index T, Index N, const std::vector<Coupling>& couplings,
                                  double noise_sigma, std::uint64_t seed);

/// Seven variables; v0, v1, v2 lead the last variable (OT) by 5, 7 and 13 steps.
std::vector<Coupling> default_couplings();
SeriesMatrix default_synthetic(std::uint64_t seed, Index T = 4000, double noise_sigma = 0.05);

}  // namespace badtime

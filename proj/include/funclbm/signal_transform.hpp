#pragma once

// Frequency-domain preprocessing: raw variable-length series become
// fixed-length coefficient vectors that are comparable across cells.
//
// Pipeline per cell: one-sided periodogram -> interpolation onto a common
// frequency grid -> z-scored log powers. The common grid spacing is the
// sample average of per-series frequency gaps.

#include <cstddef>
#include <vector>

#include "funclbm/types.hpp"

namespace funclbm {

enum class InterpMethod { linear, cubic };

// One-sided periodogram with DC bin kept. powers[k] = |X_k|^2 / l^2 where
// X is the unnormalized DFT and l the series length, so the total one-sided
// power (interior bins doubled) equals the mean squared signal value.
// frequencies[k] = k / (l * sample_interval).
Periodogram compute_periodogram(const TimeSeries& ts);

// gap = mean over all cells of 1 / (l_ij * sample_interval_ij).
CommonFrequencyGrid common_frequency_grid(const TimeSeriesDataset& dataset,
                                          std::size_t length);

// Interpolates powers onto the grid frequencies. Beyond the source's last
// frequency the value clamps to the last source power; outputs are floored
// at 0. Cubic uses the local 4-point Lagrange polynomial (exact on cubics).
std::vector<double> interpolate_periodogram(const Periodogram& p,
                                            const CommonFrequencyGrid& grid,
                                            InterpMethod method);

// z(log(x + eps)) with eps = 1e-12 * (1 + max(x)); z uses the n-1 standard
// deviation. Throws DegenerateSignalError if the logged vector is constant.
std::vector<double> log_normalize(const std::vector<double>& interpolated);

// Full per-cell pipeline over the dataset. Degenerate cells are zeroed and
// flagged; throws DegenerateDatasetError if >= 10% of cells are degenerate.
CoefficientGrid transform_dataset(const TimeSeriesDataset& dataset,
                                  std::size_t length, InterpMethod method);

}  // namespace funclbm

#pragma once

// Shared domain types for the FunCLBM pipeline and the error taxonomy the
// CLI maps onto exit codes.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace funclbm {

struct InvalidInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A single cell's signal carries no usable spectral shape (log-periodogram
// has zero variance). Callers substitute a zero vector and flag the cell.
struct DegenerateSignalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Too many degenerate cells in one dataset (>= 10%).
struct DegenerateDatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The requested (L, K) keeps producing empty clusters; the structure is too
// large for the data.
struct DegenerateStructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One sampled signal. values are equally spaced, sample_interval time units
// apart.
struct TimeSeries {
  std::vector<double> values;
  double sample_interval = 1.0;
};

// Fully populated n x p grid of series, row-major.
struct TimeSeriesDataset {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<TimeSeries> series;  // n*p, cell (i,j) at i*p + j
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;

  TimeSeries& cell(std::size_t i, std::size_t j) { return series[i * p + j]; }
  const TimeSeries& cell(std::size_t i, std::size_t j) const {
    return series[i * p + j];
  }
};

// One-sided periodogram: frequencies strictly increasing from 0.
struct Periodogram {
  std::vector<double> frequencies;
  std::vector<double> powers;
};

// Shared frequency axis <0, gap, ..., (length-1)*gap>.
struct CommonFrequencyGrid {
  double gap = 0.0;
  std::size_t length = 0;

  double frequency(std::size_t k) const { return static_cast<double>(k) * gap; }
  std::vector<double> frequencies() const {
    std::vector<double> f(length);
    for (std::size_t k = 0; k < length; ++k) f[k] = frequency(k);
    return f;
  }
};

// n x p grid of fixed-length coefficient vectors (the model's cell data).
// Degenerate cells hold the zero vector and are flagged.
struct CoefficientGrid {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t m = 0;
  CommonFrequencyGrid grid;
  std::vector<double> coeffs;  // n*p*m, cell (i,j) at (i*p + j)*m
  std::vector<std::uint8_t> degenerate;  // n*p flags
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;

  std::span<const double> cell(std::size_t i, std::size_t j) const {
    return {coeffs.data() + (i * p + j) * m, m};
  }
  std::span<double> cell(std::size_t i, std::size_t j) {
    return {coeffs.data() + (i * p + j) * m, m};
  }
  std::size_t degenerate_count() const {
    std::size_t c = 0;
    for (auto f : degenerate) c += f;
    return c;
  }
};

// (L, K_1..K_L): column-cluster count and per-column-cluster row-cluster
// counts.
struct CoClusterStructure {
  int L = 1;
  std::vector<int> K;

  bool operator==(const CoClusterStructure&) const = default;
};

// Latent assignment state: column labels w in [0, L) and, per column
// cluster ell, row labels z^ell in [0, K_ell).
struct PartitionPair {
  std::vector<int> col_labels;               // p
  std::vector<std::vector<int>> row_labels;  // L x n

  bool operator==(const PartitionPair&) const = default;
};

void validate_structure(const CoClusterStructure& s);

// Checks label ranges and dimensions against (n, p, structure).
void validate_partition(const PartitionPair& part, std::size_t n, std::size_t p,
                        const CoClusterStructure& s);

}  // namespace funclbm

#pragma once

// Synthetic conditional-block datasets: each block (k, ell) owns a prototype
// curve on [0, 1]; a cell in that block is the prototype sampled on a uniform
// grid with one per-cell time shift t_s ~ N(0, s^2) and i.i.d. N(0, s^2)
// noise per point.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "funclbm/types.hpp"

namespace funclbm {

struct Prototype {
  enum class Kind {
    sine,               // a = frequency (cycles over [0,1]), b = amplitude
    sigmoid,            // a = center, b = slope
    gaussian_bump,      // a = center, b = width
    linear_ramp,        // a = slope
    constant,           // a = level
    square_wave,        // a = frequency
    damped_oscillation  // a = frequency, b = decay rate
  };

  Kind kind = Kind::constant;
  double a = 0.0;
  double b = 0.0;

  double operator()(double t) const;
  std::string describe() const;

  static Prototype sine(double freq, double amplitude) { return {Kind::sine, freq, amplitude}; }
  static Prototype sigmoid(double center, double slope) { return {Kind::sigmoid, center, slope}; }
  static Prototype gaussian_bump(double center, double width) {
    return {Kind::gaussian_bump, center, width};
  }
  static Prototype linear_ramp(double slope) { return {Kind::linear_ramp, slope, 0.0}; }
  static Prototype constant(double level) { return {Kind::constant, level, 0.0}; }
  static Prototype square_wave(double freq) { return {Kind::square_wave, freq, 0.0}; }
  static Prototype damped_oscillation(double freq, double decay) {
    return {Kind::damped_oscillation, freq, decay};
  }

  bool operator==(const Prototype&) const = default;
};

struct GenerativeSpec {
  CoClusterStructure structure;
  std::vector<int> col_sizes;                    // L entries, sums to p
  std::vector<std::vector<int>> row_sizes;       // per ell, K_ell entries, sums to n
  std::vector<std::vector<Prototype>> prototypes;  // per ell, K_ell prototypes
  double noise_sd = 0.02;
  std::size_t series_length = 100;
  std::uint64_t seed = 0;

  std::size_t rows() const;
  std::size_t cols() const;
};

void validate_spec(const GenerativeSpec& spec);

std::pair<TimeSeriesDataset, PartitionPair> generate(const GenerativeSpec& spec);

// The 90x90 reference dataset: L=3 column clusters of sizes (45, 15, 30) with
// row-cluster sizes (20, 40, 30), (60, 30) and (40, 50), noise sd 0.02 and a
// fixed assignment of 7 distinct prototypes.
GenerativeSpec benchmark_90x90_spec(std::uint64_t seed);
std::pair<TimeSeriesDataset, PartitionPair> benchmark_90x90(std::uint64_t seed);

}  // namespace funclbm

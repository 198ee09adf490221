#include "funclbm/datagen.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "funclbm/parallel.hpp"
#include "funclbm/rng.hpp"

namespace funclbm {

namespace {
constexpr std::uint64_t kDatagenStream = 0xda7a;
}

double Prototype::operator()(double t) const {
  switch (kind) {
    case Kind::sine:
      return b * std::sin(2.0 * std::numbers::pi * a * t);
    case Kind::sigmoid:
      return 1.0 / (1.0 + std::exp(-b * (t - a)));
    case Kind::gaussian_bump: {
      const double u = (t - a) / b;
      return std::exp(-0.5 * u * u);
    }
    case Kind::linear_ramp:
      return a * t;
    case Kind::constant:
      return a;
    case Kind::square_wave:
      return std::sin(2.0 * std::numbers::pi * a * t) >= 0.0 ? 1.0 : -1.0;
    case Kind::damped_oscillation:
      return std::exp(-b * t) * std::sin(2.0 * std::numbers::pi * a * t);
  }
  return 0.0;
}

std::string Prototype::describe() const {
  switch (kind) {
    case Kind::sine:
      return "sine(freq=" + std::to_string(a) + ", amp=" + std::to_string(b) + ")";
    case Kind::sigmoid:
      return "sigmoid(center=" + std::to_string(a) + ", slope=" + std::to_string(b) + ")";
    case Kind::gaussian_bump:
      return "gaussian_bump(center=" + std::to_string(a) + ", width=" + std::to_string(b) + ")";
    case Kind::linear_ramp:
      return "linear_ramp(slope=" + std::to_string(a) + ")";
    case Kind::constant:
      return "constant(level=" + std::to_string(a) + ")";
    case Kind::square_wave:
      return "square_wave(freq=" + std::to_string(a) + ")";
    case Kind::damped_oscillation:
      return "damped_oscillation(freq=" + std::to_string(a) + ", decay=" + std::to_string(b) + ")";
  }
  return "?";
}

std::size_t GenerativeSpec::rows() const {
  if (row_sizes.empty()) return 0;
  return static_cast<std::size_t>(
      std::accumulate(row_sizes[0].begin(), row_sizes[0].end(), 0));
}

std::size_t GenerativeSpec::cols() const {
  return static_cast<std::size_t>(
      std::accumulate(col_sizes.begin(), col_sizes.end(), 0));
}

void validate_spec(const GenerativeSpec& spec) {
  validate_structure(spec.structure);
  const int L = spec.structure.L;
  if (static_cast<int>(spec.col_sizes.size()) != L ||
      static_cast<int>(spec.row_sizes.size()) != L ||
      static_cast<int>(spec.prototypes.size()) != L)
    throw InvalidInputError("generative spec: per-cluster arrays must have L entries");
  if (!(spec.noise_sd > 0.0)) throw InvalidInputError("generative spec: noise_sd must be > 0");
  if (spec.series_length < 2)
    throw InvalidInputError("generative spec: series_length must be >= 2");
  for (int s : spec.col_sizes)
    if (s < 1) throw InvalidInputError("generative spec: column sizes must be >= 1");

  const std::size_t n = spec.rows();
  for (int ell = 0; ell < L; ++ell) {
    const int K = spec.structure.K[ell];
    if (static_cast<int>(spec.row_sizes[ell].size()) != K ||
        static_cast<int>(spec.prototypes[ell].size()) != K)
      throw InvalidInputError("generative spec: cluster " + std::to_string(ell) +
                              " needs K_l sizes and prototypes");
    for (int s : spec.row_sizes[ell])
      if (s < 1) throw InvalidInputError("generative spec: row sizes must be >= 1");
    const auto total = static_cast<std::size_t>(
        std::accumulate(spec.row_sizes[ell].begin(), spec.row_sizes[ell].end(), 0));
    if (total != n)
      throw InvalidInputError("generative spec: row sizes must sum to n in every cluster");
    for (int k1 = 0; k1 < K; ++k1)
      for (int k2 = k1 + 1; k2 < K; ++k2)
        if (spec.prototypes[ell][k1] == spec.prototypes[ell][k2])
          throw InvalidInputError(
              "generative spec: prototypes within a column cluster must be distinct");
  }
}

std::pair<TimeSeriesDataset, PartitionPair> generate(const GenerativeSpec& spec) {
  validate_spec(spec);
  const int L = spec.structure.L;
  const std::size_t n = spec.rows();
  const std::size_t p = spec.cols();

  PartitionPair truth;
  truth.col_labels.resize(p);
  {
    std::size_t j = 0;
    for (int ell = 0; ell < L; ++ell)
      for (int c = 0; c < spec.col_sizes[ell]; ++c) truth.col_labels[j++] = ell;
  }
  truth.row_labels.assign(L, std::vector<int>(n));
  for (int ell = 0; ell < L; ++ell) {
    std::size_t i = 0;
    for (int k = 0; k < spec.structure.K[ell]; ++k)
      for (int r = 0; r < spec.row_sizes[ell][k]; ++r) truth.row_labels[ell][i++] = k;
  }

  TimeSeriesDataset data;
  data.n = n;
  data.p = p;
  data.series.resize(n * p);
  data.row_ids.resize(n);
  data.col_ids.resize(p);
  for (std::size_t i = 0; i < n; ++i) data.row_ids[i] = "r" + std::to_string(i);
  for (std::size_t j = 0; j < p; ++j) data.col_ids[j] = "c" + std::to_string(j);

  const std::size_t len = spec.series_length;
  parallel_for(n * p, [&](std::size_t idx) {
    const std::size_t i = idx / p;
    const std::size_t j = idx % p;
    const int ell = truth.col_labels[j];
    const int k = truth.row_labels[ell][i];
    const Prototype& proto = spec.prototypes[ell][k];

    Rng rng(derive_seed(spec.seed, kDatagenStream, i, j));
    const double shift = rng.normal(0.0, spec.noise_sd);
    TimeSeries& ts = data.series[idx];
    ts.sample_interval = 1.0;
    ts.values.resize(len);
    for (std::size_t u = 0; u < len; ++u) {
      const double t = static_cast<double>(u) / static_cast<double>(len - 1);
      ts.values[u] = proto(t + shift) + rng.normal(0.0, spec.noise_sd);
    }
  });

  return {std::move(data), std::move(truth)};
}

GenerativeSpec benchmark_90x90_spec(std::uint64_t seed) {
  GenerativeSpec spec;
  spec.structure = {3, {3, 2, 2}};
  spec.col_sizes = {45, 15, 30};
  spec.row_sizes = {{20, 40, 30}, {60, 30}, {40, 50}};
  spec.prototypes = {
      {Prototype::sine(3.0, 1.0), Prototype::gaussian_bump(0.5, 0.1),
       Prototype::linear_ramp(2.0)},
      {Prototype::square_wave(2.0), Prototype::sigmoid(0.5, 14.0)},
      {Prototype::damped_oscillation(4.0, 2.5), Prototype::constant(1.2)}};
  spec.noise_sd = 0.02;
  spec.series_length = 100;
  spec.seed = seed;
  return spec;
}

std::pair<TimeSeriesDataset, PartitionPair> benchmark_90x90(std::uint64_t seed) {
  return generate(benchmark_90x90_spec(seed));
}

}  // namespace funclbm

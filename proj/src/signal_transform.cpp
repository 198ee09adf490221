#include "funclbm/signal_transform.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "funclbm/kernels.hpp"
#include "funclbm/parallel.hpp"

namespace funclbm {

namespace {

void validate_series(const TimeSeries& ts) {
  if (ts.values.size() < 2)
    throw InvalidInputError("time series must have length >= 2");
  if (!(ts.sample_interval > 0.0))
    throw InvalidInputError("sample_interval must be > 0");
  for (double v : ts.values)
    if (!std::isfinite(v)) throw InvalidInputError("time series value not finite");
}

// cos/sin basis rows for every one-sided bin of a given length. The angle
// argument is reduced with (k*t) mod l so large products never lose the
// periodicity.
struct DftTable {
  std::size_t len = 0;
  std::size_t bins = 0;
  std::vector<double> cos_rows;  // bins x len
  std::vector<double> sin_rows;

  explicit DftTable(std::size_t l) : len(l), bins(l / 2 + 1) {
    cos_rows.resize(bins * len);
    sin_rows.resize(bins * len);
    for (std::size_t k = 0; k < bins; ++k) {
      for (std::size_t t = 0; t < len; ++t) {
        const std::size_t red = (k * t) % len;
        const double angle =
            2.0 * std::numbers::pi * static_cast<double>(red) / static_cast<double>(len);
        cos_rows[k * len + t] = std::cos(angle);
        sin_rows[k * len + t] = std::sin(angle);
      }
    }
  }
};

Periodogram periodogram_with_table(const TimeSeries& ts, const DftTable& table) {
  const std::size_t l = ts.values.size();
  Periodogram out;
  out.frequencies.resize(table.bins);
  out.powers.resize(table.bins);
  const double* x = ts.values.data();
  const double norm = 1.0 / (static_cast<double>(l) * static_cast<double>(l));
  for (std::size_t k = 0; k < table.bins; ++k) {
    const double re = kernels::dot(x, table.cos_rows.data() + k * l, l);
    const double im = kernels::dot(x, table.sin_rows.data() + k * l, l);
    out.powers[k] = (re * re + im * im) * norm;
    out.frequencies[k] =
        static_cast<double>(k) / (static_cast<double>(l) * ts.sample_interval);
  }
  return out;
}

// Lagrange cubic through 4 consecutive source points.
double lagrange4(const double* fx, const double* fy, double x) {
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    double term = fy[a];
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      term *= (x - fx[b]) / (fx[a] - fx[b]);
    }
    acc += term;
  }
  return acc;
}

}  // namespace

Periodogram compute_periodogram(const TimeSeries& ts) {
  validate_series(ts);
  const DftTable table(ts.values.size());
  return periodogram_with_table(ts, table);
}

CommonFrequencyGrid common_frequency_grid(const TimeSeriesDataset& dataset,
                                          std::size_t length) {
  if (dataset.n == 0 || dataset.p == 0)
    throw InvalidInputError("dataset must be nonempty");
  if (length < 2) throw InvalidInputError("grid length must be >= 2");
  double total = 0.0;
  for (const TimeSeries& ts : dataset.series) {
    validate_series(ts);
    total += 1.0 / (static_cast<double>(ts.values.size()) * ts.sample_interval);
  }
  CommonFrequencyGrid grid;
  grid.gap = total / static_cast<double>(dataset.series.size());
  grid.length = length;
  return grid;
}

std::vector<double> interpolate_periodogram(const Periodogram& p,
                                            const CommonFrequencyGrid& grid,
                                            InterpMethod method) {
  const std::size_t src = p.frequencies.size();
  if (src != p.powers.size())
    throw InvalidInputError("periodogram: frequency/power length mismatch");
  if (method == InterpMethod::linear && src < 2)
    throw InvalidInputError("linear interpolation needs >= 2 source points");
  if (method == InterpMethod::cubic && src < 4)
    throw InvalidInputError("cubic interpolation needs >= 4 source points");

  std::vector<double> out(grid.length);
  const double fmax = p.frequencies.back();
  for (std::size_t k = 0; k < grid.length; ++k) {
    const double f = grid.frequency(k);
    double v;
    if (f >= fmax) {
      v = p.powers.back();  // clamp past the source support
    } else {
      // index of the interval [f_i, f_{i+1}) containing f
      const auto it =
          std::upper_bound(p.frequencies.begin(), p.frequencies.end(), f);
      const std::size_t hi = std::max<std::size_t>(
          1, static_cast<std::size_t>(it - p.frequencies.begin()));
      const std::size_t i = hi - 1;
      if (method == InterpMethod::linear) {
        const double f0 = p.frequencies[i];
        const double f1 = p.frequencies[i + 1];
        const double t = (f - f0) / (f1 - f0);
        v = p.powers[i] + t * (p.powers[i + 1] - p.powers[i]);
      } else {
        const std::size_t w =
            std::min(i == 0 ? 0 : i - 1, src - 4);
        v = lagrange4(p.frequencies.data() + w, p.powers.data() + w, f);
      }
    }
    out[k] = std::max(0.0, v);
  }
  return out;
}

std::vector<double> log_normalize(const std::vector<double>& interpolated) {
  const std::size_t n = interpolated.size();
  if (n < 2) throw InvalidInputError("log_normalize: vector length must be >= 2");
  double maxv = 0.0;
  for (double v : interpolated) {
    if (v < 0.0) throw InvalidInputError("log_normalize: entries must be >= 0");
    maxv = std::max(maxv, v);
  }
  const double eps = 1e-12 * (1.0 + maxv);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::log(interpolated[i] + eps);

  const double mean = kernels::sum(out.data(), n) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : out) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0) || !std::isfinite(1.0 / sd))
    throw DegenerateSignalError("log-periodogram has zero variance");
  kernels::scale_shift(out.data(), n, -mean, 1.0 / sd);
  return out;
}

CoefficientGrid transform_dataset(const TimeSeriesDataset& dataset,
                                  std::size_t length, InterpMethod method) {
  CoefficientGrid out;
  out.grid = common_frequency_grid(dataset, length);
  out.n = dataset.n;
  out.p = dataset.p;
  out.m = length;
  out.row_ids = dataset.row_ids;
  out.col_ids = dataset.col_ids;
  out.coeffs.assign(dataset.n * dataset.p * length, 0.0);
  out.degenerate.assign(dataset.n * dataset.p, 0);

  // Tables are shared across cells of equal length; build them up front so
  // the per-cell loop stays read-only on shared state.
  std::map<std::size_t, DftTable> tables;
  for (const TimeSeries& ts : dataset.series)
    tables.try_emplace(ts.values.size(), ts.values.size());

  parallel_for(dataset.series.size(), [&](std::size_t idx) {
    const TimeSeries& ts = dataset.series[idx];
    const Periodogram p = periodogram_with_table(ts, tables.at(ts.values.size()));
    const std::vector<double> interp = interpolate_periodogram(p, out.grid, method);
    try {
      const std::vector<double> coeff = log_normalize(interp);
      std::copy(coeff.begin(), coeff.end(), out.coeffs.begin() + idx * length);
    } catch (const DegenerateSignalError&) {
      out.degenerate[idx] = 1;  // cell stays zero
    }
  });

  const std::size_t bad = out.degenerate_count();
  if (10 * bad >= dataset.series.size())
    throw DegenerateDatasetError("degenerate cells reach 10% of the dataset (" +
                                 std::to_string(bad) + " of " +
                                 std::to_string(dataset.series.size()) + ")");
  return out;
}

}  // namespace funclbm

#include "funclbm/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "funclbm/types.hpp"

namespace funclbm {

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidInputError("pearson: need two equal-length samples of size >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw InvalidInputError("pearson: zero variance sample");
  return sxy / std::sqrt(sxx * syy);
}

KendallTest kendall_test(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (y.size() != n || n < 3)
    throw InvalidInputError("kendall: need two equal-length samples of size >= 3");

  long long s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double prod = (x[i] - x[j]) * (y[i] - y[j]);
      if (prod > 0.0)
        ++s;
      else if (prod < 0.0)
        --s;
    }
  }

  const auto tie_sums = [](const std::vector<double>& v) {
    std::map<double, long long> groups;
    for (double value : v) ++groups[value];
    double pairs = 0.0, v2 = 0.0, v3 = 0.0;
    for (const auto& [value, t] : groups) {
      const double td = static_cast<double>(t);
      pairs += td * (td - 1.0) / 2.0;
      v2 += td * (td - 1.0) * (2.0 * td + 5.0);
      v3 += td * (td - 1.0) * (td - 2.0);
    }
    return std::array<double, 3>{pairs, v2, v3};
  };
  const auto [tx_pairs, tx_v2, tx_v3] = tie_sums(x);
  const auto [ty_pairs, ty_v2, ty_v3] = tie_sums(y);

  const double nd = static_cast<double>(n);
  const double n0 = nd * (nd - 1.0) / 2.0;
  const double denom = std::sqrt((n0 - tx_pairs) * (n0 - ty_pairs));
  if (denom == 0.0) throw InvalidInputError("kendall: constant sample");

  KendallTest out;
  out.tau = static_cast<double>(s) / denom;

  double var = (nd * (nd - 1.0) * (2.0 * nd + 5.0) - tx_v2 - ty_v2) / 18.0 +
               tx_v3 * ty_v3 / (9.0 * nd * (nd - 1.0) * (nd - 2.0)) +
               (2.0 * tx_pairs) * (2.0 * ty_pairs) / (2.0 * nd * (nd - 1.0));
  var = std::max(var, 0.0);
  out.z = var > 0.0 ? static_cast<double>(s) / std::sqrt(var) : 0.0;
  out.p_value = std::erfc(std::abs(out.z) / std::sqrt(2.0));
  return out;
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInputError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInputError("quantile: q must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace funclbm

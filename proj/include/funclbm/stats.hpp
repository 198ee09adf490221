#pragma once

// Correlation helpers for the diagnostic artifacts: Pearson's r and
// Kendall's tau-b with the tie-corrected normal-approximation test.

#include <vector>

namespace funclbm {

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y);

struct KendallTest {
  double tau = 0.0;      // tau-b (tie corrected)
  double z = 0.0;        // normal approximation statistic
  double p_value = 1.0;  // two-sided
};

KendallTest kendall_test(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

}  // namespace funclbm

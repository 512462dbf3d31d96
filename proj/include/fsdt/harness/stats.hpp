#pragma once
// Summary statistics for evaluation reports.

#include <vector>

namespace fsdt::harness {

// Linear-interpolation (type-7) quantile of a sorted sample, p in [0,1].
double quantile_type7(const std::vector<double>& sorted, double p);

struct BoxStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;   // q1 - 1.5*IQR, clipped to the data range
  double whisker_high = 0.0;  // q3 + 1.5*IQR, clipped to the data range
  double mean = 0.0;
  std::size_t n = 0;
};

BoxStats box_stats(std::vector<double> samples);

// Trailing moving average; the first window-1 entries average the available
// prefix.
std::vector<double> moving_average(const std::vector<double>& x, int window);

}  // namespace fsdt::harness

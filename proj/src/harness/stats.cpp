#include "fsdt/harness/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fsdt::harness {

double quantile_type7(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile p outside [0,1]");
  const double h = p * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("box stats of empty sample");
  std::sort(samples.begin(), samples.end());
  BoxStats s;
  s.n = samples.size();
  s.q1 = quantile_type7(samples, 0.25);
  s.median = quantile_type7(samples, 0.5);
  s.q3 = quantile_type7(samples, 0.75);
  const double iqr = s.q3 - s.q1;
  s.whisker_low = std::max(samples.front(), s.q1 - 1.5 * iqr);
  s.whisker_high = std::min(samples.back(), s.q3 + 1.5 * iqr);
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(samples.size());
  return s;
}

std::vector<double> moving_average(const std::vector<double>& x, int window) {
  if (window <= 0) throw std::invalid_argument("window must be positive");
  std::vector<double> out(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i];
    if (i >= static_cast<std::size_t>(window)) acc -= x[i - window];
    const double n = std::min<double>(window, static_cast<double>(i + 1));
    out[i] = acc / n;
  }
  return out;
}

}  // namespace fsdt::harness

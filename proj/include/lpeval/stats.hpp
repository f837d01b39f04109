#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "lpeval/parallel.hpp"

namespace lpeval {

/// Count, mean, extremes and unbiased sample variance of a sample.
struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double variance = 0.0;  // n - 1 denominator; 0 for fewer than two values
};

/// Two-pass, compensated: the result depends only on the values and their order.
inline SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  s.count = values.size();
  if (values.empty()) return s;
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  s.mean = sum.value() / static_cast<double>(values.size());
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  if (s.min == s.max) {
    s.mean = s.min;
    return s;
  }
  if (values.size() > 1) {
    CompensatedSum sq;
    for (double v : values) sq.add((v - s.mean) * (v - s.mean));
    s.variance = sq.value() / static_cast<double>(values.size() - 1);
  }
  return s;
}

/// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  LinearFit f;
  f.points = x.size();
  if (x.size() < 2 || x.size() != y.size()) return f;
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

}  // namespace lpeval

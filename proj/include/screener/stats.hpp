#pragma once

#include <span>

namespace screener {

struct PairedTTest {
  double mean_difference = 0.0;  // mean(a - b)
  double t = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;  // two-sided
};

// Paired Student t-test over matched samples. Needs at least two pairs; a
// zero-variance difference gives t = +-inf (p = 0) or, if the mean difference
// is also zero, t = 0 (p = 1).
PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> x);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> x);

}  // namespace screener

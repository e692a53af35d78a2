#pragma once

#include <span>

namespace stochhom {

// Student-t distribution function with `dof` degrees of freedom (dof > 0).
double student_t_cdf(double t, double dof);

// Inverse of student_t_cdf for p in (0, 1), by bisection on the CDF.
double student_t_quantile(double p, double dof);

struct StudentInterval {
  double mean = 0.0;
  double std_dev = 0.0;  // unbiased
  double half_width = 0.0;
};

// Two-sided interval mean +- t_{n-1,(1+level)/2} s / sqrt(n).
// Throws Error(InsufficientSamples) for fewer than two values.
StudentInterval student_interval(std::span<const double> values, double level);

}  // namespace stochhom

#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace desing {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

// Golden-section search for the minimiser of a unimodal function on [lo, hi].
double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                          double tol = 1e-14);

// Bisection for a sign change of f on [lo, hi]; runs until the bracket stops shrinking.
double bisect(const std::function<double(double)>& f, double lo, double hi);

// Runs body(i) for i in [0, count) on the number of threads given by
// DESING_THREADS (default 1). Each index is visited exactly once.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);
int thread_count();

}  // namespace desing

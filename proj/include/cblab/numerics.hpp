#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace cblab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_depth = 40;
};

// Adaptive Gauss-Kronrod 7/15 on a finite interval. Bisects until the
// embedded-rule error estimate of every panel meets the tolerance split
// proportionally to panel width.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opt = {});

// Same rule over [a, +inf) through the substitution x = a + s/(1-s).
double integrate_to_inf(const std::function<double(double)>& f, double a,
                        const QuadratureOptions& opt = {});

// Accumulating variant used for divergence probes: integrates panels of
// [a, b] from the right end leftward and stops once the running total
// exceeds `cap`. Returns min(cap-exceeding partial sum, actual integral).
double integrate_capped(const std::function<double(double)>& f, double a,
                        double b, double cap, int panels_per_decade = 16);

// Bracketed scalar root solve (bisection with secant acceleration).
// Requires sign change on [lo, hi].
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol = 1e-14, int max_iter = 200);

// ~ e^{-x} - 1 + x, accurate for small x (series below |x| = 1e-4).
inline double exp_compensated(double x) {
  if (std::fabs(x) < 1e-4) {
    // x^2/2 - x^3/6 + x^4/24
    return x * x * (0.5 + x * (-1.0 / 6.0 + x * (1.0 / 24.0)));
  }
  return std::expm1(-x) + x;
}

// integral of l*e^{-r l} over (0, 1]: (1 - (1+r) e^{-r}) / r^2. The
// direct form cancels like r^2/2 near 0, so switch to its series
// (coefficients (-1)^j (j-1)/j! shifted by r^2) below |r| = 1e-2.
inline double first_moment_exp_kernel(double r) {
  if (std::fabs(r) < 1e-2) {
    return 0.5 +
           r * (-1.0 / 3.0 +
                r * (1.0 / 8.0 +
                     r * (-1.0 / 30.0 +
                          r * (1.0 / 144.0 + r * (-1.0 / 840.0)))));
  }
  return (1.0 - (1.0 + r) * std::exp(-r)) / (r * r);
}

}  // namespace cblab

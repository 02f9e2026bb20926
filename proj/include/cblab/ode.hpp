#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace cblab {

// Thrown when the integrator cannot reach the end of the interval
// (step underflow or state blow-up); `time` is where it gave up.
struct SolverFailure : std::runtime_error {
  SolverFailure(const std::string& what, double time_)
      : std::runtime_error(what + " at t=" + std::to_string(time_)),
        time(time_) {}
  double time;
};

struct OdeOptions {
  static constexpr double kNoMaxStep = 1e300;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double max_step = kNoMaxStep;
  long max_steps = 2'000'000;
  double blowup_threshold = 1e100;
};

namespace detail {
template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
inline Vec<N> axpy(const Vec<N>& y, double h, const Vec<N>& k) {
  Vec<N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = y[i] + h * k[i];
  return r;
}
}  // namespace detail

// Dense-output evaluator for one accepted Dormand-Prince step. Valid for
// t in [t0, t0+h]; quartic Hermite-type interpolant of the 5th-order
// solution (Hairer's contd5 coefficients).
template <std::size_t N>
struct DenseStep {
  double t0 = 0, h = 0;
  std::array<detail::Vec<N>, 5> r;  // rcont1..rcont5

  detail::Vec<N> eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    detail::Vec<N> y;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = r[0][i] +
             th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
    }
    return y;
  }
};

// Explicit embedded Runge-Kutta 5(4), Dormand-Prince coefficients, PI-free
// classic step control. `rhs(t, y)` returns dy/dt. `observer`, when not
// null, is called after every accepted step with the dense interpolant.
//
// Integrates t forward only (t1 > t0); callers integrating backward
// substitute their own time reversal.
template <std::size_t N, class RHS>
detail::Vec<N> integrate_ode(RHS&& rhs, double t0, double t1,
                             detail::Vec<N> y, const OdeOptions& opt = {},
                             const std::function<void(const DenseStep<N>&)>*
                                 observer = nullptr) {
  using detail::Vec;
  using detail::axpy;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113,
                          a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  // b5 - b4 (error weights)
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  // dense output d-coefficients
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0,
                          d7 = 69997945.0 / 29380423.0;

  if (!(t1 >= t0)) throw std::invalid_argument("integrate_ode: t1 < t0");
  if (t1 == t0) return y;

  double t = t0;
  Vec<N> k1 = rhs(t, y);
  double h = std::min({(t1 - t0) / 10.0, opt.max_step, 1.0});
  long n_steps = 0;

  while (t < t1) {
    if (t1 - t <= 1e-14 * (1.0 + std::fabs(t1))) break;  // ulp-snap to t1
    if (++n_steps > opt.max_steps) {
      throw SolverFailure("ODE step budget exhausted", t);
    }
    h = std::min(h, t1 - t);
    if (h < 1e-14 * (1.0 + std::fabs(t))) {
      throw SolverFailure("ODE step underflow", t);
    }

    const Vec<N> k2 = rhs(t + c2 * h, axpy(y, h * a21, k1));
    Vec<N> tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    const Vec<N> k3 = rhs(t + c3 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const Vec<N> k4 = rhs(t + c4 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    const Vec<N> k5 = rhs(t + c5 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                           a64 * k4[i] + a65 * k5[i]);
    const Vec<N> k6 = rhs(t + h, tmp);
    Vec<N> y_new;
    for (std::size_t i = 0; i < N; ++i)
      y_new[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] +
                             a75 * k5[i] + a76 * k6[i]);
    const Vec<N> k7 = rhs(t + h, y_new);  // FSAL

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                             e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale =
          opt.abs_tol +
          opt.rel_tol * std::max(std::fabs(y[i]), std::fabs(y_new[i]));
      err += (ei / scale) * (ei / scale);
    }
    err = std::sqrt(err / N);

    if (err <= 1.0) {
      if (observer != nullptr) {
        DenseStep<N> d;
        d.t0 = t;
        d.h = h;
        for (std::size_t i = 0; i < N; ++i) {
          const double dy = y_new[i] - y[i];
          d.r[0][i] = y[i];
          d.r[1][i] = dy;
          d.r[2][i] = h * k1[i] - dy;
          d.r[3][i] = dy - h * k7[i] - d.r[2][i];
          d.r[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                           d6 * k6[i] + d7 * k7[i]);
        }
        (*observer)(d);
      }
      t += h;
      y = y_new;
      k1 = k7;
      for (std::size_t i = 0; i < N; ++i) {
        if (!std::isfinite(y[i]) || std::fabs(y[i]) > opt.blowup_threshold) {
          throw SolverFailure("ODE state blow-up", t);
        }
      }
    }
    double factor = 0.2;  // also the non-finite-error fallback
    if (err == 0.0) {
      factor = 5.0;
    } else if (std::isfinite(err)) {
      factor = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    }
    h = std::min(h * factor, opt.max_step);
  }
  return y;
}

}  // namespace cblab

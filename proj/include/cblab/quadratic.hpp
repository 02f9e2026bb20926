#pragma once

#include "cblab/mechanisms.hpp"

namespace cblab::quad {

// Parameters of the critical/sub-critical quadratic model:
//   total population mechanism  psi(v)  = alpha v + v^2,
//   eve-population mechanism    psi0(v) = (alpha + 2 theta) v + v^2,
//   immigration                 phi(v)  = 2 theta v.
struct QuadraticParams {
  double alpha;  // >= 0 (0 = critical)
  double theta;  // > 0 mutation intensity
  double x;      // >= 0 initial mass

  QuadraticParams(double alpha_, double theta_, double x_);

  double b() const { return alpha + 2.0 * theta; }
  BranchingMechanism psi() const { return {alpha, 1.0}; }
  BranchingMechanism psi0() const { return {b(), 1.0}; }
  ImmigrationMechanism phi() const {
    return ImmigrationMechanism(2.0 * theta);
  }
};

// int_0^t e^{a s} ds, continuous across a = 0.
double exp_integral(double a, double t);
// Derivative of exp_integral in its first argument (a > 0).
double exp_integral_da(double a, double t);

// h(t) = 1 + lambda1 * int_0^t e^{-alpha s} ds; the linearizing factor of
// the backward Riccati equation, with w*(s) = h'(t-s)/h(t-s).
double riccati_h(double lambda1, double alpha, double t);

// Closed-form cumulant of the quadratic CB (beta = 1):
// u(t, lambda) = 1 / (e^{alpha t}/lambda + exp_integral(alpha, t)).
double cumulant(double alpha, double t, double lambda);

// w*(s) = lambda1 e^{-alpha (t-s)} / h(t-s): exponent of the total-mass
// marginal, solving (w*)' = w*(w* + alpha), w*(t) = lambda1.
double total_exponent(const QuadraticParams& p, double lambda1, double t,
                      double s);

// v0: E[e^{-l1 X_t - l2 Y0_t}] = e^{-x v0(t)}.
double joint_exponent(const QuadraticParams& p, double lambda1,
                      double lambda2, double t);

// v1: E[e^{-l1 X_t - l2 Y0_u}] = e^{-x v1(u,t)}, 0 <= u < t.
double joint_exponent_two_time(const QuadraticParams& p, double lambda1,
                               double lambda2, double u, double t);

struct ExtinctionSummary {
  double p_total_extinct;             // P(X_t = 0)
  double p_eve_extinct;               // P(Y0_t = 0)
  double p_eve_alive_given_total_alive;  // P(Y0_t > 0 | X_t > 0)
};

ExtinctionSummary extinction_summary(const QuadraticParams& p, double t);

// P(tau_X <= t, tau_Y0 <= u), 0 < u <= t (u = t via the marginal identity).
double joint_extinction_cdf(const QuadraticParams& p, double u, double t);

// P(tau_Y0 = tau_X | tau_X = t) = e^{-2 theta t}.
double simultaneous_extinction_prob(const QuadraticParams& p, double t);

// lim_{t->inf} E[e^{-l2 Y0_u} | X_t > 0] = e^{-x/A} (1 - G/A^2) with
// A = e^{bu}/l2 + exp_integral(b, u) and the two-branch G.
double eve_laplace_given_survival_limit(const QuadraticParams& p,
                                        double lambda2, double u);

// Finite-horizon conditional E[e^{-l2 Y0_u} | X_t > 0], 0 <= u < t,
// assembled in a cancellation-safe form so the gap to the t -> inf limit
// is meaningful down to ~1e-12.
double eve_laplace_given_survival(const QuadraticParams& p, double lambda2,
                                  double u, double t);

}  // namespace cblab::quad

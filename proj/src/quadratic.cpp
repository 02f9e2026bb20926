#include "cblab/quadratic.hpp"

#include <cmath>
#include <stdexcept>

#include "cblab/numerics.hpp"

namespace cblab::quad {

namespace {

QuadratureOptions quad_opts() {
  QuadratureOptions q;
  q.abs_tol = 1e-13;
  q.rel_tol = 1e-13;
  return q;
}

// q(r) = int_0^r e^{-alpha s} ds = e^{-alpha r} exp_integral(alpha, r).
double decay_integral(double alpha, double r) {
  if (alpha == 0.0) return r;
  return -std::expm1(-alpha * r) / alpha;
}

}  // namespace

QuadraticParams::QuadraticParams(double alpha_, double theta_, double x_)
    : alpha(alpha_), theta(theta_), x(x_) {
  if (!(alpha >= 0.0)) {
    throw std::invalid_argument("QuadraticParams: alpha must be >= 0");
  }
  if (!(theta > 0.0)) {
    throw std::invalid_argument("QuadraticParams: theta must be > 0");
  }
  if (!(x >= 0.0)) {
    throw std::invalid_argument("QuadraticParams: x must be >= 0");
  }
}

double exp_integral(double a, double t) {
  if (!(t >= 0.0)) throw std::domain_error("exp_integral: t < 0");
  if (a == 0.0) return t;
  return std::expm1(a * t) / a;
}

double exp_integral_da(double a, double t) {
  if (a == 0.0) return 0.5 * t * t;
  return (t * std::exp(a * t) - exp_integral(a, t)) / a;
}

double riccati_h(double lambda1, double alpha, double t) {
  return 1.0 + lambda1 * decay_integral(alpha, t);
}

double cumulant(double alpha, double t, double lambda) {
  if (lambda < 0.0) throw std::domain_error("cumulant: lambda < 0");
  if (lambda == 0.0) return 0.0;
  return 1.0 / (std::exp(alpha * t) / lambda + exp_integral(alpha, t));
}

double total_exponent(const QuadraticParams& p, double lambda1, double t,
                      double s) {
  if (!(s <= t)) throw std::domain_error("total_exponent: s > t");
  if (lambda1 < 0.0) throw std::domain_error("total_exponent: lambda1 < 0");
  const double r = t - s;
  return lambda1 * std::exp(-p.alpha * r) / riccati_h(lambda1, p.alpha, r);
}

namespace {

// int_lo^hi e^{-b r} h(r)^{-2} dr, closed form when lambda1 = 0.
double v_integral(const QuadraticParams& p, double lambda1, double lo,
                  double hi) {
  const double b = p.b();
  if (lambda1 == 0.0) {
    return (std::exp(-b * lo) - std::exp(-b * hi)) / b;
  }
  return integrate(
      [&](double r) {
        const double h = riccati_h(lambda1, p.alpha, r);
        return std::exp(-b * r) / (h * h);
      },
      lo, hi, quad_opts());
}

}  // namespace

double joint_exponent(const QuadraticParams& p, double lambda1,
                      double lambda2, double t) {
  if (!(t >= 0.0)) throw std::domain_error("joint_exponent: t < 0");
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw std::domain_error("joint_exponent: negative lambda");
  }
  const double marginal = total_exponent(p, lambda1, t, 0.0);
  if (lambda2 == 0.0) return marginal;
  if (t == 0.0) return lambda1 + lambda2;
  const double h_t = riccati_h(lambda1, p.alpha, t);
  const double head = std::exp(-p.b() * t) / (h_t * h_t);
  return head / (1.0 / lambda2 + v_integral(p, lambda1, 0.0, t)) + marginal;
}

double joint_exponent_two_time(const QuadraticParams& p, double lambda1,
                               double lambda2, double u, double t) {
  if (!(0.0 <= u && u < t)) {
    throw std::domain_error("joint_exponent_two_time: needs 0 <= u < t");
  }
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw std::domain_error("joint_exponent_two_time: negative lambda");
  }
  const double marginal = total_exponent(p, lambda1, t, 0.0);
  if (lambda2 == 0.0) return marginal;
  const double h_t = riccati_h(lambda1, p.alpha, t);
  const double h_tu = riccati_h(lambda1, p.alpha, t - u);
  const double head = std::exp(-p.b() * t) / (h_t * h_t);
  const double lead = std::exp(-p.b() * (t - u)) / (h_tu * h_tu) / lambda2;
  return head / (lead + v_integral(p, lambda1, t - u, t)) + marginal;
}

ExtinctionSummary extinction_summary(const QuadraticParams& p, double t) {
  if (!(t >= 0.0)) throw std::domain_error("extinction_summary: t < 0");
  if (p.x == 0.0) return {1.0, 1.0, 1.0};
  if (t == 0.0) return {0.0, 0.0, 1.0};
  const double ex_total = -p.x / exp_integral(p.alpha, t);
  const double ex_eve = -p.x / exp_integral(p.b(), t);
  return {std::exp(ex_total), std::exp(ex_eve),
          std::expm1(ex_eve) / std::expm1(ex_total)};
}

double joint_extinction_cdf(const QuadraticParams& p, double u, double t) {
  if (!(0.0 < u && u <= t)) {
    throw std::domain_error("joint_extinction_cdf: needs 0 < u <= t");
  }
  if (p.x == 0.0) return 1.0;
  const double g_t = exp_integral(p.alpha, t);
  if (u == t) {
    // tau_Y0 <= tau_X always, so the joint event is just tau_X <= t; the
    // direct integral diverges like (t-s)^{-2} there.
    return std::exp(-p.x / g_t);
  }
  const double b = p.b();
  const double q_t = decay_integral(p.alpha, t);
  const double tail_integral = integrate(
      [&](double s) {
        const double ratio = q_t / decay_integral(p.alpha, t - s);
        return std::exp(b * s) * ratio * ratio;
      },
      0.0, u, quad_opts());
  return std::exp(-p.x * (1.0 / tail_integral + 1.0 / g_t));
}

double simultaneous_extinction_prob(const QuadraticParams& p, double t) {
  if (!(t > 0.0)) {
    throw std::domain_error("simultaneous_extinction_prob: t <= 0");
  }
  return std::exp(-2.0 * p.theta * t);
}

namespace {

// Two-branch correction term G of the conditional limit; series branch
// below |alpha| * u = 1e-6 keeps it continuous across alpha = 0.
double survival_correction(const QuadraticParams& p, double lambda2,
                           double u) {
  const double b = p.b();
  const double lead =
      2.0 / lambda2 * std::exp(b * u) * exp_integral(p.alpha, u);
  if (std::fabs(p.alpha) * u < 1e-6) {
    // (g(b+a,u) - g(b,u))/a = d_a g(b,u) + (a/2) d_a^2 g(b,u) + O(a^2)
    const double d1 = exp_integral_da(b, u);
    const double d2 = (u * u * std::exp(b * u) - 2.0 * d1) / b;
    return lead + 2.0 * (d1 + 0.5 * p.alpha * d2);
  }
  return lead +
         2.0 * (exp_integral(b + p.alpha, u) - exp_integral(b, u)) / p.alpha;
}

}  // namespace

double eve_laplace_given_survival_limit(const QuadraticParams& p,
                                        double lambda2, double u) {
  if (lambda2 < 0.0 || u < 0.0) {
    throw std::domain_error("eve_laplace_given_survival_limit: bad input");
  }
  if (lambda2 == 0.0) return 1.0;
  const double a_factor =
      std::exp(p.b() * u) / lambda2 + exp_integral(p.b(), u);
  const double g_corr = survival_correction(p, lambda2, u);
  return std::exp(-p.x / a_factor) * (1.0 - g_corr / (a_factor * a_factor));
}

double eve_laplace_given_survival(const QuadraticParams& p, double lambda2,
                                  double u, double t) {
  if (lambda2 < 0.0) {
    throw std::domain_error("eve_laplace_given_survival: lambda2 < 0");
  }
  if (!(0.0 <= u && u < t)) {
    throw std::domain_error("eve_laplace_given_survival: needs 0 <= u < t");
  }
  if (lambda2 == 0.0) return 1.0;
  if (u == 0.0) return std::exp(-p.x * lambda2);  // Y0_0 = x deterministic
  if (p.x == 0.0) return 1.0;

  const double b = p.b();
  const double g_t = exp_integral(p.alpha, t);
  // A = e^{bu}/l2 + g(b,u) is the t->inf limit of
  // B = e^{bu} R(t-u)^2 / l2 + int_0^u e^{bs} R(t-s)^2 ds,  R(r) = q(t)/q(r).
  const double a_factor = std::exp(b * u) / lambda2 + exp_integral(b, u);
  const double q_t = decay_integral(p.alpha, t);
  auto r_sq = [&](double r) {
    const double q_r = decay_integral(p.alpha, r);
    return (q_t / q_r) * (q_t / q_r);
  };
  const double b_factor =
      std::exp(b * u) * r_sq(t - u) / lambda2 +
      integrate([&](double s) { return std::exp(b * s) * r_sq(t - s); }, 0.0,
                u, quad_opts());
  // A - B assembled from R^2 - 1 directly: R(r)^2 - 1 =
  // (q(t)-q(r)) (q(t)+q(r)) / q(r)^2 with q(t)-q(r) = (e^{-ar}-e^{-at})/a,
  // which keeps full relative precision when R -> 1 at large t.
  auto r_sq_minus_one = [&](double r) {
    const double q_r = decay_integral(p.alpha, r);
    const double dq = p.alpha == 0.0
                          ? t - r
                          : (std::exp(-p.alpha * r) - std::exp(-p.alpha * t)) /
                                p.alpha;
    return dq * (q_t + q_r) / (q_r * q_r);
  };
  const double b_minus_a =
      std::exp(b * u) * r_sq_minus_one(t - u) / lambda2 +
      integrate([&](double s) { return std::exp(b * s) * r_sq_minus_one(t - s); },
                0.0, u, quad_opts());
  // bar_v1 - 1/A = 1/g(alpha,t) - (B - A)/(A B)
  const double d = 1.0 / g_t - b_minus_a / (a_factor * b_factor);
  // (E[e^{-l2 Y0_u}] - E[e^{-l2 Y0_u} 1{X_t=0}]) / P(X_t > 0)
  return std::exp(-p.x / a_factor) * std::expm1(-p.x * d) /
         std::expm1(-p.x / g_t);
}

}  // namespace cblab::quad

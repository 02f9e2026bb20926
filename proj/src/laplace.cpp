#include "cblab/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cblab/numerics.hpp"
#include "cblab/ode.hpp"

namespace cblab {

namespace {

void require_conservative(const BranchingMechanism& psi, const char* who) {
  if (!classify(psi).conservative) {
    throw std::domain_error(std::string(who) +
                            ": mechanism is not conservative");
  }
}

OdeOptions ode_opts(const SolverOptions& opt) {
  OdeOptions o;
  o.abs_tol = opt.ode_abs_tol;
  o.rel_tol = opt.ode_rel_tol;
  return o;
}

}  // namespace

double solve_u(const BranchingMechanism& psi, double t, double lambda,
               const SolverOptions& opt) {
  if (t < 0.0) throw std::domain_error("solve_u: t < 0");
  if (lambda < 0.0) throw std::domain_error("solve_u: lambda < 0");
  if (lambda == 0.0) return 0.0;
  if (t == 0.0) return lambda;
  require_conservative(psi, "solve_u");
  if (psi.value(lambda) == 0.0) return lambda;  // stationary point

  const OdeOptions oo = ode_opts(opt);
  double y = lambda;
  double elapsed = 0.0;
  if (y > 1e8) {
    // Flow in log space while the state is huge: v' = -psi(e^v) e^{-v}
    // grows only linearly in v, so no overflow before the state drops
    // into the plainly representable range.
    auto rhs = [&](double, const std::array<double, 1>& v) {
      // clamp away from the exp underflow (psi(u)/u -> psi'(0+) there)
      const double u = std::max(std::exp(v[0]), 1e-300);
      return std::array<double, 1>{-psi.value(u) / u};
    };
    std::array<double, 1> v{std::log(y)};
    const double v_target = std::log(1e8);
    const double chunk = t / 64.0;
    while (elapsed < t && v[0] > v_target) {
      const double step = std::min(chunk, t - elapsed);
      v = integrate_ode<1>(rhs, elapsed, elapsed + step, v, oo);
      elapsed += step;
    }
    y = std::exp(v[0]);
    if (elapsed >= t) return y;
  }
  auto rhs = [&](double, const std::array<double, 1>& u) {
    return std::array<double, 1>{-psi.value(std::max(u[0], 0.0))};
  };
  const auto out =
      integrate_ode<1>(rhs, elapsed, t, std::array<double, 1>{y}, oo);
  return std::max(out[0], 0.0);
}

double solve_u_inverse(const BranchingMechanism& psi, double t, double lambda,
                       const SolverOptions& opt) {
  (void)opt;
  if (!(lambda > 0.0)) throw std::domain_error("solve_u_inverse: lambda <= 0");
  if (t < 0.0) throw std::domain_error("solve_u_inverse: t < 0");
  if (t == 0.0) return lambda;
  const double psi_l = psi.value(lambda);
  if (psi_l == 0.0) return lambda;

  QuadratureOptions qo;
  qo.abs_tol = 1e-14;
  qo.rel_tol = 1e-12;
  auto time_to = [&](double v) {
    // int_v^lambda dr/psi(r), oriented so the result is the elapsed time.
    if (v < lambda) {
      return integrate([&](double r) { return 1.0 / psi.value(r); }, v,
                       lambda, qo);
    }
    return -integrate([&](double r) { return 1.0 / psi.value(r); }, lambda, v,
                      qo);
  };

  if (psi_l > 0.0) {
    // u decreases from lambda; the bracket floor is the nearest root of
    // psi below lambda (0 for critical and sub-critical mechanisms).
    double floor_v = 0.0;
    {
      double prev = lambda;
      for (double v = lambda / 2.0; v > 1e-300; v /= 2.0) {
        if (psi.value(v) <= 0.0) {
          floor_v =
              find_root([&](double r) { return psi.value(r); }, v, prev);
          break;
        }
        prev = v;
      }
    }
    // Halve the gap to the floor until the elapsed time covers t; the
    // time integral diverges at the floor for conservative mechanisms.
    double lo = 0.5 * (lambda + floor_v);
    for (int i = 0; time_to(lo) < t; ++i) {
      lo = floor_v + 0.5 * (lo - floor_v);
      if (i > 1100 || lo <= floor_v || lo < 1e-300) {
        throw std::domain_error(
            "solve_u_inverse: time integral saturates before t (fixed point "
            "in the bracket; method inapplicable)");
      }
    }
    return find_root([&](double v) { return time_to(v) - t; }, lo, lambda);
  }

  // psi(lambda) < 0: u increases toward the root of psi above lambda.
  double hi = lambda;
  double f_hi = psi_l;
  for (int i = 0; i < 400 && f_hi < 0.0; ++i) {
    hi *= 2.0;
    f_hi = psi.value(hi);
  }
  if (f_hi < 0.0) {
    throw std::domain_error("solve_u_inverse: no root of psi above lambda");
  }
  const double root =
      find_root([&](double r) { return psi.value(r); }, lambda, hi);
  double cand = 0.5 * (lambda + root);
  for (int i = 0; time_to(cand) < t; ++i) {
    cand = root - 0.5 * (root - cand);
    if (i > 200 || cand >= root) {
      throw std::domain_error(
          "solve_u_inverse: time integral saturates before t near the root");
    }
  }
  return find_root([&](double v) { return time_to(v) - t; }, lambda, cand);
}

namespace {

// Shared backward integrator of the w-equation family:
//   w(s) + int_s^H psi(w(r)) dr = mu([s, inf)) + int_s^H source(r) dr.
// Atoms are exact upward state jumps (right to left); between events the
// state follows dw/ds = psi(w) - density(s) - source(s). Every event gets
// a duplicated grid node so each Hermite segment carries the one-sided
// derivative of its own side.
GridFunction integrate_w_backward(
    const BranchingMechanism& psi, const FiniteMeasureOnR& mu, double s_stop,
    const std::function<double(double)>* source,
    const std::vector<double>& source_breaks, double source_hi,
    const SolverOptions& opt) {
  double big_h = mu.support_upper_bound();
  if (source != nullptr) big_h = std::max(big_h, source_hi);
  if (big_h == -kInf || s_stop > big_h) return GridFunction::zero_function();

  std::vector<double> events = mu.event_times_descending(s_stop, big_h);
  for (double b : source_breaks) {
    if (b > s_stop && b <= big_h) events.push_back(b);
  }
  std::sort(events.begin(), events.end(), std::greater<double>());
  events.erase(std::unique(events.begin(), events.end()), events.end());
  events.push_back(s_stop);

  auto rhs_value = [&](double s, double wv) {
    double d = mu.density_at(s);
    if (source != nullptr) d += (*source)(s);
    return psi.value(std::max(wv, 0.0)) - d;
  };
  auto rhs_above = [&](double s, double wv) {
    return rhs_value(std::nextafter(s, kInf), wv);
  };
  auto rhs_below = [&](double s, double wv) {
    return rhs_value(std::nextafter(s, -kInf), wv);
  };

  std::vector<GridFunction::Node> rev;  // descending s; reversed at the end
  double w = 0.0;
  double s_cur = big_h;

  // Right limit at the support top, then the top atom if present.
  rev.push_back({s_cur, 0.0, 0.0});
  w += mu.atom_mass_at(s_cur);
  rev.push_back({s_cur, w, rhs_below(s_cur, w)});

  const OdeOptions oo = ode_opts(opt);
  for (double s_next : events) {
    if (s_next >= s_cur) continue;
    // sigma = s_cur - s: dW/dsigma = density + source - psi(W).
    auto rhs = [&](double sigma, const std::array<double, 1>& y) {
      return std::array<double, 1>{-rhs_value(s_cur - sigma, y[0])};
    };
    std::function<void(const DenseStep<1>&)> obs = [&](const DenseStep<1>& d) {
      const int pieces =
          std::max(1, static_cast<int>(std::ceil(d.h / opt.dense_max_dt)));
      for (int i = 1; i <= pieces; ++i) {
        const double sig = d.t0 + d.h * i / pieces;
        const double s = s_cur - sig;
        if (!(s > s_next)) break;  // the event node is pushed explicitly
        const double wv = d.eval(sig)[0];
        rev.push_back({s, wv, rhs_value(s, wv)});
      }
    };
    const auto out = integrate_ode<1>(rhs, 0.0, s_cur - s_next,
                                      std::array<double, 1>{w}, oo, &obs);
    w = std::max(out[0], 0.0);
    s_cur = s_next;
    // End of the segment above the event (right limit) ...
    rev.push_back({s_cur, w, rhs_above(s_cur, w)});
    // ... then the left limit, including the atom's jump.
    w += mu.atom_mass_at(s_cur);
    rev.push_back({s_cur, w, rhs_below(s_cur, w)});
  }

  std::reverse(rev.begin(), rev.end());
  return GridFunction(std::move(rev), opt.contract_tol, true);
}

void check_w_preconditions(const BranchingMechanism& psi,
                           const FiniteMeasureOnR& mu, const char* who) {
  // Uniqueness check first: with psi'(0+) = -inf the equation is only
  // known to pin one solution when the measure has a top atom.
  if (psi.derivative_at_zero() == -kInf && !mu.is_zero() &&
      !mu.has_top_atom()) {
    throw std::domain_error(
        std::string(who) +
        ": psi'(0+) = -inf and no atom at the support top; the w-equation "
        "may have several solutions, input refused");
  }
  require_conservative(psi, who);
}

}  // namespace

WSolution solve_w(const BranchingMechanism& psi, const FiniteMeasureOnR& mu,
                  double s, const SolverOptions& opt) {
  check_w_preconditions(psi, mu, "solve_w");
  GridFunction w = integrate_w_backward(psi, mu, s, nullptr, {}, -kInf, opt);
  const double at_s = w.is_zero_function() ? 0.0 : w.eval_or_zero(s);
  return {std::move(w), at_s};
}

double cbi_laplace(const BranchingMechanism& psi,
                   const ImmigrationMechanism& phi, const GridFunction& h,
                   const FiniteMeasureOnR& mu, double x, double s,
                   const SolverOptions& opt) {
  if (x < 0.0) throw std::domain_error("cbi_laplace: x < 0");
  const WSolution sol = solve_w(psi, mu, s, opt);
  double exponent = x * sol.value_at_s;
  if (!phi.is_zero() && !sol.w.is_zero_function()) {
    exponent += sol.w.integrate(s, sol.w.back_s(), [&](double r, double wv) {
      const double hv = h.eval_or_zero(r - s);
      return hv == 0.0 ? 0.0 : hv * phi.value(std::max(wv, 0.0));
    });
  }
  return std::exp(-exponent);
}

std::vector<GridFunction> iterate_cascade(
    const BranchingMechanism& psi0, const ImmigrationMechanism& phi,
    const std::vector<FiniteMeasureOnR>& mus, double s,
    const SolverOptions& opt) {
  if (mus.empty()) throw std::invalid_argument("iterate_cascade: no measures");
  const int n = static_cast<int>(mus.size()) - 1;
  for (const auto& mu : mus) {
    check_w_preconditions(psi0, mu, "iterate_cascade");
  }

  std::vector<GridFunction> ws;
  ws.reserve(mus.size());
  ws.push_back(integrate_w_backward(psi0, mus[n], s, nullptr, {}, -kInf, opt));
  for (int k = 1; k <= n; ++k) {
    const GridFunction& prev = ws.back();
    std::function<double(double)> source = [&phi, &prev](double r) {
      const double wv = prev.eval_or_zero(r);
      return wv <= 0.0 ? 0.0 : phi.value(wv);
    };
    const std::vector<double> breaks = prev.jump_locations();
    const double src_hi = prev.is_zero_function() ? -kInf : prev.back_s();
    ws.push_back(integrate_w_backward(psi0, mus[n - k], s, &source, breaks,
                                      src_hi, opt));
  }
  return ws;
}

double cascade_gap(const std::vector<GridFunction>& ws) {
  if (ws.size() < 2) return 0.0;
  return ws[ws.size() - 1].sup_diff(ws[ws.size() - 2]);
}

JointExponent solve_joint_exponent(const BranchingMechanism& psi0,
                                   const ImmigrationMechanism& phi, double t,
                                   double lambda1, double lambda2,
                                   const SolverOptions& opt) {
  if (t < 0.0) throw std::domain_error("solve_joint_exponent: t < 0");
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw std::domain_error("solve_joint_exponent: negative lambda");
  }
  const BranchingMechanism psi = subtract_immigration(psi0, phi);
  require_conservative(psi, "solve_joint_exponent");
  if (t == 0.0) return {lambda1 + lambda2, lambda1};
  auto rhs = [&](double, const std::array<double, 2>& y) {
    return std::array<double, 2>{
        phi.value(std::max(y[1], 0.0)) - psi0.value(std::max(y[0], 0.0)),
        -psi.value(std::max(y[1], 0.0))};
  };
  const auto out = integrate_ode<2>(
      rhs, 0.0, t, std::array<double, 2>{lambda1 + lambda2, lambda1},
      ode_opts(opt));
  return {std::max(out[0], 0.0), std::max(out[1], 0.0)};
}

double solve_joint_exponent_two_time(const BranchingMechanism& psi0,
                                     const ImmigrationMechanism& phi, double u,
                                     double t, double lambda1, double lambda2,
                                     const SolverOptions& opt) {
  if (!(0.0 <= u && u < t)) {
    throw std::domain_error("solve_joint_exponent_two_time: needs 0 <= u < t");
  }
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw std::domain_error("solve_joint_exponent_two_time: negative lambda");
  }
  const BranchingMechanism psi = subtract_immigration(psi0, phi);
  require_conservative(psi, "solve_joint_exponent_two_time");
  const OdeOptions oo = ode_opts(opt);
  // The pair coincides on (u, t]: carry w* alone down to u first.
  auto rhs_star = [&](double, const std::array<double, 1>& y) {
    return std::array<double, 1>{-psi.value(std::max(y[0], 0.0))};
  };
  const auto star_at_u =
      integrate_ode<1>(rhs_star, 0.0, t - u, std::array<double, 1>{lambda1},
                       oo);
  auto rhs = [&](double, const std::array<double, 2>& y) {
    return std::array<double, 2>{
        phi.value(std::max(y[1], 0.0)) - psi0.value(std::max(y[0], 0.0)),
        -psi.value(std::max(y[1], 0.0))};
  };
  const auto out = integrate_ode<2>(
      rhs, 0.0, u, std::array<double, 2>{star_at_u[0] + lambda2, star_at_u[0]},
      oo);
  return std::max(out[0], 0.0);
}

double w_equation_residual(const BranchingMechanism& psi,
                           const GridFunction& w, const FiniteMeasureOnR& mu) {
  if (w.is_zero_function()) {
    if (mu.is_zero()) return 0.0;
    double worst = 0.0;
    for (double t : mu.event_times_descending(-1e308, kInf)) {
      worst = std::max(worst, mu.mass_from(t));
    }
    return worst;
  }
  const auto& nodes = w.nodes();
  const std::size_t n = nodes.size();
  std::vector<double> suffix(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    suffix[i] = suffix[i + 1] +
                w.integrate(nodes[i].s, nodes[i + 1].s, [&](double, double wv) {
                  return psi.value(std::max(wv, 0.0));
                });
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // A duplicated point's second entry is the right limit, where the
    // measure target is mu((s, inf)) instead of mu([s, inf)).
    const bool second_of_tie = i > 0 && nodes[i - 1].s == nodes[i].s;
    const double target = second_of_tie
                              ? mu.mass_strictly_after(nodes[i].s)
                              : mu.mass_from(nodes[i].s);
    worst = std::max(worst, std::fabs(nodes[i].value + suffix[i] - target));
  }
  return worst;
}

}  // namespace cblab

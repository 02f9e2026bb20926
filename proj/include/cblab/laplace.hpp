#pragma once

#include <optional>
#include <vector>

#include "cblab/grid_function.hpp"
#include "cblab/measure.hpp"
#include "cblab/mechanisms.hpp"

namespace cblab {

struct SolverOptions {
  // Local error control of the backward integrator. Tighter than the
  // 1e-10 contract tolerance so the accumulated global error and the
  // Hermite interpolation error stay inside the residual gate.
  double ode_abs_tol = 1e-12;
  double ode_rel_tol = 1e-12;
  // Reported contract tolerance (GridFunction::solver_tol).
  double contract_tol = 1e-10;
  // Dense-output node spacing cap.
  double dense_max_dt = 1.5e-3;
};

// u(t, lambda): unique nonnegative solution of
//   u(t) + int_0^t psi(u(s)) ds = lambda,
// by adaptive integration of du/dt = -psi(u) (log-space above 1e8 to keep
// large initial conditions representable). Requires conservative psi.
double solve_u(const BranchingMechanism& psi, double t, double lambda,
               const SolverOptions& opt = {});

// Same quantity through the equivalent form int_{u}^{lambda} dr/psi(r) = t,
// solved by quadrature plus root bracketing. Independent cross-check of
// solve_u; refuses configurations whose bracket would cross a root of psi.
double solve_u_inverse(const BranchingMechanism& psi, double t, double lambda,
                       const SolverOptions& opt = {});

struct WSolution {
  GridFunction w;       // on [s, H], vanishing beyond H
  double value_at_s;    // w(s)
};

// Backward solution of
//   w(s) + int_s^inf psi(w(r)) dr = mu([s, inf)),   w == 0 above H.
// Atoms enter as exact upward jumps, densities as source terms. Refuses
// the inputs where the equation's uniqueness is open (psi'(0+) = -inf
// without a top atom) and non-conservative mechanisms.
WSolution solve_w(const BranchingMechanism& psi, const FiniteMeasureOnR& mu,
                  double s, const SolverOptions& opt = {});

// E[exp(-int Y_{r-s} mu(dr))] for the CBI with branching mechanism psi,
// immigration mechanism phi and immigration intensity h(t), t >= 0:
//   exp(-x w(s) - int_0^inf h(t) phi(w(s+t)) dt),
// the integral truncating where w vanishes. h is taken as 0 outside its
// grid range.
double cbi_laplace(const BranchingMechanism& psi,
                   const ImmigrationMechanism& phi, const GridFunction& h,
                   const FiniteMeasureOnR& mu, double x, double s,
                   const SolverOptions& opt = {});

// Exponents (w_0 .. w_n) of the mutation-cascade joint Laplace functional:
// w_0 solves the w-equation for mus[n] under psi0; w_k solves it for
// mus[n-k] plus the source phi(w_{k-1}(r)) dr. The joint transform of
// (Y^0, ..., Y^n) is exp(-sum_k x_{n-k} w_k(s)).
std::vector<GridFunction> iterate_cascade(const BranchingMechanism& psi0,
                                          const ImmigrationMechanism& phi,
                                          const std::vector<FiniteMeasureOnR>& mus,
                                          double s,
                                          const SolverOptions& opt = {});

// sup-norm gap between consecutive iterates (convergence diagnostic).
double cascade_gap(const std::vector<GridFunction>& ws);

struct JointExponent {
  double w0;       // E[e^{-l1 X_t - l2 Y0_t}] = e^{-x w0}
  double wstar0;   // marginal exponent of X at t
};

// Coupled backward pair on [0, t]: w* under psi = psi0 - phi with terminal
// value l1; w under psi0 with terminal l1 + l2 and source phi(w*).
JointExponent solve_joint_exponent(const BranchingMechanism& psi0,
                                   const ImmigrationMechanism& phi, double t,
                                   double lambda1, double lambda2,
                                   const SolverOptions& opt = {});

// Two-time variant: E[e^{-l1 X_t - l2 Y0_u}] = e^{-x w(0)}, 0 <= u < t;
// w coincides with w* on (u, t] and jumps by l2 at u.
double solve_joint_exponent_two_time(const BranchingMechanism& psi0,
                                     const ImmigrationMechanism& phi, double u,
                                     double t, double lambda1, double lambda2,
                                     const SolverOptions& opt = {});

// max over grid nodes of |w(s) + int_s^H psi(w) dr - mu([s, inf))|.
double w_equation_residual(const BranchingMechanism& psi,
                           const GridFunction& w, const FiniteMeasureOnR& mu);

}  // namespace cblab

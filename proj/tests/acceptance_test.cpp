// Acceptance suite: runs every verification criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion. Exit code 0 iff
// everything passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "cblab/laplace.hpp"
#include "cblab/quadratic.hpp"
#include "cblab/verify.hpp"

using namespace cblab;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool pass,
            const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id,
              what.c_str(), detail.c_str());
  if (!pass) ++failures;
}

double seconds_since(
    const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

int n_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(8u, hw == 0 ? 1u : hw));
}

// 1. ODE vs closed form across the parameter grid, < 5 s.
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int count = 0;
  for (double alpha : {0.0, 0.5, 1.0}) {
    for (double theta : {0.25, 0.5}) {
      const quad::QuadraticParams p(alpha, theta, 1.0);
      for (double l1 : {0.5, 2.0}) {
        for (double l2 : {0.5, 2.0}) {
          for (double t : {0.5, 1.0, 2.0}) {
            const JointExponent j =
                solve_joint_exponent(p.psi0(), p.phi(), t, l1, l2);
            worst = std::max(
                worst, std::fabs(j.w0 - quad::joint_exponent(p, l1, l2, t)));
            const double two = solve_joint_exponent_two_time(
                p.psi0(), p.phi(), t / 2, t, l1, l2);
            worst = std::max(
                worst, std::fabs(two - quad::joint_exponent_two_time(
                                           p, l1, l2, t / 2, t)));
            ++count;
          }
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "max |ode - closed| = %.3g over %d configs, %.2f s", worst,
                count, secs);
  report(1, "ODE and closed-form joint exponents agree to 1e-6",
         worst <= 1e-6 && secs < 5.0, detail);
}

VerifyConfig acceptance_config() {
  VerifyConfig cfg;
  cfg.params = quad::QuadraticParams(0.5, 0.5, 1.0);
  cfg.grid = PathGrid(1.0 / 64, 68);  // horizon 1.0625 covers the bucket
  cfg.n_paths = 100000;
  cfg.n_types = 12;
  cfg.seed = 42;
  cfg.n_threads = n_threads();
  cfg.times = {1.0};
  cfg.lambdas = {1.0};
  cfg.lambda_pairs = {{1.0, 1.0}, {0.5, 2.0}};
  cfg.u_time = 0.5;
  cfg.t_time = 1.0;
  cfg.bucket_delta = 0.05;
  return cfg;
}

// 2. Total population is a CB with the combined mechanism.
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const VerifyConfig cfg = acceptance_config();
  const VerificationReport rep = verify_combined_law(cfg);
  const double secs = seconds_since(t0);
  double worst_z = 0.0;
  for (const auto& c : rep.checks) worst_z = std::max(worst_z, c.score);
  char detail[200];
  std::snprintf(detail, sizeof detail,
                "E[e^-X_1] vs %.6f, worst |z| = %.2f over %zu checks, %.1f s "
                "on %d threads",
                0.71218010770652346, worst_z, rep.checks.size(), secs,
                cfg.n_threads);
  report(2, "combined-mechanism law at N=1e5, dt=1/64", rep.pass() &&
             secs < 120.0,
         detail);
}

// 3. Joint laws at one and two times.
void criterion_3() {
  const VerifyConfig cfg = acceptance_config();
  const VerificationReport rep = verify_joint_law(cfg);
  double worst_z = 0.0, worst_abs = 0.0;
  for (const auto& c : rep.checks) {
    if (c.statistical) {
      worst_z = std::max(worst_z, c.score);
    } else {
      worst_abs = std::max(worst_abs, c.score);
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "worst |z| = %.2f, worst closed-vs-ode gap = %.2g", worst_z,
                worst_abs);
  report(3, "bivariate laws vs e^{-x v0}, e^{-x v1}", rep.pass(), detail);
}

// 4. Extinction laws including the bucketed simultaneous frequency. The
// bucket coincidence bias shrinks like sqrt(dt), so this run uses a finer
// grid than the Laplace-functional criteria.
void criterion_4() {
  VerifyConfig cfg = acceptance_config();
  cfg.grid = PathGrid(1.0 / 128, 136);
  const VerificationReport rep = verify_extinction_laws(cfg);
  double worst_z = 0.0;
  for (const auto& c : rep.checks) worst_z = std::max(worst_z, c.score);
  char detail[120];
  std::snprintf(detail, sizeof detail, "worst score = %.2f over %zu checks",
                worst_z, rep.checks.size());
  report(4, "extinction probabilities, joint CDF, simultaneous bucket",
         rep.pass(), detail);
}

// 5. Shift dualities and the law-level corollary.
void criterion_5() {
  VerifyConfig cfg = acceptance_config();
  cfg.n_paths = 50000;
  cfg.grid = PathGrid(1.0 / 64, 64);
  std::vector<double> grid;
  for (double lam = 0.1; lam <= 10.0; lam *= 1.25) grid.push_back(lam);
  grid.push_back(10.0);

  bool pass = true;
  double worst_alg = 0.0, worst_z = 0.0;
  {
    const quad::QuadraticParams p(0.5, 0.5, 1.0);
    VerifyConfig law_cfg = cfg;
    law_cfg.params = quad::QuadraticParams(0.5, 0.25, 1.0);
    const VerificationReport rep =
        verify_shift_identities(p.psi(), 0.25, grid, law_cfg);
    pass = pass && rep.pass();
    for (const auto& c : rep.checks) {
      if (c.statistical) {
        worst_z = std::max(worst_z, c.score);
      } else {
        worst_alg = std::max(worst_alg, c.score);
      }
    }
  }
  {
    const BranchingMechanism e(0.3, 0.5, LevyMeasure::exp_density(0.8, 2.0));
    const VerificationReport rep = verify_shift_identities(e, 1.0, grid, cfg);
    pass = pass && rep.pass();
    for (const auto& c : rep.checks) {
      if (!c.statistical) worst_alg = std::max(worst_alg, c.score);
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "max algebraic gap = %.2g (gate 1e-10), corollary worst |z| = "
                "%.2f",
                worst_alg, worst_z);
  report(5, "shift dualities (quadratic, exponential) and corollary law",
         pass, detail);
}

// 6. Deterministic property suites, < 30 s.
void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string why;

  // flow property of u
  {
    const BranchingMechanism psi(0.5, 1.0);
    double worst = 0.0;
    for (double s : {0.3, 0.7, 1.1}) {
      for (double t : {0.4, 1.0}) {
        for (double lam : {0.5, 1.0, 2.0}) {
          worst = std::max(worst,
                           std::fabs(solve_u(psi, s + t, lam) -
                                     solve_u(psi, t, solve_u(psi, s, lam))));
        }
      }
    }
    if (worst > 1e-8) {
      pass = false;
      why += " flow=" + std::to_string(worst);
    }
  }
  // monotone iteration with the 1e-6 gap at n = 30, plus residual gates
  {
    VerifyConfig cfg;
    cfg.params = quad::QuadraticParams(0.5, 0.5, 1.0);
    cfg.iteration_n = 30;
    cfg.iteration_gap_tol = 1e-6;
    const VerificationReport rep = verify_iteration_convergence(cfg);
    if (!rep.pass()) {
      pass = false;
      why += " iteration";
    }
    const BranchingMechanism psi0 = cfg.params.psi0();
    const FiniteMeasureOnR mu = FiniteMeasureOnR::single_atom(1.0, 1.0);
    const WSolution sol = solve_w(psi0, mu, 0.0);
    if (w_equation_residual(psi0, sol.w, mu) > 10.0 * sol.w.solver_tol()) {
      pass = false;
      why += " residual";
    }
    FiniteMeasureOnR rich;
    rich.add_atom(0.6, 0.9);
    rich.add_atom(1.3, 0.4);
    rich.add_density(0.1, 0.8, 0.5);
    const WSolution sol2 = solve_w(psi0, rich, -0.2);
    if (w_equation_residual(psi0, sol2.w, rich) > 10.0 * sol2.w.solver_tol()) {
      pass = false;
      why += " residual2";
    }
  }
  // quadratic branch continuity at alpha -> 0
  {
    const quad::QuadraticParams p0(0.0, 0.5, 1.0);
    const quad::QuadraticParams pa(1e-12, 0.5, 1.0);
    double worst = 0.0;
    worst = std::max(worst, std::fabs(quad::exp_integral(1e-12, 2.0) - 2.0));
    worst = std::max(worst,
                     std::fabs(quad::joint_exponent(p0, 1.0, 1.0, 1.0) -
                               quad::joint_exponent(pa, 1.0, 1.0, 1.0)));
    worst = std::max(
        worst, std::fabs(quad::eve_laplace_given_survival_limit(p0, 1.0, 1.0) -
                         quad::eve_laplace_given_survival_limit(pa, 1.0, 1.0)));
    if (worst > 1e-10) {
      pass = false;
      why += " branch=" + std::to_string(worst);
    }
  }
  // conditional-limit convergence at t = 50
  {
    VerifyConfig cfg;
    cfg.params = quad::QuadraticParams(0.5, 0.5, 1.0);
    const VerificationReport rep = verify_conditional_limit(cfg);
    if (!rep.pass()) {
      pass = false;
      why += " conditional";
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 30.0) {
    pass = false;
    why += " slow";
  }
  char detail[160];
  std::snprintf(detail, sizeof detail, "%.1f s%s", secs,
                why.empty() ? "" : (";" + why).c_str());
  report(6, "property suites (flow, iteration, residuals, branches, limit)",
         pass, detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  if (failures == 0) {
    std::printf("ACCEPTANCE: all 6 criteria pass\n");
    return 0;
  }
  std::printf("ACCEPTANCE: %d criterion(s) failing\n", failures);
  return 1;
}

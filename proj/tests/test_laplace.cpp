#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cblab/laplace.hpp"
#include "cblab/numerics.hpp"
#include "cblab/quadratic.hpp"
#include "cblab/rng.hpp"
#include "cblab/simulate.hpp"

using namespace cblab;

namespace {

const BranchingMechanism kSub(0.5, 1.0);        // 0.5 u + u^2
const BranchingMechanism kUnit(1.0, 1.0);       // u + u^2
const BranchingMechanism kSuper(-1.0, 1.0);     // -u + u^2, root at 1

}  // namespace

TEST_SUITE("laplace") {

TEST_CASE("solve_u basics and frozen quadratic value") {
  CHECK(solve_u(kSub, 1.0, 0.0) == 0.0);
  CHECK(solve_u(kSub, 0.0, 2.5) == 2.5);
  // e^{-1} / (2 - e^{-1})
  CHECK(solve_u(kUnit, 1.0, 1.0) ==
        doctest::Approx(0.22539967356056408).epsilon(1e-9));
  // stationary point of the super-critical mechanism
  CHECK(solve_u(kSuper, 3.0, 1.0) == 1.0);
  CHECK_THROWS_AS(solve_u(kSub, 1.0, -1.0), std::domain_error);
}

TEST_CASE("solve_u matches the closed quadratic cumulant") {
  for (double alpha : {0.0, 0.5, 1.0}) {
    const BranchingMechanism m(alpha, 1.0);
    for (double t : {0.25, 1.0, 2.0}) {
      for (double lam : {0.5, 1.0, 2.0}) {
        CHECK(std::fabs(solve_u(m, t, lam) - quad::cumulant(alpha, t, lam)) <
              1e-10);
      }
    }
  }
}

TEST_CASE("flow property and monotonicity") {
  for (double s : {0.3, 0.7, 1.1}) {
    for (double t : {0.4, 1.0}) {
      for (double lam : {0.5, 1.0, 2.0}) {
        const double direct = solve_u(kSub, s + t, lam);
        const double composed = solve_u(kSub, t, solve_u(kSub, s, lam));
        CHECK(std::fabs(direct - composed) <= 1e-8);
      }
    }
  }
  double prev = 0.0;
  for (double lam : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double u = solve_u(kSub, 1.0, lam);
    CHECK(u >= prev);
    CHECK(u <= lam);
    prev = u;
  }
  double prev_t = 10.0;
  for (double t : {0.1, 0.5, 1.0, 2.0}) {
    const double u = solve_u(kSub, t, 2.0);
    CHECK(u <= prev_t + 1e-12);
    prev_t = u;
  }
}

TEST_CASE("solve_u handles huge initial values through log space") {
  const double u = solve_u(kSub, 1.0, 1e12);
  // u(t, inf) = 1 / exp_integral-style bound; must be finite and close to
  // the lambda -> inf limit
  const double limit = 1.0 / quad::exp_integral(0.5, 1.0);  // beta = 1
  CHECK(std::isfinite(u));
  CHECK(u == doctest::Approx(limit).epsilon(1e-6));
}

TEST_CASE("solve_u_inverse cross-checks solve_u") {
  for (double t : {0.25, 1.0}) {
    for (double lam : {0.5, 1.0, 2.0}) {
      CHECK(std::fabs(solve_u_inverse(kSub, t, lam) - solve_u(kSub, t, lam)) <=
            1e-8);
    }
  }
  CHECK(solve_u_inverse(kSub, 0.0, 1.0) == 1.0);
  // super-critical, lambda below the root: u increases toward the root
  double prev = 0.5;
  for (double t : {0.5, 1.0, 2.0, 4.0}) {
    const double u = solve_u_inverse(kSuper, t, 0.5);
    CHECK(u > prev);
    CHECK(u < 1.0);
    CHECK(std::fabs(u - solve_u(kSuper, t, 0.5)) <= 1e-8);
    prev = u;
  }
  // super-critical above the root decreases toward it
  CHECK(solve_u_inverse(kSuper, 1.0, 2.0) ==
        doctest::Approx(solve_u(kSuper, 1.0, 2.0)).epsilon(1e-8));
}

TEST_CASE("non-conservative mechanisms are refused") {
  const BranchingMechanism heavy = subtract_immigration(
      kSub, ImmigrationMechanism(0.0, LevyMeasure::stable_density(0.7, 0.5)));
  CHECK_THROWS_AS(solve_u(heavy, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_WITH_AS(
      solve_w(heavy, FiniteMeasureOnR::single_atom(1.0, 0.5), 0.0),
      doctest::Contains("not conservative"), std::domain_error);
  // without a top atom the uniqueness guard fires first
  FiniteMeasureOnR no_top;
  no_top.add_density(0.0, 1.0, 1.0);
  CHECK_THROWS_WITH_AS(solve_w(heavy, no_top, 0.0),
                       doctest::Contains("several solutions"),
                       std::domain_error);
}

TEST_CASE("solve_w: single atom reduces to solve_u") {
  const FiniteMeasureOnR mu = FiniteMeasureOnR::single_atom(1.0, 1.3);
  const WSolution sol = solve_w(kSub, mu, -0.5);
  for (double s : {-0.5, -0.2, 0.0, 0.4, 0.9}) {
    CHECK(std::fabs(sol.w.eval(s) - solve_u(kSub, 1.0 - s, 1.3)) < 1e-9);
  }
  CHECK(sol.w.eval(1.0) == doctest::Approx(1.3).epsilon(1e-12));  // left limit
  CHECK(sol.w.eval(1.7) == 0.0);  // beyond the support
  CHECK(sol.value_at_s == doctest::Approx(solve_u(kSub, 1.5, 1.3)).epsilon(1e-9));
}

TEST_CASE("solve_w: zero measure and two-atom composition") {
  const WSolution zero = solve_w(kSub, FiniteMeasureOnR::zero(), 0.0);
  CHECK(zero.value_at_s == 0.0);
  CHECK(zero.w.is_zero_function());

  // querying above the support: w vanishes there
  const WSolution above =
      solve_w(kSub, FiniteMeasureOnR::single_atom(1.0, 1.0), 2.0);
  CHECK(above.value_at_s == 0.0);

  // mu = l1 d_{t1} + l2 d_{t2}: w(0) = u(t1, l1 + u(t2-t1, l2))
  FiniteMeasureOnR mu;
  mu.add_atom(0.5, 0.8);
  mu.add_atom(1.2, 1.5);
  const WSolution sol = solve_w(kSub, mu, 0.0);
  CHECK(sol.value_at_s ==
        doctest::Approx(0.66143996620984818).epsilon(1e-9));
  // markov composition at intermediate points too
  CHECK(sol.w.eval(0.7) ==
        doctest::Approx(solve_u(kSub, 0.5, 1.5)).epsilon(1e-9));
}

TEST_CASE("solve_w residuals stay within the contract") {
  FiniteMeasureOnR mu;
  mu.add_atom(0.5, 0.8);
  mu.add_atom(1.2, 1.5);
  mu.add_density(0.2, 0.9, 0.6);
  const WSolution sol = solve_w(kSub, mu, -0.3);
  CHECK(w_equation_residual(kSub, sol.w, mu) <= 10.0 * sol.w.solver_tol());

  // corrupting the solution by 0.1 must show up in the residual
  std::vector<GridFunction::Node> nodes = sol.w.nodes();
  for (auto& n : nodes) n.value += 0.1;
  const GridFunction bad(std::move(nodes), sol.w.solver_tol(), true);
  CHECK(w_equation_residual(kSub, bad, mu) >= 0.099);

  CHECK(w_equation_residual(kSub, GridFunction::zero_function(),
                            FiniteMeasureOnR::zero()) == 0.0);
}

TEST_CASE("cbi_laplace trivial immigration cases") {
  const FiniteMeasureOnR mu = FiniteMeasureOnR::single_atom(1.0, 1.0);
  const GridFunction h_zero = GridFunction::constant(0.0, 0.0, 2.0);
  const GridFunction h_one = GridFunction::constant(1.0, 0.0, 2.0);
  const double plain = std::exp(-2.0 * solve_u(kSub, 1.0, 1.0));
  CHECK(cbi_laplace(kSub, ImmigrationMechanism(0.8), h_zero, mu, 2.0, 0.0) ==
        doctest::Approx(plain).epsilon(1e-10));
  CHECK(cbi_laplace(kSub, ImmigrationMechanism::zero(), h_one, mu, 2.0, 0.0) ==
        doctest::Approx(plain).epsilon(1e-10));
}

TEST_CASE("cbi_laplace matches a simulated constant-rate CBI") {
  // quadratic psi, phi = abar * lambda, h == 1: exact transition is a CB
  // step plus an independent Gamma(abar/beta, beta e^{-a dt} g(a, dt)).
  const double alpha = 0.5, beta = 1.0, abar = 0.8, x = 1.0, lam = 1.0;
  const double t = 1.0;
  const ImmigrationMechanism phi(abar);
  const FiniteMeasureOnR mu = FiniteMeasureOnR::single_atom(t, lam);
  const GridFunction h_one = GridFunction::constant(1.0, 0.0, 2.0);
  const double theory =
      cbi_laplace(kSub, phi, h_one, mu, x, 0.0);

  const int n_steps = 64;
  const double dt = t / n_steps;
  const double g = quad::exp_integral(alpha, dt);
  const double scale = beta * std::exp(-alpha * dt) * g;
  RngSpec spec{20260810};
  std::vector<double> vals;
  const long long n_paths = 40000;
  for (long long p = 0; p < n_paths; ++p) {
    RngStream rng = spec.stream(p);
    double y = x;
    for (int i = 0; i < n_steps; ++i) {
      const long long n = y > 0.0 ? rng.poisson(y / (beta * g)) : 0;
      const double shape = static_cast<double>(n) + abar / beta;
      y = rng.gamma(shape, scale);
    }
    vals.push_back(std::exp(-lam * y));
  }
  const MCEstimate est = estimate_from(vals);
  CHECK(std::fabs(est.mean - theory) <= 3.0 * est.stderr_val);
}

TEST_CASE("iterate_cascade: decoupled when phi is zero") {
  const FiniteMeasureOnR mu = FiniteMeasureOnR::single_atom(1.0, 1.0);
  const std::vector<FiniteMeasureOnR> mus(4, mu);
  const auto ws =
      iterate_cascade(kSub, ImmigrationMechanism::zero(), mus, 0.0);
  const WSolution direct = solve_w(kSub, mu, 0.0);
  for (const auto& w : ws) {
    CHECK(w.sup_diff(direct.w) < 1e-10);
  }
}

TEST_CASE("iterate_cascade: monotone, bounded, convergent") {
  const BranchingMechanism psi0(1.5, 1.0);
  const ImmigrationMechanism phi(1.0);  // 2 theta, theta = 0.5
  const BranchingMechanism psi = subtract_immigration(psi0, phi);
  const FiniteMeasureOnR mu = FiniteMeasureOnR::single_atom(1.0, 1.0);
  const std::vector<FiniteMeasureOnR> mus(16, mu);
  const auto ws = iterate_cascade(psi0, phi, mus, 0.0);
  const WSolution bound = solve_w(psi, mu, 0.0);
  for (std::size_t k = 1; k < ws.size(); ++k) {
    CHECK(ws[k - 1].sup_excess_over(ws[k]) <= 1e-9);
  }
  for (const auto& w : ws) {
    CHECK(w.sup_excess_over(bound.w) <= 1e-9);
  }
  CHECK(ws.back().sup_diff(bound.w) <= 1e-6);
  CHECK(cascade_gap(ws) <= 1e-8);
}

TEST_CASE("iterate_cascade: the joint-law measures converge to v0") {
  // mu_0 = (l1+l2) delta_t, mu_k = l1 delta_t for k >= 1: the top iterate
  // at s = 0 approaches the one-time joint exponent of the quadratic law.
  const quad::QuadraticParams p(0.5, 0.5, 1.0);
  const double l1 = 1.0, l2 = 1.0, t = 1.0;
  std::vector<FiniteMeasureOnR> mus(31, FiniteMeasureOnR::single_atom(t, l1));
  mus[0] = FiniteMeasureOnR::single_atom(t, l1 + l2);
  const auto ws = iterate_cascade(p.psi0(), p.phi(), mus, 0.0);
  CHECK(std::fabs(ws.back().eval(0.0) -
                  quad::joint_exponent(p, l1, l2, t)) < 1e-6);
}

TEST_CASE("joint exponent: degenerate reductions") {
  const BranchingMechanism psi0(1.5, 1.0);
  const ImmigrationMechanism phi(1.0);
  const BranchingMechanism psi = subtract_immigration(psi0, phi);
  // lambda2 = 0: both components equal the X marginal under psi
  const JointExponent j0 = solve_joint_exponent(psi0, phi, 1.0, 1.0, 0.0);
  CHECK(j0.w0 == doctest::Approx(solve_u(psi, 1.0, 1.0)).epsilon(1e-10));
  CHECK(j0.wstar0 == doctest::Approx(solve_u(psi, 1.0, 1.0)).epsilon(1e-10));
  // phi = 0: X = Y0, exponent solves under psi0 with lambda1 + lambda2
  const JointExponent jz = solve_joint_exponent(
      psi0, ImmigrationMechanism::zero(), 1.0, 0.7, 0.3);
  CHECK(jz.w0 == doctest::Approx(solve_u(psi0, 1.0, 1.0)).epsilon(1e-10));
  // t = 0
  const JointExponent jt = solve_joint_exponent(psi0, phi, 0.0, 0.7, 0.3);
  CHECK(jt.w0 == 1.0);
}

TEST_CASE("joint exponent matches the quadratic closed form") {
  const quad::QuadraticParams p(0.5, 0.5, 1.0);
  const JointExponent j =
      solve_joint_exponent(p.psi0(), p.phi(), 1.0, 1.0, 1.0);
  CHECK(std::fabs(j.w0 - quad::joint_exponent(p, 1.0, 1.0, 1.0)) <= 1e-6);
  CHECK(std::fabs(j.w0 - 0.39248908455794144) <= 1e-8);

  const double w2 =
      solve_joint_exponent_two_time(p.psi0(), p.phi(), 0.5, 1.0, 1.0, 1.0);
  CHECK(std::fabs(w2 - quad::joint_exponent_two_time(p, 1.0, 1.0, 0.5, 1.0)) <=
        1e-6);
  CHECK(std::fabs(w2 - 0.57820144039072971) <= 1e-8);
}

TEST_CASE("two-time exponent: continuity and marginal reduction") {
  const quad::QuadraticParams p(0.5, 0.5, 1.0);
  const JointExponent pair =
      solve_joint_exponent(p.psi0(), p.phi(), 1.0, 1.0, 1.0);
  const double near =
      solve_joint_exponent_two_time(p.psi0(), p.phi(), 1.0 - 1e-5, 1.0, 1.0,
                                    1.0);
  CHECK(std::fabs(near - pair.w0) < 1e-3);
  const double marg =
      solve_joint_exponent_two_time(p.psi0(), p.phi(), 0.5, 1.0, 1.0, 0.0);
  CHECK(marg == doctest::Approx(
                    solve_u(subtract_immigration(p.psi0(), p.phi()), 1.0, 1.0))
                    .epsilon(1e-10));
  CHECK_THROWS_AS(
      solve_joint_exponent_two_time(p.psi0(), p.phi(), 1.0, 1.0, 1.0, 1.0),
      std::domain_error);
}

TEST_CASE("grid functions serialize to s,value csv") {
  const FiniteMeasureOnR mu = FiniteMeasureOnR::single_atom(0.25, 1.0);
  const WSolution sol = solve_w(kSub, mu, 0.0);
  std::ostringstream os;
  sol.w.write_csv(os);
  const std::string text = os.str();
  CHECK(text.rfind("s,value\n", 0) == 0);
  CHECK(text.find(",") != std::string::npos);
}

}  // TEST_SUITE

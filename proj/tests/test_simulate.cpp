#include <doctest.h>
#include <stdexcept>

#include <cmath>

#include "cblab/laplace.hpp"
#include "cblab/quadratic.hpp"
#include "cblab/simulate.hpp"
#include "test_helpers.hpp"

using namespace cblab;
using cblab::testing::z_score;

namespace {

quad::QuadraticParams default_params() { return {0.5, 0.5, 1.0}; }

CascadeParams small_cascade(long long n_paths, int n_threads = 1) {
  const auto p = default_params();
  return CascadeParams{p.psi0(),   p.phi(),           p.x,
                       PathGrid(1.0 / 32, 40), 8,     SchemeSpec{},
                       RngSpec{777},            n_paths, n_threads};
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("quadratic transition: absorbing zero and exact laws") {
  RngStream rng(11, 0);
  CHECK(quadratic_cb_step(0.5, 0.0, 1.0, rng) == 0.0);
  CHECK_THROWS_AS(quadratic_cb_step(0.5, -1.0, 1.0, rng), std::domain_error);

  const long long n = 100000;
  // P(Z_1 = 0 | Z_0 = 1) = e^{-1/g(0,1)} = e^{-1}
  long long zeros = 0;
  for (long long i = 0; i < n; ++i) {
    zeros += quadratic_cb_step(0.0, 1.0, 1.0, rng) == 0.0;
  }
  CHECK(z_score(double(zeros) / n, std::exp(-1.0), n) < 3.0);

  // mean decays like x e^{-alpha t}
  std::vector<double> draws(n);
  for (auto& d : draws) d = quadratic_cb_step(0.5, 1.0, 1.0, rng);
  const MCEstimate mean = estimate_from(draws);
  CHECK(z_score(mean, std::exp(-0.5)) < 3.0);

  // full transition law via the Laplace transform at an arbitrary point:
  // E[e^{-lam Z_dt}] = e^{-x u(dt, lam)}
  const double lam = 1.3, alpha = 0.7, dt = 0.6, x = 1.4;
  for (auto& d : draws) {
    d = std::exp(-lam * quadratic_cb_step(alpha, x, dt, rng));
  }
  const MCEstimate lap = estimate_from(draws);
  CHECK(z_score(lap, std::exp(-x * quad::cumulant(alpha, dt, lam))) < 3.0);
}

TEST_CASE("cb path: zero start, absorption, closed-form law") {
  const PathGrid grid(1.0 / 32, 32);
  const BranchingMechanism psi(0.5, 1.0);
  RngStream rng(12, 0);
  const auto zero_path =
      simulate_cb_path(psi, 0.0, grid, SchemeSpec{}, rng);
  for (double v : zero_path) CHECK(v == 0.0);

  const long long n = 30000;
  std::vector<double> laps(n);
  bool absorbed_ok = true;
  for (long long p = 0; p < n; ++p) {
    RngStream r(12, 1000 + p);
    const auto path = simulate_cb_path(psi, 1.0, grid, SchemeSpec{}, r);
    bool dead = false;
    for (double v : path) {
      if (dead && v != 0.0) absorbed_ok = false;
      dead = dead || v == 0.0;
    }
    laps[p] = std::exp(-path.back());
  }
  CHECK(absorbed_ok);
  const MCEstimate est = estimate_from(laps);
  CHECK(z_score(est, std::exp(-quad::cumulant(0.5, 1.0, 1.0))) < 3.0);
}

TEST_CASE("euler scheme is consistent with the exact scheme") {
  const BranchingMechanism psi(0.5, 1.0);
  const PathGrid grid(1e-3, 500);  // t = 0.5
  const long long n = 20000;
  std::vector<double> euler(n), exact(n);
  for (long long p = 0; p < n; ++p) {
    RngStream r1(13, p), r2(14, p);
    SchemeSpec eu;
    eu.kind = Scheme::EulerDiffusion;
    euler[p] = std::exp(-simulate_cb_path(psi, 1.0, grid, eu, r1).back());
    exact[p] = std::exp(-simulate_cb_path(psi, 1.0, grid, SchemeSpec{}, r2).back());
  }
  const MCEstimate a = estimate_from(euler), b = estimate_from(exact);
  const double se = std::sqrt(a.stderr_val * a.stderr_val +
                              b.stderr_val * b.stderr_val);
  CHECK(std::fabs(a.mean - b.mean) / se < 4.0);
}

TEST_CASE("euler scheme with a jump part stays near the exact u") {
  // psi with an exponential jump component; weak O(dt) bias at dt = 1e-3
  // should sit well inside 4 combined standard errors at this sample size.
  const BranchingMechanism psi(0.3, 0.5,
                               LevyMeasure::exp_density(0.8, 2.0));
  const PathGrid grid(1e-3, 400);
  SchemeSpec eu;
  eu.kind = Scheme::EulerDiffusion;
  const long long n = 20000;
  std::vector<double> laps(n);
  for (long long p = 0; p < n; ++p) {
    RngStream r(15, p);
    laps[p] = std::exp(-simulate_cb_path(psi, 1.0, grid, eu, r).back());
  }
  const MCEstimate est = estimate_from(laps);
  const double theory = std::exp(-solve_u(psi, 0.4, 1.0));
  CHECK(z_score(est, theory) < 4.0);
}

TEST_CASE("galton-watson scheme matches the quadratic law") {
  const BranchingMechanism psi(0.5, 1.0);
  const PathGrid grid(1.0 / 32, 32);
  SchemeSpec gw;
  gw.kind = Scheme::GaltonWatson;
  gw.gw_levels = 4000;
  const long long n = 20000;
  std::vector<double> laps(n);
  for (long long p = 0; p < n; ++p) {
    RngStream r(16, p);
    laps[p] = std::exp(-simulate_cb_path(psi, 1.0, grid, gw, r).back());
  }
  const MCEstimate est = estimate_from(laps);
  CHECK(z_score(est, std::exp(-quad::cumulant(0.5, 1.0, 1.0))) < 4.0);

  // incompatible mechanism refused
  RngStream r(16, 0);
  CHECK_THROWS_AS(
      simulate_cb_path(BranchingMechanism(
                           0.1, 1.0, LevyMeasure::single_atom(1.0, 1.0)),
                       1.0, grid, gw, r),
      std::invalid_argument);
}

TEST_CASE("branching property of the exact scheme") {
  // a run from x1 + x2 is distributed as the sum of independent runs
  const PathGrid grid(1.0 / 16, 16);
  const BranchingMechanism psi(0.5, 1.0);
  const long long n = 40000;
  std::vector<double> joint(n), split(n);
  for (long long p = 0; p < n; ++p) {
    RngStream r1(17, p), r2(18, p), r3(19, p);
    joint[p] =
        std::exp(-simulate_cb_path(psi, 1.5, grid, SchemeSpec{}, r1).back());
    split[p] =
        std::exp(-simulate_cb_path(psi, 0.7, grid, SchemeSpec{}, r2).back() -
                 simulate_cb_path(psi, 0.8, grid, SchemeSpec{}, r3).back());
  }
  const MCEstimate a = estimate_from(joint), b = estimate_from(split);
  const double se = std::sqrt(a.stderr_val * a.stderr_val +
                              b.stderr_val * b.stderr_val);
  CHECK(std::fabs(a.mean - b.mean) / se < 4.0);
}

TEST_CASE("cascade: zero immigration leaves only the eve population") {
  auto params = small_cascade(200);
  params.phi = ImmigrationMechanism::zero();
  const PathEnsemble ens = simulate_mutation_cascade(params, true);
  for (long long p = 0; p < ens.n_paths(); ++p) {
    for (int i = 0; i < ens.grid().n_times(); ++i) {
      CHECK(ens.x_at(p, i) == ens.y0_at(p, i));
      for (int k = 1; k <= ens.n_types(); ++k) {
        CHECK(ens.y_at(p, k, i) == 0.0);
      }
    }
  }
}

TEST_CASE("cascade invariants: nonnegativity, additivity, ordering") {
  const PathEnsemble ens = simulate_mutation_cascade(small_cascade(500), true);
  for (long long p = 0; p < ens.n_paths(); ++p) {
    for (int i = 0; i < ens.grid().n_times(); ++i) {
      double sum = 0.0;
      for (int k = 0; k <= ens.n_types(); ++k) {
        CHECK(ens.y_at(p, k, i) >= 0.0);
        sum += ens.y_at(p, k, i);
      }
      CHECK(ens.x_at(p, i) == sum);  // exact, same summation order
    }
  }
  for (const auto& taus : extinction_times(ens, 0.0)) {
    CHECK(taus.tau_y0 <= taus.tau_x);
  }
}

TEST_CASE("cascade determinism is independent of the thread count") {
  const PathEnsemble a = simulate_mutation_cascade(small_cascade(600, 1), true);
  const PathEnsemble b = simulate_mutation_cascade(small_cascade(600, 4), true);
  bool identical = true;
  for (long long p = 0; p < a.n_paths() && identical; ++p) {
    for (int i = 0; i < a.grid().n_times(); ++i) {
      identical &= a.x_at(p, i) == b.x_at(p, i);
      identical &= a.y0_at(p, i) == b.y0_at(p, i);
    }
  }
  CHECK(identical);
  // means reduce identically too
  CHECK(a.tail_type_mean() == b.tail_type_mean());
  CHECK(a.x_mean() == b.x_mean());
}

TEST_CASE("cascade total mass has the combined-mechanism mean") {
  // theorem-level moment check: E[X_t] = x e^{-alpha t}
  auto params = small_cascade(40000, 2);
  params.n_types = 12;
  const PathEnsemble ens = simulate_mutation_cascade(params, false);
  const int it = ens.grid().index_of(1.0);
  std::vector<double> xs(ens.n_paths());
  for (long long p = 0; p < ens.n_paths(); ++p) xs[p] = ens.x_at(p, it);
  const MCEstimate est = estimate_from(xs);
  CHECK(z_score(est, std::exp(-0.5)) < 3.0);

  // truncation diagnostic: the last generation carries negligible mass
  double worst = 0.0;
  for (int i = 0; i < ens.grid().n_times(); ++i) {
    worst = std::max(worst, ens.tail_type_mean()[i]);
  }
  CHECK(worst <= 1e-3 * std::exp(-0.5));
}

TEST_CASE("cascade rejects non-conservative combinations") {
  auto params = small_cascade(10);
  params.phi =
      ImmigrationMechanism(0.0, LevyMeasure::stable_density(0.7, 0.5));
  params.scheme.kind = Scheme::EulerDiffusion;
  CHECK_THROWS_AS(simulate_mutation_cascade(params, false),
                  std::domain_error);
}

TEST_CASE("mc_laplace basics") {
  auto params = small_cascade(100);
  params.x0 = 0.0;  // empty population
  const PathEnsemble ens = simulate_mutation_cascade(params, false);
  const MCEstimate one = mc_laplace(ens, {1.0, 0.5, 1.0, 0.5});
  CHECK(one.mean == 1.0);
  CHECK(one.stderr_val == 0.0);
  const PathEnsemble live = simulate_mutation_cascade(small_cascade(100), false);
  const MCEstimate zero_lambda = mc_laplace(live, {0.0, 0.0, 1.0, 1.0});
  CHECK(zero_lambda.mean == 1.0);
  CHECK(zero_lambda.stderr_val == 0.0);
  CHECK_THROWS_AS(mc_laplace(live, {1.0, 0.0, 0.33, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("extinction times: empty paths and empirical law") {
  {
    auto params = small_cascade(16);
    params.x0 = 0.0;
    const PathEnsemble ens = simulate_mutation_cascade(params, false);
    for (const auto& taus : extinction_times(ens, 0.0)) {
      CHECK(taus.tau_x == 0.0);
      CHECK(taus.tau_y0 == 0.0);
    }
  }
  {
    // P(tau_X <= 1) = P(X_1 = 0) = e^{-x/g(alpha,1)} with alpha = 0
    quad::QuadraticParams p(0.0, 0.5, 1.0);
    CascadeParams params{p.psi0(),  p.phi(), p.x, PathGrid(1.0 / 64, 64),
                         10,        SchemeSpec{},  RngSpec{555},
                         30000,     2};
    const PathEnsemble ens = simulate_mutation_cascade(params, false);
    long long hits = 0;
    for (const auto& taus : extinction_times(ens, 0.0)) {
      hits += taus.tau_x <= 1.0;
    }
    CHECK(z_score(double(hits) / ens.n_paths(), std::exp(-1.0),
                  ens.n_paths()) < 4.0);
  }
}

TEST_CASE("vanishing mutation intensity makes extinction simultaneous") {
  // theta -> 0: the whole population is the eve population, so the two
  // extinction times coincide on every path
  quad::QuadraticParams p(0.0, 1e-8, 1.0);
  CascadeParams params{p.psi0(),  p.phi(), p.x, PathGrid(1.0 / 16, 32),
                       4,         SchemeSpec{},  RngSpec{31337},
                       2000,      2};
  const PathEnsemble ens = simulate_mutation_cascade(params, false);
  long long simultaneous = 0, extinct = 0;
  for (const auto& taus : extinction_times(ens, 0.0)) {
    if (std::isfinite(taus.tau_x)) {
      ++extinct;
      simultaneous += taus.tau_y0 == taus.tau_x;
    }
  }
  CHECK(extinct > 1000);
  CHECK(simultaneous == extinct);
}

TEST_CASE("grid index lookup") {
  const PathGrid grid(1.0 / 64, 128);
  CHECK(grid.index_of(0.5) == 32);
  CHECK(grid.index_of(2.0) == 128);
  CHECK_THROWS_AS(grid.index_of(0.33), std::invalid_argument);
  CHECK_THROWS_AS(grid.index_of(3.0), std::invalid_argument);
}

}  // TEST_SUITE

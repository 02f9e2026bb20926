#include <doctest.h>

#include <array>
#include <cmath>

#include "cblab/numerics.hpp"
#include "cblab/ode.hpp"

using namespace cblab;

TEST_SUITE("numerics") {

TEST_CASE("gauss-kronrod hits smooth integrals to near machine precision") {
  CHECK(std::fabs(integrate([](double x) { return x * x * x; }, 0, 1) -
                  0.25) < 1e-14);
  CHECK(std::fabs(integrate([](double x) { return std::sin(x); }, 0,
                            3.14159265358979323846) -
                  2.0) < 1e-13);
  CHECK(std::fabs(integrate([](double x) { return std::exp(x); }, 0, 1) -
                  (std::exp(1.0) - 1.0)) < 1e-13);
  // steep integrand forces subdivision
  CHECK(std::fabs(integrate([](double x) { return 1.0 / (1e-4 + x * x); }, -1,
                            1) -
                  2.0 / 1e-2 * std::atan(1.0 / 1e-2)) < 1e-9);
}

TEST_CASE("semi-infinite transform") {
  CHECK(std::fabs(integrate_to_inf([](double x) { return std::exp(-x); }, 0) -
                  1.0) < 1e-12);
  CHECK(std::fabs(integrate_to_inf([](double x) { return 1.0 / (x * x); }, 1) -
                  1.0) < 1e-12);
}

TEST_CASE("capped divergence probe") {
  // int_{1e-12}^1 du/u = ln(1e12) ~ 27.6: finite, below the cap
  const double finite =
      integrate_capped([](double u) { return 1.0 / u; }, 1e-12, 1.0, 1e3);
  CHECK(std::fabs(finite - std::log(1e12)) < 1e-6);
  // int du/u^2 blows up: must stop above the cap, not hang
  const double diverging =
      integrate_capped([](double u) { return 1.0 / (u * u); }, 1e-12, 1.0, 1e3);
  CHECK(diverging > 1e3);
}

TEST_CASE("bracketed root solve") {
  const double r =
      find_root([](double x) { return std::cos(x); }, 0.0, 3.0);
  CHECK(std::fabs(r - 1.57079632679489662) < 1e-12);
  const double c =
      find_root([](double x) { return x * x * x - 2.0; }, 0.0, 2.0);
  CHECK(std::fabs(c - std::cbrt(2.0)) < 1e-12);
  CHECK_THROWS_AS(find_root([](double x) { return 1.0 + x * x; }, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("compensated exponential kernels") {
  // exp_compensated = e^{-x} - 1 + x, branch continuity at the series cut
  for (double x : {1e-6, 9.9e-5, 1.01e-4, 0.5, 3.0}) {
    const double direct = std::expm1(-x) + x;
    CHECK(std::fabs(exp_compensated(x) - direct) <= 1e-18 + 1e-12 * direct);
  }
  // first_moment_exp_kernel vs direct quadrature
  for (double r : {1e-6, 1e-3, 0.5, 3.0, 20.0}) {
    const double q =
        integrate([&](double l) { return l * std::exp(-r * l); }, 0, 1);
    CHECK(std::fabs(first_moment_exp_kernel(r) - q) < 1e-12);
  }
}

TEST_CASE("dormand-prince integrates linear decay") {
  auto rhs = [](double, const std::array<double, 1>& y) {
    return std::array<double, 1>{-y[0]};
  };
  const auto out = integrate_ode<1>(rhs, 0.0, 1.0, {1.0});
  CHECK(std::fabs(out[0] - std::exp(-1.0)) < 1e-10);
}

TEST_CASE("dormand-prince dense output matches the riccati closed form") {
  // y' = -(y + y^2), y(0)=1 has y(t) = e^{-t} / (1 + (1 - e^{-t}))
  auto rhs = [](double, const std::array<double, 1>& y) {
    return std::array<double, 1>{-(y[0] + y[0] * y[0])};
  };
  auto closed = [](double t) {
    return std::exp(-t) / (2.0 - std::exp(-t));
  };
  double worst = 0.0;
  std::function<void(const DenseStep<1>&)> obs = [&](const DenseStep<1>& d) {
    for (int i = 1; i < 8; ++i) {
      const double t = d.t0 + d.h * i / 8.0;
      worst = std::max(worst, std::fabs(d.eval(t)[0] - closed(t)));
    }
  };
  const auto out = integrate_ode<1>(rhs, 0.0, 2.0, {1.0}, {}, &obs);
  CHECK(std::fabs(out[0] - closed(2.0)) < 1e-10);
  CHECK(worst < 1e-9);
}

TEST_CASE("blow-up reports the failure time") {
  auto rhs = [](double, const std::array<double, 1>& y) {
    return std::array<double, 1>{y[0] * y[0]};  // explodes at t = 1
  };
  try {
    integrate_ode<1>(rhs, 0.0, 2.0, {1.0});
    CHECK(false);
  } catch (const SolverFailure& e) {
    CHECK(e.time > 0.9);
    CHECK(e.time < 1.1);
  }
}

}  // TEST_SUITE

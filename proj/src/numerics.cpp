#include "cblab/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace cblab {

namespace {

// QUADPACK 7-15 Gauss-Kronrod pair. Abscissae are for [-1, 1]; even
// entries belong to the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelResult {
  double value;
  double error;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double res_g = fc * kWg[3];
  double res_k = fc * kWgk[7];
  for (int i = 0; i < 7; ++i) {
    const double x = h * kXgk[i];
    const double f1 = f(c - x);
    const double f2 = f(c + x);
    res_k += kWgk[i] * (f1 + f2);
    if (i % 2 == 1) res_g += kWg[i / 2] * (f1 + f2);
  }
  return {res_k * h, std::fabs((res_k - res_g) * h)};
}

double integrate_rec(const std::function<double(double)>& f, double a,
                     double b, double abs_tol, double rel_tol, int depth,
                     int max_depth) {
  const PanelResult r = gk15(f, a, b);
  const double tol = std::max(abs_tol, rel_tol * std::fabs(r.value));
  if (r.error <= tol || depth >= max_depth) return r.value;
  const double c = 0.5 * (a + b);
  return integrate_rec(f, a, c, 0.5 * abs_tol, rel_tol, depth + 1, max_depth) +
         integrate_rec(f, c, b, 0.5 * abs_tol, rel_tol, depth + 1, max_depth);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opt) {
  if (!(a <= b)) throw std::invalid_argument("integrate: bad interval");
  if (a == b) return 0.0;
  return integrate_rec(f, a, b, opt.abs_tol, opt.rel_tol, 0, opt.max_depth);
}

double integrate_to_inf(const std::function<double(double)>& f, double a,
                        const QuadratureOptions& opt) {
  // x = a + s/(1-s), dx = ds/(1-s)^2, s in [0, 1)
  auto g = [&](double s) {
    const double om = 1.0 - s;
    const double x = a + s / om;
    return f(x) / (om * om);
  };
  return integrate_rec(g, 0.0, 1.0 - 1e-14, opt.abs_tol, opt.rel_tol, 0,
                       opt.max_depth);
}

double integrate_capped(const std::function<double(double)>& f, double a,
                        double b, double cap, int panels_per_decade) {
  if (!(0 < a && a < b)) {
    throw std::invalid_argument("integrate_capped: wants 0 < a < b");
  }
  // Log-spaced panels, summed right to left so a divergence near `a`
  // saturates the cap quickly.
  const double la = std::log(a);
  const double lb = std::log(b);
  const int n = std::max(2, static_cast<int>((lb - la) / std::log(10.0) *
                                             panels_per_decade));
  double total = 0.0;
  for (int i = n; i-- > 0;) {
    const double lo = std::exp(la + (lb - la) * i / n);
    const double hi = std::exp(la + (lb - la) * (i + 1) / n);
    total += gk15(f, lo, hi).value;
    if (total > cap) return total;
  }
  return total;
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    throw std::invalid_argument("find_root: no sign change on bracket");
  }
  double x = lo;
  for (int it = 0; it < max_iter; ++it) {
    // Secant proposal on even iterations, plain bisection on odd ones so
    // the bracket provably halves every two steps.
    double mid = 0.5 * (lo + hi);
    double sec = (fhi != flo) ? hi - fhi * (hi - lo) / (fhi - flo) : mid;
    x = (it % 2 == 0 && sec > lo && sec < hi) ? sec : mid;
    if (hi - lo < x_tol * (1.0 + std::fabs(x))) return x;
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0) == (flo > 0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
  }
  return x;
}

}  // namespace cblab

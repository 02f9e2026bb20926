#include "cblab/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace cblab {

namespace {

// Gauss-Legendre 4 on [-1, 1].
constexpr double kGlX[2] = {0.3399810435848562648026658,
                            0.8611363115940525752239465};
constexpr double kGlW[2] = {0.6521451548625461426269361,
                            0.3478548451374538573730639};

}  // namespace

GridFunction::GridFunction(std::vector<Node> nodes, double solver_tol,
                           bool zero_beyond_back)
    : nodes_(std::move(nodes)),
      solver_tol_(solver_tol),
      zero_beyond_back_(zero_beyond_back) {
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (nodes_[i].s < nodes_[i - 1].s) {
      throw std::invalid_argument("GridFunction: nodes must be ascending");
    }
  }
}

GridFunction GridFunction::zero_function() {
  GridFunction g;
  g.zero_beyond_back_ = true;
  return g;
}

GridFunction GridFunction::constant(double value, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("GridFunction::constant: a < b");
  return GridFunction({{a, value, 0.0}, {b, value, 0.0}}, 0.0, false);
}

double GridFunction::front_s() const {
  if (nodes_.empty()) throw std::logic_error("GridFunction: empty grid");
  return nodes_.front().s;
}

double GridFunction::back_s() const {
  if (nodes_.empty()) throw std::logic_error("GridFunction: empty grid");
  return nodes_.back().s;
}

double GridFunction::eval(double s) const {
  if (nodes_.empty()) return 0.0;
  if (s > nodes_.back().s) {
    if (zero_beyond_back_) return 0.0;
    throw std::domain_error("GridFunction::eval: s beyond grid");
  }
  if (s < nodes_.front().s) {
    throw std::domain_error("GridFunction::eval: s before grid");
  }
  // First node with s_i >= s: at a duplicated point this picks the left
  // limit, making eval left-continuous across jumps.
  const auto it = std::lower_bound(
      nodes_.begin(), nodes_.end(), s,
      [](const Node& n, double v) { return n.s < v; });
  if (it->s == s) return it->value;
  const Node& n1 = *it;
  const Node& n0 = *(it - 1);
  const double h = n1.s - n0.s;
  const double t = (s - n0.s) / h;
  const double t1 = 1.0 - t;
  const double h00 = (1.0 + 2.0 * t) * t1 * t1;
  const double h10 = t * t1 * t1;
  const double h01 = t * t * (3.0 - 2.0 * t);
  const double h11 = t * t * (t - 1.0);
  return h00 * n0.value + h * h10 * n0.deriv + h01 * n1.value +
         h * h11 * n1.deriv;
}

double GridFunction::eval_or_zero(double s) const {
  if (nodes_.empty()) return 0.0;
  if (s > nodes_.back().s || s < nodes_.front().s) return 0.0;
  return eval(s);
}

double GridFunction::integrate(
    double a, double b,
    const std::function<double(double, double)>& f) const {
  if (nodes_.empty() || !(a < b)) return 0.0;
  a = std::max(a, nodes_.front().s);
  b = std::min(b, nodes_.back().s);
  if (!(a < b)) return 0.0;
  double total = 0.0;
  // Walk segments overlapping [a, b].
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    const double lo = std::max(a, nodes_[i].s);
    const double hi = std::min(b, nodes_[i + 1].s);
    if (!(lo < hi)) continue;
    const double c = 0.5 * (lo + hi);
    const double hw = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int q = 0; q < 2; ++q) {
      const double x1 = c - hw * kGlX[q];
      const double x2 = c + hw * kGlX[q];
      acc += kGlW[q] * (f(x1, eval(x1)) + f(x2, eval(x2)));
    }
    total += acc * hw;
  }
  return total;
}

double GridFunction::sup_diff(const GridFunction& other) const {
  const GridFunction* a = this;
  const GridFunction* b = &other;
  double worst = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    if (!a->nodes_.empty()) {
      for (const auto& n : a->nodes_) {
        const double va = a->eval_or_zero(n.s);
        const double vb = b->eval_or_zero(n.s);
        worst = std::max(worst, std::fabs(va - vb));
      }
    }
    std::swap(a, b);
  }
  return worst;
}

double GridFunction::sup_excess_over(const GridFunction& other) const {
  // Both sides evaluated through eval so jump ties compare left limits
  // with left limits.
  double worst = 0.0;
  for (const auto& n : nodes_) {
    worst = std::max(worst, eval_or_zero(n.s) - other.eval_or_zero(n.s));
  }
  for (const auto& n : other.nodes_) {
    worst = std::max(worst, eval_or_zero(n.s) - other.eval_or_zero(n.s));
  }
  return worst;
}

std::vector<double> GridFunction::jump_locations() const {
  std::vector<double> js;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (nodes_[i].s == nodes_[i - 1].s) js.push_back(nodes_[i].s);
  }
  return js;
}

void GridFunction::write_csv(std::ostream& os) const {
  os << "s,value\n";
  char buf[64];
  for (const auto& n : nodes_) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", n.s, n.value);
    os << buf;
  }
}

}  // namespace cblab

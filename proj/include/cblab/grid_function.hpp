#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

namespace cblab {

// A solved function on a time grid: node values plus node derivatives,
// evaluated between nodes by cubic Hermite interpolation. Jump
// discontinuities are stored as duplicated grid points (first entry =
// left limit, second = right limit); eval() is left-continuous there.
//
// Laplace-exponent solutions vanish above the driving measure's support;
// such functions carry zero_beyond_back and evaluate to 0 to the right
// of the grid.
class GridFunction {
 public:
  GridFunction() = default;

  struct Node {
    double s;
    double value;
    double deriv;
  };

  // Build from ascending nodes (ties allowed for jumps).
  GridFunction(std::vector<Node> nodes, double solver_tol,
               bool zero_beyond_back);

  static GridFunction zero_function();
  // Constant value on [a, b] (no derivative content).
  static GridFunction constant(double value, double a, double b);

  bool is_zero_function() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  double front_s() const;
  double back_s() const;
  double solver_tol() const { return solver_tol_; }
  bool zero_beyond_back() const { return zero_beyond_back_; }

  // Left-continuous evaluation; throws outside [front_s, back_s] unless
  // the function vanishes there by construction.
  double eval(double s) const;
  // Like eval but 0 anywhere outside the grid range.
  double eval_or_zero(double s) const;

  // Integral of f(r, value(r)) over [a, b] clipped to the grid range,
  // Gauss-Legendre 4 per (sub)segment.
  double integrate(double a, double b,
                   const std::function<double(double, double)>& f) const;

  // max |this - other| over the union of both node sets (overlap only).
  double sup_diff(const GridFunction& other) const;
  // max over the grid of max(0, this - other): one-sided excess.
  double sup_excess_over(const GridFunction& other) const;

  // Locations where the function jumps (duplicated grid points).
  std::vector<double> jump_locations() const;

  // CSV with header "s,value", full precision.
  void write_csv(std::ostream& os) const;

 private:
  std::vector<Node> nodes_;
  double solver_tol_ = 0.0;
  bool zero_beyond_back_ = false;
};

}  // namespace cblab

#pragma once

#include <vector>

namespace cblab {

struct TimeAtom {
  double time;
  double mass;  // > 0
};

// Constant-rate density on [start, stop).
struct TimeDensity {
  double start;
  double stop;
  double rate;  // >= 0
};

// Finite positive measure on the real line with support bounded above:
// atoms plus piecewise-constant densities. Drives the backward
// Laplace-exponent equations.
class FiniteMeasureOnR {
 public:
  FiniteMeasureOnR() = default;  // zero measure

  static FiniteMeasureOnR zero() { return {}; }
  static FiniteMeasureOnR single_atom(double time, double mass);

  FiniteMeasureOnR& add_atom(double time, double mass);
  FiniteMeasureOnR& add_density(double start, double stop, double rate);

  bool is_zero() const;
  const std::vector<TimeAtom>& atoms() const { return atoms_; }
  const std::vector<TimeDensity>& densities() const { return densities_; }

  // Supremum of the support; -inf for the zero measure.
  double support_upper_bound() const;
  // True when an atom sits exactly at the support supremum.
  bool has_top_atom() const;

  double total_mass() const;
  double mass_from(double s) const;            // mu([s, inf))
  double mass_strictly_after(double s) const;  // mu((s, inf))
  double atom_mass_at(double time) const;
  double density_at(double s) const;  // atoms excluded

  // Atom times and density endpoints in (lo, hi], descending.
  std::vector<double> event_times_descending(double lo, double hi) const;

 private:
  std::vector<TimeAtom> atoms_;  // ascending, unique times
  std::vector<TimeDensity> densities_;
};

}  // namespace cblab

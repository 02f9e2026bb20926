#pragma once

#include <vector>

namespace cblab {

struct LevyAtom {
  double location;  // > 0
  double mass;      // > 0
};

// Density term scale * exp(-rate * x) on (0, inf). Negative scales are
// allowed so that exponentially tilted differences such as
// (e^{theta x} - 1) c e^{-rho x} stay inside the family; the summed
// density must remain nonnegative (checked by validate_density()).
struct LevyExpTerm {
  double scale;  // != 0, may be negative
  double rate;   // > 0
};

// Density scale * x^{-1-index} on (0, inf).
struct LevyStableTerm {
  double scale;  // > 0
  double index;  // in (0,2), != 1
};

// A jump measure built from atoms, exponential densities and stable
// densities (finite sums of the variants). All Laplace-type functionals
// used by the mechanisms are closed-form per term.
class LevyMeasure {
 public:
  LevyMeasure() = default;  // zero measure

  static LevyMeasure atoms(std::vector<LevyAtom> atoms);
  static LevyMeasure single_atom(double location, double mass);
  static LevyMeasure exp_density(double scale, double rate);
  static LevyMeasure stable_density(double scale, double index);

  LevyMeasure& add(const LevyMeasure& other);
  friend LevyMeasure operator+(LevyMeasure a, const LevyMeasure& b) {
    a.add(b);
    return a;
  }

  bool is_zero() const;
  const std::vector<LevyAtom>& atom_terms() const { return atoms_; }
  const std::vector<LevyExpTerm>& exp_terms() const { return exps_; }
  const std::vector<LevyStableTerm>& stable_terms() const { return stables_; }

  // Continuous part of the density at x > 0 (atoms excluded).
  double density(double x) const;

  // Throws if the summed exponential part dips negative anywhere.
  void validate_density() const;

  // int (1 ^ x^2) dm < inf  (branching admissibility; true for index < 2)
  bool branching_admissible() const;
  // int (1 ^ x) dm < inf    (immigration admissibility; needs index < 1)
  bool immigration_admissible() const;

  // int [e^{-lambda x} - 1 + lambda x 1_{x<=1}] dm
  double psi_integral(double lambda) const;
  // int (1 - e^{-lambda x}) dm
  double phi_integral(double lambda) const;
  // int_{(1,inf)} x dm, +inf when the tail moment diverges
  double tail_first_moment() const;
  // int_{(0,1]} x dm, +inf for stable index >= 1
  double compensation_first_moment() const;
  // total mass, +inf for stable terms
  double total_mass() const;

  // sup{theta >= 0 : int_{(1,inf)} e^{theta x} dm < inf}; second result
  // says whether the integral is still finite at the radius itself.
  struct ExpMomentRadius {
    double radius;
    bool finite_at_radius;
  };
  ExpMomentRadius exp_moment_radius() const;

  // e^{-theta x} dm. Requires rate + theta > 0 for every exponential term
  // and no stable terms (not closed under tilting) unless theta == 0.
  LevyMeasure tilt(double theta) const;
  // int_{(0,1]} (1 - e^{-theta x}) x dm (drift correction of a tilt).
  double tilt_drift_correction(double theta) const;

  // (1 - e^{-theta x}) dm  (up = true)  or  (e^{theta x} - 1) dm
  // (up = false, requires theta below every exponential rate).
  LevyMeasure shift_defect(double theta, bool up) const;

 private:
  std::vector<LevyAtom> atoms_;
  std::vector<LevyExpTerm> exps_;
  std::vector<LevyStableTerm> stables_;
};

}  // namespace cblab

#pragma once

#include "cblab/levy.hpp"

namespace cblab {

// psi(l) = drift*l + quadratic*l^2 + int [e^{-l x} - 1 + l x 1_{x<=1}] dpi
class BranchingMechanism {
 public:
  BranchingMechanism(double drift, double quadratic, LevyMeasure levy = {});

  double drift() const { return drift_; }
  double quadratic() const { return quad_; }
  const LevyMeasure& levy() const { return levy_; }

  double value(double lambda) const;  // psi(lambda); lambda >= 0

  // psi'(0+) in [-inf, +inf): drift minus the (1,inf) first moment of levy.
  double derivative_at_zero() const;

  // Pure diffusion case (no jump part, positive quadratic coefficient):
  // transitions have a closed sampling form.
  bool is_quadratic_diffusion() const {
    return levy_.is_zero() && quad_ > 0.0;
  }

 private:
  double drift_;
  double quad_;
  LevyMeasure levy_;
};

// phi(l) = drift*l + int (1 - e^{-l x}) dnu, nondecreasing concave.
class ImmigrationMechanism {
 public:
  explicit ImmigrationMechanism(double drift, LevyMeasure nu = {});
  static ImmigrationMechanism zero() { return ImmigrationMechanism(0.0); }

  double drift() const { return drift_; }
  const LevyMeasure& nu() const { return nu_; }
  bool is_zero() const { return drift_ == 0.0 && nu_.is_zero(); }

  double value(double lambda) const;  // phi(lambda); lambda >= 0

 private:
  double drift_;
  LevyMeasure nu_;
};

enum class Criticality { Subcritical, Critical, Supercritical };

struct MechanismClass {
  Criticality criticality;
  bool conservative;
  // True when conservativity was decided by the numerical divergence
  // probe of int_0 du/|psi(u)| rather than by psi'(0+) > -inf.
  bool conservative_is_numerical;
};

MechanismClass classify(const BranchingMechanism& m);

// Branching mechanism of the total population: same quadratic part,
// combined jump measure pi + nu, drift reduced by the immigration drift
// and the small-jump compensation of nu. Pointwise equals psi0 - phi.
BranchingMechanism subtract_immigration(const BranchingMechanism& psi0,
                                        const ImmigrationMechanism& phi);

// Admissible shift parameters: (0, theta0] when the exponential moment
// is still finite at theta0, else (0, theta0).
struct ShiftRange {
  double theta0;
  bool boundary_admissible;
  bool contains(double theta) const {
    return theta > 0.0 &&
           (theta < theta0 || (theta == theta0 && boundary_admissible));
  }
};

ShiftRange shift_range(const BranchingMechanism& m);

// The mechanism lambda -> psi(theta + lambda) - psi(theta). Negative theta
// requires -theta inside shift_range(m).
BranchingMechanism shift(const BranchingMechanism& m, double theta);

// Immigration mechanism realizing the downward shift:
// shift(m, -theta) == m - shift_down_immigration(m, theta) pointwise.
ImmigrationMechanism shift_down_immigration(const BranchingMechanism& m,
                                            double theta);

// Immigration mechanism realizing the upward shift:
// shift(m, theta) == m + shift_up_immigration(m, theta) pointwise.
ImmigrationMechanism shift_up_immigration(const BranchingMechanism& m,
                                          double theta);

}  // namespace cblab

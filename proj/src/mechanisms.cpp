#include "cblab/mechanisms.hpp"

#include <cmath>
#include <stdexcept>

#include "cblab/numerics.hpp"

namespace cblab {

BranchingMechanism::BranchingMechanism(double drift, double quadratic,
                                       LevyMeasure levy)
    : drift_(drift), quad_(quadratic), levy_(std::move(levy)) {
  if (!std::isfinite(drift_) || !std::isfinite(quad_)) {
    throw std::invalid_argument("BranchingMechanism: non-finite coefficient");
  }
  if (quad_ < 0.0) {
    throw std::invalid_argument("BranchingMechanism: quadratic must be >= 0");
  }
  if (!levy_.branching_admissible()) {
    throw std::invalid_argument(
        "BranchingMechanism: levy measure fails int (1^x^2) < inf");
  }
  levy_.validate_density();
}

double BranchingMechanism::value(double lambda) const {
  if (lambda < 0.0) {
    throw std::domain_error("BranchingMechanism::value: lambda < 0");
  }
  if (lambda == 0.0) return 0.0;
  return drift_ * lambda + quad_ * lambda * lambda +
         levy_.psi_integral(lambda);
}

double BranchingMechanism::derivative_at_zero() const {
  const double tail = levy_.tail_first_moment();
  if (tail == kInf) return -kInf;
  return drift_ - tail;
}

ImmigrationMechanism::ImmigrationMechanism(double drift, LevyMeasure nu)
    : drift_(drift), nu_(std::move(nu)) {
  if (!(drift_ >= 0.0)) {
    throw std::invalid_argument("ImmigrationMechanism: drift must be >= 0");
  }
  if (!nu_.immigration_admissible()) {
    throw std::invalid_argument(
        "ImmigrationMechanism: nu fails int (1^x) < inf");
  }
  nu_.validate_density();
}

double ImmigrationMechanism::value(double lambda) const {
  if (lambda < 0.0) {
    throw std::domain_error("ImmigrationMechanism::value: lambda < 0");
  }
  if (lambda == 0.0) return 0.0;
  return drift_ * lambda + nu_.phi_integral(lambda);
}

namespace {

// Smallest strictly positive root of psi, or +inf if none below `hi`.
double smallest_positive_root(const BranchingMechanism& m, double hi) {
  double prev = 1e-8;
  double f_prev = m.value(prev);
  for (double u = prev * 2.0; u <= hi; u *= 2.0) {
    const double f = m.value(u);
    if (f == 0.0) return u;
    if ((f > 0) != (f_prev > 0)) {
      return find_root([&](double v) { return m.value(v); }, prev, u);
    }
    prev = u;
    f_prev = f;
  }
  return kInf;
}

}  // namespace

MechanismClass classify(const BranchingMechanism& m) {
  const double d0 = m.derivative_at_zero();
  MechanismClass out{};
  if (d0 == -kInf) {
    out.criticality = Criticality::Supercritical;
  } else if (d0 > 0.0) {
    out.criticality = Criticality::Subcritical;
  } else if (d0 < 0.0) {
    out.criticality = Criticality::Supercritical;
  } else {
    out.criticality = Criticality::Critical;
  }
  if (d0 > -kInf) {
    out.conservative = true;
    out.conservative_is_numerical = false;
    return out;
  }
  // psi'(0+) = -inf: probe int_0 du/|psi(u)|. Divergence at 0 means the
  // process cannot explode; the probe integrates up to half the smallest
  // positive root scale and calls >1e3 accumulated mass divergent.
  const double root = smallest_positive_root(m, 1e8);
  const double eps = root == kInf ? 1.0 : std::min(1.0, 0.5 * root);
  const double total = integrate_capped(
      [&](double u) { return 1.0 / std::fabs(m.value(u)); }, 1e-12, eps,
      1e3);
  out.conservative = total > 1e3;
  out.conservative_is_numerical = true;
  return out;
}

BranchingMechanism subtract_immigration(const BranchingMechanism& psi0,
                                        const ImmigrationMechanism& phi) {
  const double comp = phi.nu().compensation_first_moment();
  if (!std::isfinite(comp)) {
    throw std::invalid_argument(
        "subtract_immigration: nu fails the compensation integral");
  }
  LevyMeasure combined = psi0.levy();
  combined.add(phi.nu());
  return BranchingMechanism(psi0.drift() - phi.drift() - comp,
                            psi0.quadratic(), std::move(combined));
}

ShiftRange shift_range(const BranchingMechanism& m) {
  const auto r = m.levy().exp_moment_radius();
  return {r.radius, r.finite_at_radius};
}

BranchingMechanism shift(const BranchingMechanism& m, double theta) {
  if (theta == 0.0) return m;
  if (theta < 0.0) {
    const ShiftRange range = shift_range(m);
    if (!range.contains(-theta)) {
      throw std::domain_error("shift: -theta outside the admissible range");
    }
  }
  // psi(theta+l) - psi(theta) = (drift + 2 beta theta + int_{(0,1]}
  // (1-e^{-theta x}) x dpi) l + beta l^2 + tilted jump integral.
  const double new_drift = m.drift() + 2.0 * m.quadratic() * theta +
                           m.levy().tilt_drift_correction(theta);
  return BranchingMechanism(new_drift, m.quadratic(), m.levy().tilt(theta));
}

ImmigrationMechanism shift_down_immigration(const BranchingMechanism& m,
                                            double theta) {
  if (!shift_range(m).contains(theta)) {
    throw std::domain_error(
        "shift_down_immigration: theta outside the admissible range");
  }
  return ImmigrationMechanism(2.0 * m.quadratic() * theta,
                              m.levy().shift_defect(theta, false));
}

ImmigrationMechanism shift_up_immigration(const BranchingMechanism& m,
                                          double theta) {
  if (!(theta > 0.0)) {
    throw std::domain_error("shift_up_immigration: theta must be > 0");
  }
  return ImmigrationMechanism(2.0 * m.quadratic() * theta,
                              m.levy().shift_defect(theta, true));
}

}  // namespace cblab

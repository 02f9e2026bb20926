#include "cblab/levy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cblab/numerics.hpp"

namespace cblab {

LevyMeasure LevyMeasure::atoms(std::vector<LevyAtom> atoms) {
  LevyMeasure m;
  for (const auto& a : atoms) {
    if (!(a.location > 0.0) || !(a.mass > 0.0)) {
      throw std::invalid_argument("LevyMeasure: atom needs location>0, mass>0");
    }
  }
  m.atoms_ = std::move(atoms);
  std::sort(m.atoms_.begin(), m.atoms_.end(),
            [](const LevyAtom& a, const LevyAtom& b) {
              return a.location < b.location;
            });
  return m;
}

LevyMeasure LevyMeasure::single_atom(double location, double mass) {
  return atoms({{location, mass}});
}

LevyMeasure LevyMeasure::exp_density(double scale, double rate) {
  if (scale == 0.0 || !(rate > 0.0)) {
    throw std::invalid_argument("LevyMeasure: exp term needs scale!=0, rate>0");
  }
  LevyMeasure m;
  m.exps_.push_back({scale, rate});
  return m;
}

LevyMeasure LevyMeasure::stable_density(double scale, double index) {
  if (!(scale > 0.0) || !(index > 0.0) || !(index < 2.0) || index == 1.0) {
    throw std::invalid_argument(
        "LevyMeasure: stable term needs scale>0, index in (0,2)\\{1}");
  }
  LevyMeasure m;
  m.stables_.push_back({scale, index});
  return m;
}

LevyMeasure& LevyMeasure::add(const LevyMeasure& other) {
  atoms_.insert(atoms_.end(), other.atoms_.begin(), other.atoms_.end());
  std::sort(atoms_.begin(), atoms_.end(),
            [](const LevyAtom& a, const LevyAtom& b) {
              return a.location < b.location;
            });
  exps_.insert(exps_.end(), other.exps_.begin(), other.exps_.end());
  stables_.insert(stables_.end(), other.stables_.begin(), other.stables_.end());
  return *this;
}

bool LevyMeasure::is_zero() const {
  return atoms_.empty() && exps_.empty() && stables_.empty();
}

double LevyMeasure::density(double x) const {
  double d = 0.0;
  for (const auto& e : exps_) d += e.scale * std::exp(-e.rate * x);
  for (const auto& s : stables_) d += s.scale * std::pow(x, -1.0 - s.index);
  return d;
}

void LevyMeasure::validate_density() const {
  bool has_negative = false;
  for (const auto& e : exps_) has_negative |= e.scale < 0.0;
  if (!has_negative) return;
  double scale_ref = 0.0;
  double min_rate = kInf;
  for (const auto& e : exps_) {
    scale_ref = std::max(scale_ref, std::fabs(e.scale));
    min_rate = std::min(min_rate, e.rate);
  }
  const double hi = 50.0 / min_rate;
  for (int i = 0; i <= 400; ++i) {
    const double x = std::exp(std::log(1e-8) +
                              (std::log(hi) - std::log(1e-8)) * i / 400.0);
    double d = 0.0;
    for (const auto& e : exps_) d += e.scale * std::exp(-e.rate * x);
    if (d < -1e-12 * scale_ref) {
      throw std::invalid_argument(
          "LevyMeasure: summed exponential density is negative");
    }
  }
}

bool LevyMeasure::branching_admissible() const {
  for (const auto& s : stables_) {
    if (!(s.index < 2.0)) return false;
  }
  return true;
}

bool LevyMeasure::immigration_admissible() const {
  for (const auto& s : stables_) {
    if (!(s.index < 1.0)) return false;
  }
  return true;
}

double LevyMeasure::psi_integral(double lambda) const {
  if (lambda == 0.0) return 0.0;
  double r = 0.0;
  for (const auto& a : atoms_) {
    if (a.location <= 1.0) {
      r += a.mass * exp_compensated(lambda * a.location);
    } else {
      r += a.mass * std::expm1(-lambda * a.location);
    }
  }
  for (const auto& e : exps_) {
    r += e.scale * (-lambda / (e.rate * (e.rate + lambda)) +
                    lambda * first_moment_exp_kernel(e.rate));
  }
  for (const auto& s : stables_) {
    const double g = s.index;
    if (g > 1.0) {
      // int (e^{-lx}-1+lx) x^{-1-g} = Gamma(2-g)/(g(g-1)) l^g, minus the
      // over-compensated tail int_{(1,inf)} l x^{-g} = l/(g-1).
      r += s.scale * (std::tgamma(2.0 - g) / (g * (g - 1.0)) *
                          std::pow(lambda, g) -
                      lambda / (g - 1.0));
    } else {
      // int (e^{-lx}-1) x^{-1-g} = -Gamma(1-g)/g l^g, plus the small-jump
      // compensation int_{(0,1]} l x^{-g} = l/(1-g).
      r += s.scale * (-std::tgamma(1.0 - g) / g * std::pow(lambda, g) +
                      lambda / (1.0 - g));
    }
  }
  return r;
}

double LevyMeasure::phi_integral(double lambda) const {
  if (lambda == 0.0) return 0.0;
  double r = 0.0;
  for (const auto& a : atoms_) {
    r += -a.mass * std::expm1(-lambda * a.location);
  }
  for (const auto& e : exps_) {
    r += e.scale * lambda / (e.rate * (e.rate + lambda));
  }
  for (const auto& s : stables_) {
    const double g = s.index;
    if (!(g < 1.0)) {
      throw std::domain_error(
          "LevyMeasure: phi integral diverges for stable index >= 1");
    }
    r += s.scale * std::tgamma(1.0 - g) / g * std::pow(lambda, g);
  }
  return r;
}

double LevyMeasure::tail_first_moment() const {
  double r = 0.0;
  for (const auto& a : atoms_) {
    if (a.location > 1.0) r += a.mass * a.location;
  }
  for (const auto& e : exps_) {
    r += e.scale * (1.0 + e.rate) * std::exp(-e.rate) / (e.rate * e.rate);
  }
  for (const auto& s : stables_) {
    if (s.index > 1.0) {
      r += s.scale / (s.index - 1.0);
    } else {
      return kInf;
    }
  }
  return r;
}

double LevyMeasure::compensation_first_moment() const {
  double r = 0.0;
  for (const auto& a : atoms_) {
    if (a.location <= 1.0) r += a.mass * a.location;
  }
  for (const auto& e : exps_) {
    r += e.scale * first_moment_exp_kernel(e.rate);
  }
  for (const auto& s : stables_) {
    if (!(s.index < 1.0)) return kInf;
    r += s.scale / (1.0 - s.index);
  }
  return r;
}

double LevyMeasure::total_mass() const {
  if (!stables_.empty()) return kInf;
  double r = 0.0;
  for (const auto& a : atoms_) r += a.mass;
  for (const auto& e : exps_) r += e.scale / e.rate;
  return r;
}

LevyMeasure::ExpMomentRadius LevyMeasure::exp_moment_radius() const {
  double radius = kInf;
  for (const auto& e : exps_) radius = std::min(radius, e.rate);
  if (!stables_.empty()) radius = 0.0;
  // At a finite radius set by an exponential rate the tail integral
  // diverges (the tilted density decays like a constant); atoms alone
  // keep every exponential moment finite.
  return {radius, radius == kInf};
}

LevyMeasure LevyMeasure::tilt(double theta) const {
  if (theta == 0.0) return *this;
  LevyMeasure m;
  for (const auto& a : atoms_) {
    m.atoms_.push_back({a.location, a.mass * std::exp(-theta * a.location)});
  }
  for (const auto& e : exps_) {
    if (!(e.rate + theta > 0.0)) {
      throw std::domain_error("LevyMeasure: tilt would break integrability");
    }
    m.exps_.push_back({e.scale, e.rate + theta});
  }
  if (!stables_.empty()) {
    throw std::domain_error(
        "LevyMeasure: stable terms are not closed under exponential tilting");
  }
  return m;
}

double LevyMeasure::tilt_drift_correction(double theta) const {
  if (theta == 0.0) return 0.0;
  if (!stables_.empty()) {
    throw std::domain_error(
        "LevyMeasure: stable terms are not closed under exponential tilting");
  }
  double r = 0.0;
  for (const auto& a : atoms_) {
    if (a.location <= 1.0) {
      r += a.mass * a.location * (-std::expm1(-theta * a.location));
    }
  }
  for (const auto& e : exps_) {
    r += e.scale * (first_moment_exp_kernel(e.rate) -
                    first_moment_exp_kernel(e.rate + theta));
  }
  return r;
}

LevyMeasure LevyMeasure::shift_defect(double theta, bool up) const {
  if (!(theta > 0.0)) {
    throw std::domain_error("LevyMeasure: shift_defect needs theta > 0");
  }
  if (!stables_.empty()) {
    throw std::domain_error(
        "LevyMeasure: stable terms are not closed under exponential tilting");
  }
  LevyMeasure m;
  for (const auto& a : atoms_) {
    const double w = up ? -std::expm1(-theta * a.location)
                        : std::expm1(theta * a.location);
    m.atoms_.push_back({a.location, a.mass * w});
  }
  for (const auto& e : exps_) {
    if (up) {
      // (1 - e^{-theta x}) c e^{-rate x} = c e^{-rate x} - c e^{-(rate+th)x}
      m.exps_.push_back({e.scale, e.rate});
      m.exps_.push_back({-e.scale, e.rate + theta});
    } else {
      // (e^{theta x} - 1) c e^{-rate x} = c e^{-(rate-th)x} - c e^{-rate x}
      if (!(theta < e.rate)) {
        throw std::domain_error(
            "LevyMeasure: shift_defect(theta, down) needs theta < rate");
      }
      m.exps_.push_back({e.scale, e.rate - theta});
      m.exps_.push_back({-e.scale, e.rate});
    }
  }
  return m;
}

}  // namespace cblab

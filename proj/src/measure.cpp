#include "cblab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cblab/numerics.hpp"

namespace cblab {

FiniteMeasureOnR FiniteMeasureOnR::single_atom(double time, double mass) {
  FiniteMeasureOnR m;
  m.add_atom(time, mass);
  return m;
}

FiniteMeasureOnR& FiniteMeasureOnR::add_atom(double time, double mass) {
  if (!(mass > 0.0) || !std::isfinite(time) || !std::isfinite(mass)) {
    throw std::invalid_argument("FiniteMeasureOnR: atom needs finite time, mass > 0");
  }
  for (auto& a : atoms_) {
    if (a.time == time) {
      a.mass += mass;
      return *this;
    }
  }
  atoms_.push_back({time, mass});
  std::sort(atoms_.begin(), atoms_.end(),
            [](const TimeAtom& a, const TimeAtom& b) { return a.time < b.time; });
  return *this;
}

FiniteMeasureOnR& FiniteMeasureOnR::add_density(double start, double stop,
                                                double rate) {
  if (!(start < stop) || !(rate >= 0.0) || !std::isfinite(stop)) {
    throw std::invalid_argument(
        "FiniteMeasureOnR: density needs start < stop (finite), rate >= 0");
  }
  if (rate > 0.0) densities_.push_back({start, stop, rate});
  return *this;
}

bool FiniteMeasureOnR::is_zero() const {
  return atoms_.empty() && densities_.empty();
}

double FiniteMeasureOnR::support_upper_bound() const {
  double h = -kInf;
  if (!atoms_.empty()) h = atoms_.back().time;
  for (const auto& d : densities_) h = std::max(h, d.stop);
  return h;
}

bool FiniteMeasureOnR::has_top_atom() const {
  return !atoms_.empty() && atoms_.back().time == support_upper_bound();
}

double FiniteMeasureOnR::total_mass() const { return mass_from(-kInf); }

double FiniteMeasureOnR::mass_from(double s) const {
  double m = 0.0;
  for (const auto& a : atoms_) {
    if (a.time >= s) m += a.mass;
  }
  for (const auto& d : densities_) {
    m += d.rate * std::max(0.0, d.stop - std::max(d.start, s));
  }
  return m;
}

double FiniteMeasureOnR::mass_strictly_after(double s) const {
  return mass_from(s) - atom_mass_at(s);
}

double FiniteMeasureOnR::atom_mass_at(double time) const {
  for (const auto& a : atoms_) {
    if (a.time == time) return a.mass;
  }
  return 0.0;
}

double FiniteMeasureOnR::density_at(double s) const {
  double r = 0.0;
  for (const auto& d : densities_) {
    if (s >= d.start && s < d.stop) r += d.rate;
  }
  return r;
}

std::vector<double> FiniteMeasureOnR::event_times_descending(double lo,
                                                             double hi) const {
  std::vector<double> ts;
  for (const auto& a : atoms_) {
    if (a.time > lo && a.time <= hi) ts.push_back(a.time);
  }
  for (const auto& d : densities_) {
    if (d.start > lo && d.start <= hi) ts.push_back(d.start);
    if (d.stop > lo && d.stop <= hi) ts.push_back(d.stop);
  }
  std::sort(ts.begin(), ts.end(), std::greater<double>());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

}  // namespace cblab

#include "cblab/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "cblab/numerics.hpp"
#include "cblab/quadratic.hpp"

namespace cblab {

PathGrid::PathGrid(double dt_, int n_steps_) : dt(dt_), n_steps(n_steps_) {
  if (!(dt > 0.0) || n_steps < 1) {
    throw std::invalid_argument("PathGrid: needs dt > 0 and n_steps >= 1");
  }
}

int PathGrid::index_of(double t) const {
  const double k = t / dt;
  const long long i = std::llround(k);
  if (i < 0 || i > n_steps || std::fabs(k - i) > 1e-9 * (1.0 + std::fabs(k))) {
    throw std::invalid_argument("PathGrid: time is off the grid");
  }
  return static_cast<int>(i);
}

MCEstimate estimate_from(const std::vector<double>& values) {
  if (values.size() < 2) {
    throw std::invalid_argument("estimate_from: needs n >= 2");
  }
  const long long n = static_cast<long long>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

double quadratic_cb_step(double alpha, double x, double dt, RngStream& rng,
                         double beta) {
  if (x < 0.0) throw std::domain_error("quadratic_cb_step: x < 0");
  if (!(dt > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("quadratic_cb_step: needs dt > 0, beta > 0");
  }
  if (x == 0.0) return 0.0;
  const double g = quad::exp_integral(alpha, dt);
  const long long n = rng.poisson(x / (beta * g));
  if (n == 0) return 0.0;
  return rng.gamma(static_cast<double>(n), beta * std::exp(-alpha * dt) * g);
}

namespace {

// ---- Euler-Maruyama machinery for general mechanisms --------------------

// Jump sampler for the part of a Levy measure above the floor; positive
// exponential mixture candidates are thinned down to the signed total.
struct JumpSampler {
  double floor = 1e-4;
  // atoms above floor
  std::vector<LevyAtom> atoms;
  // positive exponential terms: candidate mixture
  std::vector<LevyExpTerm> pos_exps;
  std::vector<double> pos_exp_mass;  // mass above floor per positive term
  double pos_exp_total = 0.0;
  bool exp_has_negative = false;
  const LevyMeasure* measure = nullptr;
  // stable terms
  std::vector<LevyStableTerm> stables;
  std::vector<double> stable_mass;  // mass above floor per stable term

  explicit JumpSampler(const LevyMeasure& m, double floor_) : floor(floor_) {
    measure = &m;
    for (const auto& a : m.atom_terms()) {
      if (a.location > floor) atoms.push_back(a);
    }
    for (const auto& e : m.exp_terms()) {
      if (e.scale > 0.0) {
        pos_exps.push_back(e);
        pos_exp_mass.push_back(e.scale / e.rate * std::exp(-e.rate * floor));
        pos_exp_total += pos_exp_mass.back();
      } else {
        exp_has_negative = true;
      }
    }
    for (const auto& s : m.stable_terms()) {
      stables.push_back(s);
      stable_mass.push_back(s.scale * std::pow(floor, -s.index) / s.index);
    }
  }

  // Total jump mass added over one step with intensity `rate * dt`.
  double sample(double rate_dt, RngStream& rng) const {
    double total = 0.0;
    for (const auto& a : atoms) {
      total += a.location * static_cast<double>(rng.poisson(rate_dt * a.mass));
    }
    if (pos_exp_total > 0.0) {
      const long long n = rng.poisson(rate_dt * pos_exp_total);
      for (long long i = 0; i < n; ++i) {
        // pick a positive term by mass, draw from it above the floor
        double pick = rng.uniform01() * pos_exp_total;
        std::size_t j = 0;
        while (j + 1 < pos_exps.size() && pick > pos_exp_mass[j]) {
          pick -= pos_exp_mass[j];
          ++j;
        }
        const double x = floor + rng.exponential(1.0 / pos_exps[j].rate);
        if (exp_has_negative) {
          // thin to the signed exponential density
          double f_pos = 0.0, f_tot = 0.0;
          for (const auto& e : pos_exps) {
            f_pos += e.scale * std::exp(-e.rate * x);
          }
          for (const auto& e : measure->exp_terms()) {
            f_tot += e.scale * std::exp(-e.rate * x);
          }
          if (rng.uniform01() * f_pos > f_tot) continue;
        }
        total += x;
      }
    }
    for (std::size_t j = 0; j < stables.size(); ++j) {
      const long long n = rng.poisson(rate_dt * stable_mass[j]);
      for (long long i = 0; i < n; ++i) {
        // inverse-CDF of the Pareto tail x^{-1-index} above the floor
        double u = rng.uniform01();
        if (u <= 0.0) u = 0x1.0p-53;
        total += floor * std::pow(u, -1.0 / stables[j].index);
      }
    }
    return total;
  }
};

// int_{(lo, hi]} x dm for the jump measure (atoms + densities).
double first_moment_between(const LevyMeasure& m, double lo, double hi) {
  double r = 0.0;
  for (const auto& a : m.atom_terms()) {
    if (a.location > lo && a.location <= hi) r += a.mass * a.location;
  }
  auto exp_piece = [](const LevyExpTerm& e, double a, double b) {
    // int_a^b x s e^{-rx} dx
    auto prim = [&](double x) {
      return -(1.0 + e.rate * x) * std::exp(-e.rate * x) / (e.rate * e.rate);
    };
    return e.scale * (prim(b) - prim(a));
  };
  for (const auto& e : m.exp_terms()) r += exp_piece(e, lo, hi);
  for (const auto& s : m.stable_terms()) {
    // int_lo^hi x^{-index} dx
    const double g = s.index;
    if (g == 1.0) continue;  // excluded at construction
    if (lo == 0.0 && g > 1.0) {
      throw std::domain_error("first_moment_between: divergent at 0");
    }
    const double a = std::max(lo, 0.0);
    const double num = (g < 1.0 && a == 0.0)
                           ? std::pow(hi, 1.0 - g)
                           : std::pow(hi, 1.0 - g) - std::pow(a, 1.0 - g);
    r += s.scale * num / (1.0 - g);
  }
  return r;
}

struct EulerStepper {
  double drift_coef;  // alpha + int_{(floor,1]} x dpi (compensation)
  double beta;
  JumpSampler jumps;

  EulerStepper(const BranchingMechanism& psi, double floor)
      : drift_coef(psi.drift() +
                   first_moment_between(psi.levy(), floor, 1.0)),
        beta(psi.quadratic()),
        jumps(psi.levy(), floor) {}

  double step(double y, double dt, RngStream& rng) const {
    if (y <= 0.0) return 0.0;
    double incr = -drift_coef * y * dt;
    if (beta > 0.0) incr += std::sqrt(2.0 * beta * y * dt) * rng.normal();
    incr += jumps.sample(y * dt, rng);
    return std::max(0.0, y + incr);
  }
};

// ---- Galton-Watson approximation (quadratic mechanisms only) ------------

struct GwStepper {
  long long levels;
  double p0;   // per-lineage extinction probability over one step
  double eta;  // geometric parameter of the surviving lineage size

  GwStepper(const BranchingMechanism& psi, const PathGrid& grid,
            long long levels_)
      : levels(levels_) {
    if (!psi.levy().is_zero() || !(psi.quadratic() > 0.0)) {
      throw std::invalid_argument(
          "GaltonWatson scheme needs a quadratic mechanism (no jump part)");
    }
    const double alpha = psi.drift();
    const double beta = psi.quadratic();
    const double k = static_cast<double>(levels);
    const double birth = beta * k - 0.5 * alpha;
    const double death = beta * k + 0.5 * alpha;
    if (!(birth > 0.0)) {
      throw std::invalid_argument(
          "GaltonWatson scheme: levels too small for this drift");
    }
    const double dt = grid.dt;
    if (alpha == 0.0) {
      p0 = eta = birth * dt / (1.0 + birth * dt);
    } else {
      // linear birth-death transition: P(extinct by dt) and the geometric
      // parameter of the population given survival
      const double w = std::exp((birth - death) * dt);
      p0 = death * (w - 1.0) / (birth * w - death);
      eta = birth / death * p0;
    }
  }

  long long step(long long n, RngStream& rng) const {
    if (n <= 0) return 0;
    const long long survivors = rng.binomial(n, 1.0 - p0);
    if (survivors == 0) return 0;
    return survivors +
           rng.negative_binomial(static_cast<double>(survivors), 1.0 - eta);
  }
};

}  // namespace

std::vector<double> simulate_cb_path(const BranchingMechanism& psi, double x,
                                     const PathGrid& grid,
                                     const SchemeSpec& scheme,
                                     RngStream& rng) {
  if (x < 0.0) throw std::domain_error("simulate_cb_path: x < 0");
  std::vector<double> path(grid.n_times());
  path[0] = x;
  switch (scheme.kind) {
    case Scheme::ExactQuadratic: {
      if (!psi.is_quadratic_diffusion()) {
        throw std::invalid_argument(
            "ExactQuadratic scheme needs a quadratic mechanism");
      }
      for (int i = 1; i < grid.n_times(); ++i) {
        path[i] = quadratic_cb_step(psi.drift(), path[i - 1], grid.dt, rng,
                                    psi.quadratic());
      }
      break;
    }
    case Scheme::EulerDiffusion: {
      const EulerStepper stepper(psi, scheme.jump_floor);
      for (int i = 1; i < grid.n_times(); ++i) {
        path[i] = stepper.step(path[i - 1], grid.dt, rng);
      }
      break;
    }
    case Scheme::GaltonWatson: {
      const GwStepper stepper(psi, grid, scheme.gw_levels);
      const double k = static_cast<double>(scheme.gw_levels);
      long long n = std::llround(x * k);
      path[0] = static_cast<double>(n) / k;
      for (int i = 1; i < grid.n_times(); ++i) {
        n = stepper.step(n, rng);
        path[i] = static_cast<double>(n) / k;
      }
      break;
    }
  }
  return path;
}

namespace {

struct CascadeStepper {
  const CascadeParams& params;
  // exact-quadratic precomputed step constants
  double b0 = 0.0;        // psi0 drift
  double gb = 0.0;        // exp_integral(b0, dt)
  double jump_mean = 0.0; // beta e^{-b0 dt} exp_integral(b0, dt)
  double beta = 1.0;
  double imm_drift = 0.0; // phi drift (alpha-bar)
  double age_weight_avg = 0.0;  // (1/dt) int_0^dt v/g(b0,v) dv
  double age_weight_max = 1.0;
  // Euler machinery
  std::unique_ptr<EulerStepper> euler;
  std::unique_ptr<JumpSampler> imm_jumps;
  double imm_drift_eff = 0.0;  // alpha-bar + folded small nu jumps

  // v / exp_integral(b, v), the survival-weighted age density kernel.
  double age_weight(double v) const {
    const double z = b0 * v;
    if (std::fabs(z) < 1e-8) return 1.0 / (1.0 + 0.5 * z);
    return z / std::expm1(z);
  }

  explicit CascadeStepper(const CascadeParams& p) : params(p) {
    const BranchingMechanism& psi0 = p.psi0;
    const double dt = p.grid.dt;
    imm_drift = p.phi.drift();
    if (p.scheme.kind == Scheme::ExactQuadratic) {
      if (!psi0.is_quadratic_diffusion() || !p.phi.nu().is_zero()) {
        throw std::invalid_argument(
            "ExactQuadratic cascade needs a quadratic mechanism and a pure-"
            "drift immigration mechanism");
      }
      beta = psi0.quadratic();
      b0 = psi0.drift();
      gb = quad::exp_integral(b0, dt);
      jump_mean = beta * std::exp(-b0 * dt) * gb;
      age_weight_avg =
          integrate([&](double v) { return age_weight(v); }, 0.0, dt) / dt;
      age_weight_max = std::max(1.0, age_weight(dt));
    } else if (p.scheme.kind == Scheme::EulerDiffusion) {
      euler = std::make_unique<EulerStepper>(psi0, p.scheme.jump_floor);
      imm_jumps =
          std::make_unique<JumpSampler>(p.phi.nu(), p.scheme.jump_floor);
      imm_drift_eff =
          imm_drift +
          first_moment_between(p.phi.nu(), 0.0, p.scheme.jump_floor);
    } else {
      throw std::invalid_argument(
          "mutation cascade supports ExactQuadratic and EulerDiffusion");
    }
  }

  // Immigration mass reaching the step end when the driving type dies
  // inside the step, modelled as a linear rate decay c_old -> 0. The
  // surviving immigrant excursions then form a compound Poisson: count
  // Poisson((abar c_old / beta) avg), age v with density prop. to
  // v/g(b,v), mass Exp(beta e^{-b v} g(b,v)). Unlike the constant-rate
  // Gamma this law keeps its atom at zero, which the extinction-time
  // statistics depend on.
  double dying_rate_immigration(double c_old, RngStream& rng) const {
    const double dt = params.grid.dt;
    const double count_mean =
        imm_drift * c_old / beta * age_weight_avg;
    const long long n = rng.poisson(count_mean);
    double mass = 0.0;
    for (long long i = 0; i < n; ++i) {
      double v;
      do {
        v = rng.uniform01() * dt;
      } while (rng.uniform01() * age_weight_max > age_weight(v));
      mass += rng.exponential(beta * std::exp(-b0 * v) *
                              quad::exp_integral(b0, v));
    }
    return mass;
  }

  // One step of type k from state y, with the previous type's value at
  // the step endpoints (c_old, c_new) driving the immigration.
  double step(double y, double c_old, double c_new, RngStream& rng) const {
    const double dt = params.grid.dt;
    if (params.scheme.kind == Scheme::ExactQuadratic) {
      // CB(psi0) transition of the standing mass plus the exact(-in-law,
      // frozen-rate) Gamma immigration; trapezoidal rate freezing keeps
      // the per-step weak error at O(dt^3).
      const long long n = y > 0.0 ? rng.poisson(y / (beta * gb)) : 0;
      double shape = static_cast<double>(n);
      double extra = 0.0;
      if (imm_drift > 0.0 && c_old > 0.0 && c_new == 0.0) {
        extra = dying_rate_immigration(c_old, rng);
      } else {
        shape += imm_drift * 0.5 * (c_old + c_new) / beta;
      }
      return (shape > 0.0 ? rng.gamma(shape, jump_mean) : 0.0) + extra;
    }
    // Euler: immigration atoms at the left endpoint, then the branching
    // increment of the combined mass, then the immigration drift.
    double y_eff = y;
    if (imm_jumps != nullptr && c_old > 0.0) {
      y_eff += imm_jumps->sample(c_old * dt, rng);
    }
    double out = euler->step(y_eff, dt, rng);
    out += imm_drift_eff * c_old * dt;
    return out;
  }
};

}  // namespace

void for_each_cascade_path(
    const CascadeParams& params,
    const std::function<void(long long, const CascadePathView&)>& visit) {
  if (params.n_types < 1) {
    throw std::invalid_argument("cascade: n_types must be >= 1");
  }
  if (params.n_paths < 1) {
    throw std::invalid_argument("cascade: n_paths must be >= 1");
  }
  if (params.x0 < 0.0) throw std::invalid_argument("cascade: x0 < 0");
  if (!classify(params.psi0).conservative) {
    throw std::domain_error("cascade: psi0 is not conservative");
  }
  if (!classify(subtract_immigration(params.psi0, params.phi)).conservative) {
    throw std::domain_error("cascade: psi0 - phi is not conservative");
  }
  const CascadeStepper stepper(params);

  const int n_times = params.grid.n_times();
  const int rows = params.n_types + 2;  // Y^0..Y^n plus X
  const int n_threads = std::max(1, params.n_threads);

  std::atomic<long long> next_block{0};
  constexpr long long kBlock = 256;
  const long long n_blocks = (params.n_paths + kBlock - 1) / kBlock;

  auto worker = [&]() {
    std::vector<double> buf(static_cast<std::size_t>(rows) * n_times);
    for (;;) {
      const long long blk = next_block.fetch_add(1);
      if (blk >= n_blocks) break;
      const long long lo = blk * kBlock;
      const long long hi = std::min(params.n_paths, lo + kBlock);
      for (long long path = lo; path < hi; ++path) {
        RngStream rng = params.rng.stream(static_cast<std::uint64_t>(path));
        auto at = [&](int type, int i) -> double& {
          return buf[static_cast<std::size_t>(type) * n_times + i];
        };
        for (int k = 0; k <= params.n_types; ++k) {
          at(k, 0) = k == 0 ? params.x0 : 0.0;
        }
        for (int i = 1; i < n_times; ++i) {
          for (int k = 0; k <= params.n_types; ++k) {
            const double c_old = k > 0 ? at(k - 1, i - 1) : 0.0;
            const double c_new = k > 0 ? at(k - 1, i) : 0.0;
            at(k, i) = stepper.step(at(k, i - 1), c_old, c_new, rng);
          }
        }
        for (int i = 0; i < n_times; ++i) {
          double sum = 0.0;
          for (int k = 0; k <= params.n_types; ++k) sum += at(k, i);
          at(params.n_types + 1, i) = sum;
        }
        visit(path, CascadePathView(params.grid, params.n_types, buf.data()));
      }
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
}

PathEnsemble::PathEnsemble(const CascadeParams& params, bool keep_all_types)
    : grid_(params.grid),
      n_paths_(params.n_paths),
      n_types_(params.n_types),
      rng_(params.rng),
      scheme_(params.scheme) {
  const int n_times = grid_.n_times();
  x_rows_.resize(static_cast<std::size_t>(n_paths_) * n_times);
  y0_rows_.resize(static_cast<std::size_t>(n_paths_) * n_times);
  if (keep_all_types) {
    all_.resize(static_cast<std::size_t>(n_paths_) * (n_types_ + 1) * n_times);
  }
  // Per-block partial sums reduced in block order: the result is
  // bit-identical for every thread count.
  constexpr long long kBlock = 256;
  const long long n_blocks = (n_paths_ + kBlock - 1) / kBlock;
  std::vector<double> tail_partial(
      static_cast<std::size_t>(n_blocks) * n_times, 0.0);
  std::vector<double> x_partial(static_cast<std::size_t>(n_blocks) * n_times,
                                0.0);
  for_each_cascade_path(params, [&](long long path, const CascadePathView& v) {
    const long long blk = path / kBlock;
    for (int i = 0; i < n_times; ++i) {
      const double xv = v.x(i);
      x_rows_[static_cast<std::size_t>(path) * n_times + i] = xv;
      y0_rows_[static_cast<std::size_t>(path) * n_times + i] = v.y(0, i);
      tail_partial[static_cast<std::size_t>(blk) * n_times + i] +=
          v.y(n_types_, i);
      x_partial[static_cast<std::size_t>(blk) * n_times + i] += xv;
    }
    if (!all_.empty()) {
      for (int k = 0; k <= n_types_; ++k) {
        for (int i = 0; i < n_times; ++i) {
          all_[(static_cast<std::size_t>(path) * (n_types_ + 1) + k) *
                   n_times +
               i] = v.y(k, i);
        }
      }
    }
  });
  tail_mean_.assign(n_times, 0.0);
  x_mean_.assign(n_times, 0.0);
  for (long long b = 0; b < n_blocks; ++b) {
    for (int i = 0; i < n_times; ++i) {
      tail_mean_[i] += tail_partial[static_cast<std::size_t>(b) * n_times + i];
      x_mean_[i] += x_partial[static_cast<std::size_t>(b) * n_times + i];
    }
  }
  for (int i = 0; i < n_times; ++i) {
    tail_mean_[i] /= static_cast<double>(n_paths_);
    x_mean_[i] /= static_cast<double>(n_paths_);
  }
}

double PathEnsemble::x_at(long long path, int time_idx) const {
  return x_rows_[static_cast<std::size_t>(path) * grid_.n_times() + time_idx];
}

double PathEnsemble::y0_at(long long path, int time_idx) const {
  return y0_rows_[static_cast<std::size_t>(path) * grid_.n_times() + time_idx];
}

double PathEnsemble::y_at(long long path, int type, int time_idx) const {
  if (type == 0 && all_.empty()) return y0_at(path, time_idx);
  if (all_.empty()) {
    throw std::logic_error("PathEnsemble: mutant generations not stored");
  }
  return all_[(static_cast<std::size_t>(path) * (n_types_ + 1) + type) *
                  grid_.n_times() +
              time_idx];
}

void PathEnsemble::write_csv(std::ostream& os) const {
  if (all_.empty()) {
    throw std::logic_error("PathEnsemble: CSV export needs keep_all_types");
  }
  os << "path,t";
  for (int k = 0; k <= n_types_; ++k) os << ",Y" << k;
  os << ",X\n";
  char buf[64];
  for (long long p = 0; p < n_paths_; ++p) {
    for (int i = 0; i < grid_.n_times(); ++i) {
      os << p;
      std::snprintf(buf, sizeof buf, ",%.17g", grid_.time(i));
      os << buf;
      for (int k = 0; k <= n_types_; ++k) {
        std::snprintf(buf, sizeof buf, ",%.17g", y_at(p, k, i));
        os << buf;
      }
      std::snprintf(buf, sizeof buf, ",%.17g\n", x_at(p, i));
      os << buf;
    }
  }
}

PathEnsemble simulate_mutation_cascade(const CascadeParams& params,
                                       bool keep_all_types) {
  return PathEnsemble(params, keep_all_types);
}

MCEstimate mc_laplace(const PathEnsemble& ens, const LaplaceQuery& q) {
  if (q.lambda1 < 0.0 || q.lambda2 < 0.0) {
    throw std::domain_error("mc_laplace: negative lambda");
  }
  const int ix = ens.grid().index_of(q.t_x);
  const int iy = ens.grid().index_of(q.t_y);
  std::vector<double> vals(static_cast<std::size_t>(ens.n_paths()));
  for (long long p = 0; p < ens.n_paths(); ++p) {
    vals[static_cast<std::size_t>(p)] = std::exp(
        -q.lambda1 * ens.x_at(p, ix) - q.lambda2 * ens.y0_at(p, iy));
  }
  return estimate_from(vals);
}

double first_absorbed_time(const std::vector<double>& series,
                           const PathGrid& grid, double eps) {
  int last_alive = -1;
  for (int i = 0; i < static_cast<int>(series.size()); ++i) {
    if (series[i] > eps) last_alive = i;
  }
  if (last_alive + 1 >= static_cast<int>(series.size())) return kInf;
  return grid.time(last_alive + 1);
}

std::vector<ExtinctionTimes> extinction_times(const PathEnsemble& ens,
                                              double eps) {
  if (eps < 0.0) throw std::domain_error("extinction_times: eps < 0");
  std::vector<ExtinctionTimes> out(static_cast<std::size_t>(ens.n_paths()));
  const int n_times = ens.grid().n_times();
  std::vector<double> series(static_cast<std::size_t>(n_times));
  for (long long p = 0; p < ens.n_paths(); ++p) {
    for (int i = 0; i < n_times; ++i) series[i] = ens.y0_at(p, i);
    const double ty = first_absorbed_time(series, ens.grid(), eps);
    for (int i = 0; i < n_times; ++i) series[i] = ens.x_at(p, i);
    const double tx = first_absorbed_time(series, ens.grid(), eps);
    out[static_cast<std::size_t>(p)] = {ty, tx};
  }
  return out;
}

}  // namespace cblab

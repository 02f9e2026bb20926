#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "cblab/mechanisms.hpp"
#include "cblab/rng.hpp"

namespace cblab {

// Uniform time grid t_i = i * dt, i = 0..n_steps.
struct PathGrid {
  double dt = 0.0;
  int n_steps = 0;

  PathGrid() = default;
  PathGrid(double dt_, int n_steps_);
  int n_times() const { return n_steps + 1; }
  double time(int i) const { return dt * i; }
  double horizon() const { return dt * n_steps; }
  // Grid index of t (within 1e-9 relative); throws when t is off-grid.
  int index_of(double t) const;
};

enum class Scheme { ExactQuadratic, EulerDiffusion, GaltonWatson };

struct SchemeSpec {
  Scheme kind = Scheme::ExactQuadratic;
  // GaltonWatson: individuals carry mass 1/levels.
  int gw_levels = 1000;
  // EulerDiffusion: jumps below this size are dropped (branching part,
  // compensated range) or folded into the immigration drift (nu part).
  double jump_floor = 1e-4;
};

struct MCEstimate {
  double mean = 0.0;
  double stderr_val = 0.0;  // sample std / sqrt(n)
  long long n = 0;
};

MCEstimate estimate_from(const std::vector<double>& values);

// Exact-in-law draw of the quadratic CB transition: Z_dt given Z_0 = x for
// psi(v) = alpha v + beta v^2. The transition is a Poisson(x / (beta
// g(alpha,dt))) mixture of Gamma mass with per-jump mean beta e^{-alpha dt}
// g(alpha,dt), g(a,t) = int_0^t e^{as} ds; in particular
// P(Z_dt = 0) = exp(-x / (beta g(alpha,dt))) exactly.
double quadratic_cb_step(double alpha, double x, double dt, RngStream& rng,
                         double beta = 1.0);

// One CB path on the grid under the chosen scheme; 0 is absorbing.
std::vector<double> simulate_cb_path(const BranchingMechanism& psi, double x,
                                     const PathGrid& grid,
                                     const SchemeSpec& scheme, RngStream& rng);

struct CascadeParams {
  BranchingMechanism psi0;
  ImmigrationMechanism phi;
  double x0 = 1.0;
  PathGrid grid;
  int n_types = 1;  // highest mutant generation simulated (Y^0..Y^n)
  SchemeSpec scheme;
  RngSpec rng;
  long long n_paths = 1;
  int n_threads = 1;
};

// Read-only view of one simulated cascade path: rows Y^0..Y^n plus the
// exact sum X; valid only inside the visitor call.
class CascadePathView {
 public:
  CascadePathView(const PathGrid& grid, int n_types, const double* data)
      : grid_(&grid), n_types_(n_types), data_(data) {}
  const PathGrid& grid() const { return *grid_; }
  int n_types() const { return n_types_; }
  double y(int type, int time_idx) const {
    return data_[type * grid_->n_times() + time_idx];
  }
  double x(int time_idx) const {
    return data_[(n_types_ + 1) * grid_->n_times() + time_idx];
  }

 private:
  const PathGrid* grid_;
  int n_types_;
  const double* data_;
};

// Streams every cascade path through `visit(path_index, view)`. Paths are
// a pure function of (rng seed, path index); the visitor may run on
// worker threads and must synchronize its own writes (indexing by path is
// enough). Fixed-size path blocks keep any cross-path reduction done by
// the caller independent of the thread count.
void for_each_cascade_path(
    const CascadeParams& params,
    const std::function<void(long long, const CascadePathView&)>& visit);

// Simulated trajectories on a grid; Y0 and X are always stored, all
// mutant generations optionally.
class PathEnsemble {
 public:
  PathEnsemble(const CascadeParams& params, bool keep_all_types);

  const PathGrid& grid() const { return grid_; }
  long long n_paths() const { return n_paths_; }
  int n_types() const { return n_types_; }
  const RngSpec& rng() const { return rng_; }
  const SchemeSpec& scheme() const { return scheme_; }
  bool has_all_types() const { return !all_.empty(); }

  double x_at(long long path, int time_idx) const;
  double y0_at(long long path, int time_idx) const;
  double y_at(long long path, int type, int time_idx) const;

  // Mean of the last simulated generation per grid time (truncation
  // diagnostic) and of X.
  const std::vector<double>& tail_type_mean() const { return tail_mean_; }
  const std::vector<double>& x_mean() const { return x_mean_; }

  // CSV "path,t,Y0,...,Yn,X"; needs keep_all_types.
  void write_csv(std::ostream& os) const;

 private:
  PathGrid grid_;
  long long n_paths_;
  int n_types_;
  RngSpec rng_;
  SchemeSpec scheme_;
  std::vector<double> x_rows_, y0_rows_, all_;
  std::vector<double> tail_mean_, x_mean_;
};

PathEnsemble simulate_mutation_cascade(const CascadeParams& params,
                                       bool keep_all_types = false);

struct LaplaceQuery {
  double lambda1 = 0.0;  // weight of X_{t_x}
  double lambda2 = 0.0;  // weight of Y0_{t_y}
  double t_x = 0.0;
  double t_y = 0.0;
};

// Monte Carlo mean of exp(-l1 X_{t_x} - l2 Y0_{t_y}) over the ensemble.
MCEstimate mc_laplace(const PathEnsemble& ens, const LaplaceQuery& q);

struct ExtinctionTimes {
  double tau_y0;  // +inf when not absorbed within the horizon
  double tau_x;
};

// First grid time at or after which the component stays <= eps. Exact
// schemes use eps = 0 (the samplers return exact zeros).
std::vector<ExtinctionTimes> extinction_times(const PathEnsemble& ens,
                                              double eps);

// Same reduction for one component series.
double first_absorbed_time(const std::vector<double>& series,
                           const PathGrid& grid, double eps);

}  // namespace cblab

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cblab/mechanisms.hpp"
#include "cblab/quadratic.hpp"
#include "cblab/simulate.hpp"
#include "cblab/verify.hpp"

namespace cblab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One parsed run configuration (JSON file). Unknown keys are rejected;
// scalar keys can be overridden from the command line.
struct RunConfig {
  std::optional<quad::QuadraticParams> quadratic;
  std::optional<BranchingMechanism> mechanism;  // standalone psi block
  std::optional<BranchingMechanism> psi0;
  std::optional<ImmigrationMechanism> phi;
  std::optional<double> theta;

  PathGrid grid{1.0 / 64, 128};
  std::uint64_t seed = 42;
  long long n_paths = 20000;
  int n_types = 12;
  SchemeSpec scheme{};
  int threads = 1;

  std::vector<double> lambda_grid{0.5, 1.0, 2.0};
  std::vector<double> times{0.5, 1.0};
  std::vector<std::pair<double, double>> lambda_pairs{{1.0, 1.0}, {0.5, 2.0}};
  double u = 0.5;
  double t = 1.0;
  double z_gate = 4.0;
  double abs_gate = 1e-6;
  double bucket_delta = 0.05;
  int iteration_n = 30;
  double iteration_gap_tol = 1e-6;
  double cond_u = 1.0;
  double cond_lambda2 = 1.0;
  std::vector<double> cond_times{10.0, 25.0, 50.0};

  std::string out_dir = "out";
  std::string method = "both";  // laplace: ode | closed | both
  std::vector<std::string> suites;  // verify: empty = all

  // Effective branching/immigration pair: explicit psi0/phi blocks, or the
  // quadratic parameters, or mechanism+theta via the shift duality.
  BranchingMechanism effective_psi0() const;
  ImmigrationMechanism effective_phi() const;

  VerifyConfig verify_config() const;  // needs the quadratic block
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace cblab

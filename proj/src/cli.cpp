#include "cblab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cblab/config.hpp"
#include "cblab/laplace.hpp"
#include "cblab/numerics.hpp"
#include "cblab/quadratic.hpp"
#include "cblab/verify.hpp"

namespace cblab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream os(path, std::ios::binary);  // LF line endings everywhere
  if (!os) throw ConfigError("cannot open output file " + path.string());
  return os;
}

const char* criticality_name(Criticality c) {
  switch (c) {
    case Criticality::Subcritical: return "subcritical";
    case Criticality::Critical: return "critical";
    case Criticality::Supercritical: return "supercritical";
  }
  return "?";
}

int cmd_mechanism(const RunConfig& cfg) {
  BranchingMechanism psi0 = cfg.effective_psi0();
  ImmigrationMechanism phi = cfg.effective_phi();
  const BranchingMechanism combined = subtract_immigration(psi0, phi);

  auto describe = [&](const char* name, const BranchingMechanism& m) {
    const MechanismClass mc = classify(m);
    const ShiftRange sr = shift_range(m);
    std::cout << name << ": class=" << criticality_name(mc.criticality)
              << " conservative=" << (mc.conservative ? "true" : "false")
              << (mc.conservative_is_numerical ? " (numerical)" : "")
              << " theta0="
              << (sr.theta0 == kInf ? std::string("inf") : fmt(sr.theta0))
              << " boundary="
              << (sr.boundary_admissible ? "closed" : "open") << "\n";
  };
  describe("psi0", psi0);
  describe("psi0-phi", combined);

  auto os = open_out(cfg.out_dir, "mechanism.csv");
  os << "lambda,psi,phi,psi_minus_phi\n";
  for (double lam : cfg.lambda_grid) {
    const double p = psi0.value(lam);
    const double f = phi.value(lam);
    os << fmt(lam) << ',' << fmt(p) << ',' << fmt(f) << ',' << fmt(p - f)
       << '\n';
  }
  std::cout << "wrote " << cfg.out_dir << "/mechanism.csv\n";
  return 0;
}

int cmd_laplace(const RunConfig& cfg) {
  const bool use_closed = cfg.method != "ode";
  const bool use_ode = cfg.method != "closed";
  if (use_closed && !cfg.quadratic.has_value()) {
    throw ConfigError("laplace: closed-form method needs the quadratic block");
  }
  const BranchingMechanism psi0 = cfg.effective_psi0();
  const ImmigrationMechanism phi = cfg.effective_phi();
  const double x = cfg.quadratic.has_value() ? cfg.quadratic->x : 1.0;

  auto os = open_out(cfg.out_dir, "laplace.csv");
  os << "t,lambda1,lambda2,u,w0,laplace" << (cfg.method == "both" ? ",agreement\n" : "\n");
  double worst_gap = 0.0;
  for (double t : cfg.times) {
    for (const auto& [l1, l2] : cfg.lambda_pairs) {
      const double u_row = std::min(cfg.u, t);
      const bool two_time = u_row < t;
      std::optional<double> closed, ode;
      if (use_closed) {
        closed = two_time ? quad::joint_exponent_two_time(*cfg.quadratic, l1,
                                                          l2, u_row, t)
                          : quad::joint_exponent(*cfg.quadratic, l1, l2, t);
      }
      if (use_ode) {
        ode = two_time
                  ? solve_joint_exponent_two_time(psi0, phi, u_row, t, l1, l2)
                  : solve_joint_exponent(psi0, phi, t, l1, l2).w0;
      }
      const double w0 = use_closed ? *closed : *ode;
      os << fmt(t) << ',' << fmt(l1) << ',' << fmt(l2) << ',' << fmt(u_row)
         << ',' << fmt(w0) << ',' << fmt(std::exp(-x * w0));
      if (cfg.method == "both") {
        const double gap = std::fabs(*closed - *ode);
        worst_gap = std::max(worst_gap, gap);
        os << ',' << fmt(gap);
      }
      os << '\n';
    }
  }
  std::cout << "wrote " << cfg.out_dir << "/laplace.csv";
  if (cfg.method == "both") std::cout << " (max gap " << worst_gap << ")";
  std::cout << "\n";
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  CascadeParams params{cfg.effective_psi0(),
                       cfg.effective_phi(),
                       cfg.quadratic.has_value() ? cfg.quadratic->x : 1.0,
                       cfg.grid,
                       cfg.n_types,
                       cfg.scheme,
                       RngSpec{cfg.seed},
                       cfg.n_paths,
                       cfg.threads};
  const PathEnsemble ens = simulate_mutation_cascade(params, true);
  {
    auto os = open_out(cfg.out_dir, "ensemble.csv");
    ens.write_csv(os);
  }
  {
    auto os = open_out(cfg.out_dir, "summary.csv");
    os << "t,mean_X,mean_Y0,frac_X_zero,frac_Y0_zero,tail_mean\n";
    const int n_times = ens.grid().n_times();
    for (int i = 0; i < n_times; ++i) {
      double mean_y0 = 0.0;
      long long xz = 0, yz = 0;
      for (long long p = 0; p < ens.n_paths(); ++p) {
        mean_y0 += ens.y0_at(p, i);
        xz += ens.x_at(p, i) == 0.0;
        yz += ens.y0_at(p, i) == 0.0;
      }
      mean_y0 /= static_cast<double>(ens.n_paths());
      os << fmt(ens.grid().time(i)) << ',' << fmt(ens.x_mean()[i]) << ','
         << fmt(mean_y0) << ','
         << fmt(static_cast<double>(xz) / ens.n_paths()) << ','
         << fmt(static_cast<double>(yz) / ens.n_paths()) << ','
         << fmt(ens.tail_type_mean()[i]) << '\n';
    }
  }
  std::cout << "wrote " << cfg.out_dir << "/ensemble.csv and summary.csv ("
            << cfg.n_paths << " paths)\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  const VerifyConfig vc = cfg.verify_config();
  auto wanted = [&](const std::string& name) {
    if (cfg.suites.empty()) return true;
    for (const auto& s : cfg.suites) {
      if (s == name) return true;
    }
    return false;
  };

  std::vector<VerificationReport> reports;
  if (wanted("combined-law")) reports.push_back(verify_combined_law(vc));
  if (wanted("joint")) reports.push_back(verify_joint_law(vc));
  if (wanted("extinction")) reports.push_back(verify_extinction_laws(vc));
  if (wanted("shift")) {
    const double theta = cfg.theta.value_or(vc.params.theta);
    const BranchingMechanism m =
        cfg.mechanism.has_value() ? *cfg.mechanism : vc.params.psi();
    reports.push_back(
        verify_shift_identities(m, theta, cfg.lambda_grid, vc));
  }
  if (wanted("iteration")) reports.push_back(verify_iteration_convergence(vc));
  if (wanted("conditional")) reports.push_back(verify_conditional_limit(vc));
  if (reports.empty()) throw ConfigError("verify: no matching suite");

  bool all_pass = true;
  for (const auto& rep : reports) {
    auto os = open_out(cfg.out_dir, "verify_" + rep.suite + ".csv");
    rep.write_csv(os);
    rep.write_text(std::cout);
    all_pass = all_pass && rep.pass();
  }
  std::cout << (all_pass ? "ALL SUITES PASS" : "SUITE FAILURES") << "\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"continuous-state branching process laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  app.add_option("--config", config_path, "run configuration (JSON)");
  app.add_option("--seed", seed_override, "override mc.seed");
  app.add_option("--out", out_override, "override output.dir");

  auto* mech = app.add_subcommand("mechanism", "evaluate mechanisms");
  auto* lap = app.add_subcommand("laplace", "Laplace exponents to CSV");
  std::optional<std::string> method_override;
  lap->add_option("--method", method_override, "ode | closed | both");
  auto* sim = app.add_subcommand("simulate", "simulate the mutation cascade");
  auto* ver = app.add_subcommand("verify", "run verification suites");
  std::vector<std::string> suite_filter;
  ver->add_option("--suite", suite_filter, "suite filter (repeatable)");
  // global flags may follow the subcommand
  for (auto* sub : {mech, lap, sim, ver}) sub->fallthrough();

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  storage.insert(storage.begin(), "cblab");
  argv.reserve(storage.size());
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      app.exit(e);
      return 0;
    }
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (config_path.empty()) throw ConfigError("--config is required");
    RunConfig cfg = parse_config_file(config_path);
    if (seed_override.has_value()) cfg.seed = *seed_override;
    if (out_override.has_value()) cfg.out_dir = *out_override;
    if (method_override.has_value()) {
      if (*method_override != "ode" && *method_override != "closed" &&
          *method_override != "both") {
        throw ConfigError("--method: expected ode | closed | both");
      }
      cfg.method = *method_override;
    }
    if (!suite_filter.empty()) cfg.suites = suite_filter;

    if (mech->parsed()) return cmd_mechanism(cfg);
    if (lap->parsed()) return cmd_laplace(cfg);
    if (sim->parsed()) return cmd_simulate(cfg);
    if (ver->parsed()) return cmd_verify(cfg);
    throw ConfigError("no subcommand");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cblab

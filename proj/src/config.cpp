#include "cblab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cblab {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (allowed.find(key) == allowed.end()) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

double need_number(const json& j, const std::string& key,
                   const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError(where + ": missing numeric key '" + key + "'");
  }
  return j[key].get<double>();
}

LevyMeasure parse_levy(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ".levy: expected an array");
  LevyMeasure m;
  int idx = 0;
  for (const auto& term : j) {
    const std::string at = where + ".levy[" + std::to_string(idx++) + "]";
    if (!term.is_object() || !term.contains("kind")) {
      throw ConfigError(at + ": expected {kind, ...}");
    }
    const std::string kind = term["kind"].get<std::string>();
    if (kind == "atom") {
      reject_unknown(term, {"kind", "location", "mass"}, at);
      m.add(LevyMeasure::single_atom(need_number(term, "location", at),
                                     need_number(term, "mass", at)));
    } else if (kind == "exp") {
      reject_unknown(term, {"kind", "scale", "rate"}, at);
      m.add(LevyMeasure::exp_density(need_number(term, "scale", at),
                                     need_number(term, "rate", at)));
    } else if (kind == "stable") {
      reject_unknown(term, {"kind", "scale", "index"}, at);
      m.add(LevyMeasure::stable_density(need_number(term, "scale", at),
                                        need_number(term, "index", at)));
    } else {
      throw ConfigError(at + ": unknown levy kind '" + kind + "'");
    }
  }
  return m;
}

BranchingMechanism parse_branching(const json& j, const std::string& where) {
  reject_unknown(j, {"alpha", "beta", "levy"}, where);
  LevyMeasure levy;
  if (j.contains("levy")) levy = parse_levy(j["levy"], where);
  try {
    return BranchingMechanism(need_number(j, "alpha", where),
                              need_number(j, "beta", where), std::move(levy));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

ImmigrationMechanism parse_immigration(const json& j,
                                       const std::string& where) {
  reject_unknown(j, {"alpha_bar", "levy"}, where);
  LevyMeasure levy;
  if (j.contains("levy")) levy = parse_levy(j["levy"], where);
  try {
    return ImmigrationMechanism(need_number(j, "alpha_bar", where),
                                std::move(levy));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Scheme parse_scheme(const std::string& s) {
  if (s == "exact-quadratic") return Scheme::ExactQuadratic;
  if (s == "euler") return Scheme::EulerDiffusion;
  if (s == "galton-watson") return Scheme::GaltonWatson;
  throw ConfigError("mc.scheme: unknown scheme '" + s + "'");
}

}  // namespace

BranchingMechanism RunConfig::effective_psi0() const {
  if (psi0.has_value()) return *psi0;
  if (quadratic.has_value()) return quadratic->psi0();
  if (mechanism.has_value() && theta.has_value()) return *mechanism;
  throw ConfigError("config: no psi0 block, quadratic block or mechanism");
}

ImmigrationMechanism RunConfig::effective_phi() const {
  if (phi.has_value()) return *phi;
  if (quadratic.has_value()) return quadratic->phi();
  if (mechanism.has_value() && theta.has_value()) {
    return shift_down_immigration(*mechanism, *theta);
  }
  return ImmigrationMechanism::zero();
}

VerifyConfig RunConfig::verify_config() const {
  if (!quadratic.has_value()) {
    throw ConfigError("config: verify suites need the quadratic block");
  }
  VerifyConfig v;
  v.params = *quadratic;
  v.grid = grid;
  v.n_paths = n_paths;
  v.seed = seed;
  v.n_threads = threads;
  v.n_types = n_types;
  v.scheme = scheme;
  v.z_gate = z_gate;
  v.abs_gate = abs_gate;
  v.lambdas = lambda_grid;
  v.times = times;
  v.lambda_pairs = lambda_pairs;
  v.u_time = u;
  v.t_time = t;
  v.bucket_delta = bucket_delta;
  v.iteration_n = iteration_n;
  v.iteration_gap_tol = iteration_gap_tol;
  v.cond_u = cond_u;
  v.cond_lambda2 = cond_lambda2;
  v.cond_times = cond_times;
  return v;
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  reject_unknown(j,
                 {"quadratic", "mechanism", "psi0", "phi", "theta", "grid",
                  "mc", "lambda_grid", "times", "lambda_pairs", "u", "t",
                  "gates", "bucket_delta", "iteration", "conditional",
                  "output", "method", "suites"},
                 "config");
  RunConfig cfg;
  if (j.contains("quadratic")) {
    const auto& q = j["quadratic"];
    reject_unknown(q, {"alpha", "theta", "x"}, "quadratic");
    try {
      cfg.quadratic = quad::QuadraticParams(
          need_number(q, "alpha", "quadratic"),
          need_number(q, "theta", "quadratic"), need_number(q, "x", "quadratic"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("quadratic: ") + e.what());
    }
  }
  if (j.contains("mechanism")) {
    cfg.mechanism = parse_branching(j["mechanism"], "mechanism");
  }
  if (j.contains("psi0")) cfg.psi0 = parse_branching(j["psi0"], "psi0");
  if (j.contains("phi")) cfg.phi = parse_immigration(j["phi"], "phi");
  if (j.contains("theta")) cfg.theta = j["theta"].get<double>();
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    reject_unknown(g, {"dt", "n_steps"}, "grid");
    try {
      cfg.grid = PathGrid(need_number(g, "dt", "grid"),
                          static_cast<int>(need_number(g, "n_steps", "grid")));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("grid: ") + e.what());
    }
  }
  if (j.contains("mc")) {
    const auto& mc = j["mc"];
    reject_unknown(mc, {"seed", "n_paths", "n_types", "scheme", "threads",
                        "gw_levels", "jump_floor"},
                   "mc");
    if (mc.contains("seed")) cfg.seed = mc["seed"].get<std::uint64_t>();
    if (mc.contains("n_paths")) cfg.n_paths = mc["n_paths"].get<long long>();
    if (mc.contains("n_types")) cfg.n_types = mc["n_types"].get<int>();
    if (mc.contains("threads")) cfg.threads = mc["threads"].get<int>();
    if (mc.contains("scheme")) {
      cfg.scheme.kind = parse_scheme(mc["scheme"].get<std::string>());
    }
    if (mc.contains("gw_levels")) {
      cfg.scheme.gw_levels = mc["gw_levels"].get<int>();
    }
    if (mc.contains("jump_floor")) {
      cfg.scheme.jump_floor = mc["jump_floor"].get<double>();
    }
  }
  if (j.contains("lambda_grid")) {
    cfg.lambda_grid = j["lambda_grid"].get<std::vector<double>>();
  }
  if (j.contains("times")) cfg.times = j["times"].get<std::vector<double>>();
  if (j.contains("lambda_pairs")) {
    cfg.lambda_pairs.clear();
    for (const auto& p : j["lambda_pairs"]) {
      if (!p.is_array() || p.size() != 2) {
        throw ConfigError("lambda_pairs: expected [l1, l2] pairs");
      }
      cfg.lambda_pairs.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
  }
  if (j.contains("u")) cfg.u = j["u"].get<double>();
  if (j.contains("t")) cfg.t = j["t"].get<double>();
  if (j.contains("gates")) {
    const auto& g = j["gates"];
    reject_unknown(g, {"z", "abs"}, "gates");
    if (g.contains("z")) cfg.z_gate = g["z"].get<double>();
    if (g.contains("abs")) cfg.abs_gate = g["abs"].get<double>();
  }
  if (j.contains("bucket_delta")) {
    cfg.bucket_delta = j["bucket_delta"].get<double>();
  }
  if (j.contains("iteration")) {
    const auto& it = j["iteration"];
    reject_unknown(it, {"n", "gap_tol"}, "iteration");
    if (it.contains("n")) cfg.iteration_n = it["n"].get<int>();
    if (it.contains("gap_tol")) {
      cfg.iteration_gap_tol = it["gap_tol"].get<double>();
    }
  }
  if (j.contains("conditional")) {
    const auto& c = j["conditional"];
    reject_unknown(c, {"u", "lambda2", "times"}, "conditional");
    if (c.contains("u")) cfg.cond_u = c["u"].get<double>();
    if (c.contains("lambda2")) cfg.cond_lambda2 = c["lambda2"].get<double>();
    if (c.contains("times")) {
      cfg.cond_times = c["times"].get<std::vector<double>>();
    }
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    reject_unknown(o, {"dir"}, "output");
    if (o.contains("dir")) cfg.out_dir = o["dir"].get<std::string>();
  }
  if (j.contains("method")) {
    cfg.method = j["method"].get<std::string>();
    if (cfg.method != "ode" && cfg.method != "closed" &&
        cfg.method != "both") {
      throw ConfigError("method: expected ode | closed | both");
    }
  }
  if (j.contains("suites")) {
    cfg.suites = j["suites"].get<std::vector<std::string>>();
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace cblab

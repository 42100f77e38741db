// sublap: batch driver for the algebra, solver, harness and geometry modules.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sublap/cc_distance.hpp"
#include "sublap/error.hpp"
#include "sublap/io.hpp"
#include "sublap/parallel.hpp"
#include "sublap/regularity.hpp"
#include "sublap/rng.hpp"
#include "sublap/roots.hpp"
#include "sublap/solver.hpp"

namespace fs = std::filesystem;
using namespace sublap;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kValidation = 2, kNumerical = 3 };

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out = ".";
};

void add_globals(CLI::App* cmd, Globals& g) {
  cmd->add_option("--config", g.config, "JSON config path");
  cmd->add_option("--seed", g.seed, "root seed");
  cmd->add_option("--threads", g.threads, "worker threads (default: SUBLAP_THREADS or 1)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", g.out, "output directory");
}

Json load_config(const Globals& g, bool required) {
  if (g.config.empty()) {
    if (required) throw ValidationError("--config is required for this command");
    return Json::object({{"schema_version", kSchemaVersion}});
  }
  return read_json_file(g.config);
}

void emit(const Globals& g, const std::string& name, const std::string& contents) {
  const fs::path path = fs::path(g.out) / name;
  write_atomic(path, contents);
  std::cout << path.string() << "\n";
}

std::vector<double> number_list(const Json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) throw ValidationError(context + " must be a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ValidationError(context + " must contain only numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

int read_n(ObjectReader& r, std::optional<int> flag) {
  const long long n = flag ? *flag : r.integer("n", 3);
  if (flag && r.has("n") && r.integer("n") != *flag) throw ValidationError("--n disagrees with the config's n");
  if (n < 2 || n > 8) throw ValidationError("n must lie in 2..8");
  return static_cast<int>(n);
}

int cmd_algebra(const Globals& g, std::optional<int> n_flag) {
  const Json cfg = load_config(g, false);
  ObjectReader r(cfg, "algebra");
  check_schema_version(r);
  const int n = read_n(r, n_flag);
  r.finish();
  emit(g, "algebra.json", dump(algebra_to_json(su_basis(n), su_frame(n))));
  return kOk;
}

int cmd_roots(const Globals& g, std::optional<int> n_flag) {
  const Json cfg = load_config(g, false);
  ObjectReader r(cfg, "roots");
  check_schema_version(r);
  const int n = read_n(r, n_flag);
  r.finish();
  const LieAlgebra algebra = su_basis(n);
  const RootDatum datum = root_space_decomposition(algebra, cartan_subalgebra(algebra));
  emit(g, "roots.json", dump(roots_to_json(datum, horizontal_frame(datum))));
  return kOk;
}

// Splits the solve section from command-specific keys.
Json take(Json& j, const std::string& key) {
  if (!j.contains(key)) return nullptr;
  Json v = j[key];
  j.erase(key);
  return v;
}

SolutionReport run_solve(const SolveConfig& cfg, const std::string& method, std::optional<std::uint64_t> init_seed) {
  if (method == "linear") {
    SolutionReport rep = minimize(cfg, linear_solve_p2(cfg));
    return rep;
  }
  if (init_seed) return minimize(cfg, random_field(cfg, *init_seed));
  return minimize(cfg);
}

int cmd_solve(const Globals& g) {
  Json cfg_json = load_config(g, true);
  const Json method_j = take(cfg_json, "method");
  const Json init_j = take(cfg_json, "init_seed");
  if (!cfg_json.contains("schema_version")) throw ValidationError("solve: missing key 'schema_version'");
  const SolveConfig cfg = solve_config_from_json(cfg_json, g.seed, "solve");
  std::string method = "minimize";
  if (!method_j.is_null()) {
    if (!method_j.is_string()) throw ValidationError("solve.method must be a string");
    method = method_j.get<std::string>();
    if (method != "minimize" && method != "linear") throw ValidationError("solve.method must be 'minimize' or 'linear'");
  }
  std::optional<std::uint64_t> init_seed;
  if (!init_j.is_null()) {
    if (!init_j.is_number_unsigned()) throw ValidationError("solve.init_seed must be a non-negative integer");
    init_seed = init_j.get<std::uint64_t>();
  }
  const SolutionReport rep = run_solve(cfg, method, init_seed);
  Json doc = {{"schema_version", kSchemaVersion}, {"config", to_json(cfg)}, {"method", method}, {"report", to_json(rep)}};
  emit(g, "solution.json", dump(doc));
  emit(g, "coefficients.json", dump(to_json(rep.coefficients)));
  emit(g, "energy_trace.csv", energy_trace_csv(rep));
  return rep.converged() ? kOk : kNumerical;
}

int cmd_sweep(const Globals& g) {
  Json cfg_json = load_config(g, true);
  const Json eps_j = take(cfg_json, "eps_list");
  if (eps_j.is_null()) throw ValidationError("sweep: missing key 'eps_list'");
  if (!cfg_json.contains("schema_version")) throw ValidationError("sweep: missing key 'schema_version'");
  const std::vector<double> eps = number_list(eps_j, "sweep.eps_list");
  const SolveConfig cfg = solve_config_from_json(cfg_json, g.seed, "sweep");
  std::vector<SolutionReport> reps;
  try {
    reps = epsilon_sweep(cfg, eps);
  } catch (const PreconditionError& e) {
    throw ValidationError(std::string("sweep: ") + e.what());
  }
  Json list = Json::array();
  std::string csv = "eps,energy,grad_norm,weak_residual,iterations,omega_max,status\n";
  bool ok = true;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    list.push_back(to_json(reps[i]));
    csv += format_double(eps[i]) + "," + format_double(reps[i].energy_trace.empty() ? 0.0 : reps[i].energy_trace.back()) +
           "," + format_double(reps[i].final_gradient_norm) + "," + format_double(reps[i].weak_residual) + "," +
           std::to_string(reps[i].iterations) + "," + format_double(reps[i].omega_stats.max) + "," +
           to_string(reps[i].status) + "\n";
    emit(g, "energy_trace_" + std::to_string(i) + ".csv", energy_trace_csv(reps[i]));
    ok = ok && reps[i].converged();
  }
  emit(g, "sweep.json", dump({{"schema_version", kSchemaVersion}, {"config", to_json(cfg)}, {"reports", list}}));
  emit(g, "sweep.csv", csv);
  return ok ? kOk : kNumerical;
}

int cmd_verify(const Globals& g) {
  const Json cfg_json = load_config(g, true);
  ObjectReader r(cfg_json, "verify");
  check_schema_version(r);
  const SolveConfig cfg = solve_config_from_json(r.required("solve"), g.seed, "verify.solve");
  CutoffSpec spec;
  if (const Json* c = r.optional("cutoff")) {
    ObjectReader cr(*c, "verify.cutoff");
    spec.r_inner = cr.number("r_inner", spec.r_inner);
    spec.r_outer = cr.number("r_outer", spec.r_outer);
    spec.profile = static_cast<int>(cr.integer("profile", spec.profile));
    cr.finish();
  }
  spec.center = GroupElement::identity(cfg.group_n);
  try {
    spec.validate();
  } catch (const InputError& e) {
    throw ValidationError(std::string("verify.cutoff: ") + e.what());
  }
  std::vector<double> betas = {0.0, 1.0, 2.0};
  if (const Json* b = r.optional("betas")) betas = number_list(*b, "verify.betas");
  for (double b : betas)
    if (b < 0.0) throw ValidationError("verify.betas must be >= 0");
  CheckOptions opts;
  const long long samples = r.integer("samples", 10000);
  if (samples < 100) throw ValidationError("verify.samples must be >= 100");
  opts.samples = static_cast<std::size_t>(samples);
  opts.refinement_levels = static_cast<int>(r.integer("refinement_levels", 2));
  if (opts.refinement_levels < 1 || opts.refinement_levels > 6) throw ValidationError("verify.refinement_levels must lie in 1..6");
  opts.seed = derive_seed(g.seed, "verify", 0);
  int level_s = 1;
  std::vector<double> ks = {0.0, 0.1, -0.1};
  double q_exp = 4.0;
  if (const Json* l = r.optional("level_set")) {
    ObjectReader lr(*l, "verify.level_set");
    level_s = static_cast<int>(lr.integer("s", level_s));
    if (const Json* k = lr.optional("k")) ks = number_list(*k, "verify.level_set.k");
    q_exp = lr.number("q", q_exp);
    lr.finish();
  }
  const double sup_radius = r.number("sup_radius", spec.r_outer);
  r.finish();

  const SolutionReport rep = minimize(cfg);
  const SolvedField field = SolvedField::from(rep, cfg);
  std::string csv = "check_id,beta,r_in,r_out,eps,lhs,rhs_sum,ratio,N\n";
  Json checks = Json::array();
  bool finite = true;
  auto row = [&](const std::string& id, double beta, double eps, double lhs, double rhs, double ratio, std::size_t N,
                 const std::vector<double>& trace) {
    csv += id + "," + format_double(beta) + "," + format_double(spec.r_inner) + "," + format_double(spec.r_outer) + "," +
           format_double(eps) + "," + format_double(lhs) + "," + format_double(rhs) + "," + format_double(ratio) + "," +
           std::to_string(N) + "\n";
    Json t = Json::array();
    for (double x : trace) t.push_back(std::isfinite(x) ? Json(x) : Json(format_double(x)));
    checks.push_back({{"check_id", id}, {"beta", beta}, {"ratio", std::isfinite(ratio) ? Json(ratio) : Json(format_double(ratio))},
                      {"refinement_trace", t}});
    bool ok = std::isfinite(lhs) && std::isfinite(rhs) && std::isfinite(ratio);
    for (double x : trace) ok = ok && std::isfinite(x);
    finite = finite && ok;
  };
  for (const auto& e : inequality_battery(field, spec, betas, opts)) {
    const double eps = e.which == Inequality::L32 ? field.epsilon : 0.0;
    row(to_string(e.which), e.beta, eps, e.report.lhs, e.report.rhs_sum(), e.report.ratio, e.report.samples,
        e.report.refinement_trace);
  }
  if (field.flux.p >= 2.0) {
    for (double k : ks) {
      const LevelSetReport l =
          level_set_caccioppoli(field, level_s, k, spec.r_inner, spec.r_outer, q_exp, opts, spec.center);
      row("L42[s=" + std::to_string(level_s) + ";k=" + format_double(k) + "]", 0.0, 0.0, l.ratio.lhs,
          l.ratio.rhs_sum(), l.ratio.ratio, l.ratio.samples, l.ratio.refinement_trace);
    }
  }
  const SupAvgReport sup0 = sup_avg_ratio(field, spec.center, sup_radius, 0.0, opts);
  row("SUP", 0.0, 0.0, sup0.sup, sup0.average, sup0.ratio, sup0.samples, sup0.refinement_trace);
  if (field.epsilon > 0.0) {
    const SupAvgReport supe = sup_avg_ratio(field, spec.center, sup_radius, field.epsilon, opts);
    row("SUP_EPS", 0.0, field.epsilon, supe.sup, supe.average, supe.ratio, supe.samples, supe.refinement_trace);
  }
  emit(g, "verify.csv", csv);
  emit(g, "verify_summary.json",
       dump({{"schema_version", kSchemaVersion},
             {"solve", to_json(rep)},
             {"all_finite", finite},
             {"checks", checks}}));
  return finite ? kOk : kNumerical;
}

int cmd_ccdist(const Globals& g) {
  const Json cfg_json = load_config(g, false);
  ObjectReader r(cfg_json, "ccdist");
  check_schema_version(r);
  const int n = read_n(r, std::nullopt);
  const GroupElement x = r.has("x") ? group_from_json(r.required("x"), n, "ccdist.x") : GroupElement::identity(n);
  const GroupElement y = r.has("y") ? group_from_json(r.required("y"), n, "ccdist.y") : GroupElement::identity(n);
  std::optional<double> eps;
  if (r.has("eps")) {
    eps = r.number("eps");
    if (!(*eps > 0.0 && *eps <= 1.0)) throw ValidationError("ccdist.eps must lie in (0, 1]");
  }
  DistanceBudget budget;
  if (const Json* b = r.optional("budget")) budget = budget_from_json(*b, "ccdist.budget");
  r.finish();
  const std::uint64_t seed = derive_seed(g.seed, "ccdist", 0);
  const DistanceResult res = eps ? riemannian_distance_eps(x, y, *eps, budget, seed) : cc_upper_bound(x, y, budget, seed);
  Json doc = to_json(res);
  doc["schema_version"] = kSchemaVersion;
  if (eps) doc["eps"] = *eps;
  emit(g, "ccdist.json", dump(doc));
  return res.feasible ? kOk : kNumerical;
}

int cmd_ballvol(const Globals& g) {
  const Json cfg_json = load_config(g, false);
  ObjectReader r(cfg_json, "ballvol");
  check_schema_version(r);
  const int n = read_n(r, std::nullopt);
  std::vector<double> radii = {0.4, 0.3, 0.2, 0.15, 0.1};
  if (const Json* rr = r.optional("radii")) radii = number_list(*rr, "ballvol.radii");
  const long long samples = r.integer("samples", 20000);
  if (samples < 1) throw ValidationError("ballvol.samples must be positive");
  const std::string gauge = r.string("gauge", "sub_riemannian");
  GaugeKind kind;
  if (gauge == "sub_riemannian") kind = GaugeKind::SubRiemannian;
  else if (gauge == "riemannian") kind = GaugeKind::Riemannian;
  else if (gauge == "epsilon") kind = GaugeKind::Epsilon;
  else throw ValidationError("ballvol.gauge must be sub_riemannian, riemannian or epsilon");
  const double eps = r.number("eps", 1.0);
  r.finish();
  BallVolumeReport rep;
  try {
    rep = ball_volume_estimate(radii, static_cast<std::size_t>(samples), derive_seed(g.seed, "ballvol", 0), kind, eps, n);
  } catch (const InputError& e) {
    throw ValidationError(std::string("ballvol: ") + e.what());
  }
  std::string csv = "r,volume,stderr,hits\n";
  for (std::size_t i = 0; i < rep.radii.size(); ++i)
    csv += format_double(rep.radii[i]) + "," + format_double(rep.volumes[i]) + "," +
           format_double(rep.standard_errors[i]) + "," + std::to_string(rep.hits[i]) + "\n";
  emit(g, "ballvol.csv", csv);
  emit(g, "ballvol.json",
       dump({{"schema_version", kSchemaVersion}, {"gauge", gauge}, {"samples", samples}, {"slope", rep.slope}}));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sublap: subelliptic p-Laplacian toolkit on SU(n)"};
  app.require_subcommand(1);
  Globals g;
  std::optional<int> n_flag;

  auto* algebra = app.add_subcommand("algebra", "basis, frame and structure constants of su(n)");
  add_globals(algebra, g);
  algebra->add_option("--n", n_flag, "matrix size");
  auto* roots = app.add_subcommand("roots", "root-space decomposition of su(n)");
  add_globals(roots, g);
  roots->add_option("--n", n_flag, "matrix size");
  auto* solve = app.add_subcommand("solve", "minimize the regularized p-energy");
  add_globals(solve, g);
  auto* sweep = app.add_subcommand("sweep", "solve along a decreasing epsilon list");
  add_globals(sweep, g);
  auto* verify = app.add_subcommand("verify", "inequality battery on a solved field");
  add_globals(verify, g);
  auto* ccdist = app.add_subcommand("ccdist", "upper bound for the Carnot-Caratheodory distance");
  add_globals(ccdist, g);
  auto* ballvol = app.add_subcommand("ballvol", "gauge-ball volumes and their log-log slope");
  add_globals(ballvol, g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (g.threads > 0) set_thread_count(g.threads);
    if (*algebra) return cmd_algebra(g, n_flag);
    if (*roots) return cmd_roots(g, n_flag);
    if (*solve) return cmd_solve(g);
    if (*sweep) return cmd_sweep(g);
    if (*verify) return cmd_verify(g);
    if (*ccdist) return cmd_ccdist(g);
    if (*ballvol) return cmd_ballvol(g);
  } catch (const InputError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

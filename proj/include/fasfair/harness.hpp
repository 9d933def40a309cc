#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "fasfair/config.hpp"
#include "fasfair/csv.hpp"
#include "fasfair/montecarlo.hpp"
#include "fasfair/noma_solver.hpp"
#include "fasfair/oma_solver.hpp"
#include "fasfair/solve_report.hpp"

namespace fasfair {

// Knobs exposed by the CLI; defaults match the library defaults so a bare
// invocation reproduces the documented behavior.
struct HarnessOptions {
  std::uint64_t seed = 1;
  std::uint64_t trials = 100000;
  int quad_nodes = 96;
  double tol = 1e-8;         // bisection half-width on alpha
  double eps_tau = 1e-6;     // SCA outer stop
  int max_outer = 50;        // SCA outer iteration cap
  double oracle_step = 0.0;  // grid cross-check spacing; 0 disables
  int threads = 0;           // 0 = hardware default; applies to sweep rows and MC
  bool strict = false;       // mc-validate: exit nonzero on any 3-sigma miss
};

inline void validate_options(const HarnessOptions& opt) {
  if (opt.quad_nodes < 4 || opt.quad_nodes > 512)
    throw ConfigError("--quad-nodes must be in [4, 512]");
  if (!(opt.tol > 0.0)) throw ConfigError("--tol must be positive");
  if (!(opt.eps_tau > 0.0)) throw ConfigError("--eps_tau must be positive");
  if (opt.max_outer < 1) throw ConfigError("--max_outer must be at least 1");
  if (opt.trials < 1) throw ConfigError("--trials must be at least 1");
  if (opt.threads < 0) throw ConfigError("--threads must be nonnegative");
  if (opt.oracle_step < 0.0 || opt.oracle_step >= 0.5)
    throw ConfigError("--oracle-step must lie in (0, 0.5), or 0 to disable");
}

inline QuadratureSpec quadrature_from(const HarnessOptions& opt) {
  QuadratureSpec spec;
  spec.node_count = opt.quad_nodes;
  return spec;
}

inline ScaConfig sca_config_from(const HarnessOptions& opt) {
  ScaConfig cfg;
  cfg.eps_tau = opt.eps_tau;
  cfg.max_outer = opt.max_outer;
  return cfg;
}

inline McConfig mc_config_from(const HarnessOptions& opt) {
  McConfig cfg;
  cfg.trials = opt.trials;
  cfg.seed = opt.seed;
  cfg.threads = opt.threads;
  return cfg;
}

// User-facing method tags; these match the CLI subcommand names and the
// `method` CSV column.
inline const char* method_tag(Method m) {
  switch (m) {
    case Method::special_closed: return "noma-special";
    case Method::bisection: return "noma-bisect";
    case Method::quadratic_closed: return "noma-closed";
    case Method::sca: return "oma-sca";
  }
  return "unknown";
}

inline Method parse_method_tag(std::string_view tag) {
  if (tag == "noma-special") return Method::special_closed;
  if (tag == "noma-bisect") return Method::bisection;
  if (tag == "noma-closed") return Method::quadratic_closed;
  if (tag == "oma-sca") return Method::sca;
  throw ConfigError("unknown method tag '" + std::string(tag) + "'");
}

inline SolveReport run_method(Method m, const Scenario& sc, const HarnessOptions& opt) {
  switch (m) {
    case Method::special_closed: return solve_special_case(sc, quadrature_from(opt));
    case Method::bisection: return solve_general_bisection(sc, opt.tol, quadrature_from(opt));
    case Method::quadratic_closed: return solve_quadratic(sc, quadrature_from(opt));
    case Method::sca: return sca_solve(sc, sca_config_from(opt));
  }
  throw std::logic_error("unhandled method");
}

enum class SweepVariable { alpha, power_dbm, n_c, n_e, r1, r2 };

inline const char* variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::alpha: return "alpha";
    case SweepVariable::power_dbm: return "p_dbm";
    case SweepVariable::n_c: return "n_c";
    case SweepVariable::n_e: return "n_e";
    case SweepVariable::r1: return "r1";
    case SweepVariable::r2: return "r2";
  }
  return "unknown";
}

inline SweepVariable parse_sweep_variable(std::string_view name) {
  if (name == "alpha") return SweepVariable::alpha;
  if (name == "power_dbm" || name == "p_dbm") return SweepVariable::power_dbm;
  if (name == "n_c") return SweepVariable::n_c;
  if (name == "n_e") return SweepVariable::n_e;
  if (name == "r1") return SweepVariable::r1;
  if (name == "r2") return SweepVariable::r2;
  throw ConfigError("unknown sweep variable '" + std::string(name) + "'");
}

struct SweepSpec {
  SweepVariable variable = SweepVariable::alpha;
  double start = 0.0;
  double stop = 0.0;
  int points = 0;
  std::vector<Method> methods;  // solver tags; alpha sweeps take none
};

namespace detail {

inline int row_worker_count(int requested, std::size_t tasks) {
  unsigned hw = std::thread::hardware_concurrency();
  int fallback = hw ? static_cast<int>(hw < 8 ? hw : 8) : 1;
  std::size_t n = requested <= 0 ? static_cast<std::size_t>(fallback)
                                 : static_cast<std::size_t>(requested);
  if (tasks < 1) tasks = 1;
  return static_cast<int>(n < tasks ? n : tasks);
}

// Evaluates row builders concurrently but collects results in index order,
// so the emitted bytes do not depend on scheduling or worker count.
inline std::vector<std::vector<std::string>> build_rows_ordered(
    int threads, std::size_t count,
    const std::function<std::vector<std::string>(std::size_t)>& build) {
  std::vector<std::vector<std::string>> rows(count);
  int workers = row_worker_count(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) rows[i] = build(i);
    return rows;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto drain = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        rows[i] = build(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(drain);
  for (auto& th : pool) th.join();
  for (std::size_t i = 0; i < count; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
  return rows;
}

inline std::vector<double> linspace(double start, double stop, int points) {
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i)
    grid[i] = start + (stop - start) * static_cast<double>(i) / (points - 1);
  return grid;
}

// One plotted curve: a scenario family plus the solver that traces it.
// Flat baselines (single-antenna curves on port-count sweeps) keep their
// scenario fixed while the x-axis advances.
struct CurveDef {
  std::string scenario_id;
  Method method;
  ScenarioConfig base;
  bool track_variable = true;
};

inline ScenarioConfig apply_variable(ScenarioConfig cfg, SweepVariable var, double value) {
  switch (var) {
    case SweepVariable::power_dbm: cfg.params.p_dbm = value; break;
    case SweepVariable::n_c: cfg.n_c = static_cast<int>(value); break;
    case SweepVariable::n_e: cfg.n_e = static_cast<int>(value); break;
    case SweepVariable::r1: cfg.params.r1 = value; break;
    case SweepVariable::r2: cfg.params.r2 = value; break;
    case SweepVariable::alpha: throw std::logic_error("alpha is not a scenario field");
  }
  return cfg;
}

// The figure scenarios pin power, rates, ports, and apertures; distances,
// path-loss exponent, and noise floor come from the user's config.
inline ScenarioConfig pin_scenario(const ScenarioConfig& user, double p_dbm, double r1,
                                   double r2, int n_c, double w_c, int n_e, double w_e) {
  ScenarioConfig cfg = user;
  cfg.params.p_dbm = p_dbm;
  cfg.params.r1 = r1;
  cfg.params.r2 = r2;
  cfg.n_c = n_c;
  cfg.w_c = w_c;
  cfg.n_e = n_e;
  cfg.w_e = w_e;
  return cfg;
}

inline std::vector<std::string> alpha_eval_row(const std::string& scenario_id,
                                               const std::string& tag, const Scenario& sc,
                                               double alpha, const QuadratureSpec& spec) {
  NomaDesign d = noma_design(sc.params, alpha);
  double p1 = noma_outage_cu_phi1(sc.side_c, d, spec);
  double p2 = noma_outage_cu_phi2(sc.side_c, d, spec);
  double pc = noma_outage_cu(sc.side_c, d, spec);
  double pe = noma_outage_eu(sc.side_e, d, spec);
  return {scenario_id, tag,            csv_number(alpha), csv_number(p1),
          csv_number(p2), csv_number(pc), csv_number(pe)};
}

inline const std::vector<std::string>& alpha_sweep_header() {
  static const std::vector<std::string> h = {"scenario_id", "method", "alpha", "p_c_phi1",
                                             "p_c_phi2",    "p_c",    "p_e"};
  return h;
}

inline void run_alpha_figure(const std::string& scenario_id, const Scenario& sc,
                             Method optimum_method, const HarnessOptions& opt, CsvWriter& csv) {
  constexpr int kPoints = 200;
  constexpr double kLo = 0.01;
  constexpr double kHi = 0.49;
  QuadratureSpec spec = quadrature_from(opt);
  csv.header(alpha_sweep_header());
  auto rows = build_rows_ordered(opt.threads, kPoints, [&](std::size_t i) {
    double alpha = kLo + (kHi - kLo) * static_cast<double>(i) / (kPoints - 1);
    return alpha_eval_row(scenario_id, "eval", sc, alpha, spec);
  });
  for (const auto& r : rows) csv.row(r);
  SolveReport rep = run_method(optimum_method, sc, opt);
  csv.row(alpha_eval_row(scenario_id, method_tag(optimum_method), sc, rep.alpha, spec));
}

inline void run_trace_figure(const ScenarioConfig& user, const HarnessOptions& opt,
                             CsvWriter& csv) {
  csv.header({"scenario_id", "method", "p_dbm", "iteration", "tau"});
  for (int p : {5, 10, 15}) {
    Scenario sc = pin_scenario(user, p, 1.0, 1.0, 4, 5.0, 4, 5.0).scenario();
    std::vector<double> trace;
    sca_solve(sc, sca_config_from(opt), &trace);
    std::string sid = "fig4-p" + std::to_string(p);
    for (std::size_t k = 0; k < trace.size(); ++k)
      csv.row({sid, "oma-sca", csv_number(p), csv_integer(static_cast<long long>(k) + 1),
               csv_number(trace[k])});
  }
}

inline void run_scenario_sweep(const std::vector<CurveDef>& curves, SweepVariable var,
                               const std::vector<double>& grid, const HarnessOptions& opt,
                               CsvWriter& csv) {
  csv.header({"scenario_id", "method", variable_name(var), "alpha", "beta", "p_cu", "p_eu",
              "p_max"});
  struct Task {
    const CurveDef* curve;
    double value;
  };
  std::vector<Task> tasks;
  tasks.reserve(grid.size() * curves.size());
  for (double v : grid)
    for (const CurveDef& c : curves) tasks.push_back({&c, v});
  auto rows = build_rows_ordered(opt.threads, tasks.size(), [&](std::size_t i) {
    const Task& t = tasks[i];
    ScenarioConfig cfg =
        t.curve->track_variable ? apply_variable(t.curve->base, var, t.value) : t.curve->base;
    SolveReport rep = run_method(t.curve->method, cfg.scenario(), opt);
    return std::vector<std::string>{
        t.curve->scenario_id,          method_tag(t.curve->method),   csv_number(t.value),
        csv_number(rep.alpha),         rep.beta ? csv_number(*rep.beta) : std::string{},
        csv_number(rep.outage.p_cu),   csv_number(rep.outage.p_eu),
        csv_number(rep.outage.p_max)};
  });
  for (const auto& r : rows) csv.row(r);
}

}  // namespace detail

inline void run_figure(int fig_id, const ScenarioConfig& user, const HarnessOptions& opt,
                       std::ostream& out) {
  validate_options(opt);
  CsvWriter csv(out);
  using detail::CurveDef;
  using detail::pin_scenario;
  switch (fig_id) {
    case 1:
      detail::run_alpha_figure("fig1", pin_scenario(user, 5, 1, 1, 4, 5, 4, 5).scenario(),
                               Method::special_closed, opt, csv);
      return;
    case 2:
      detail::run_alpha_figure("fig2", pin_scenario(user, 5, 1, 1, 2, 1, 20, 5).scenario(),
                               Method::bisection, opt, csv);
      return;
    case 3:
      detail::run_alpha_figure("fig3", pin_scenario(user, 5, 1, 1, 2, 1, 6, 5).scenario(),
                               Method::bisection, opt, csv);
      return;
    case 4:
      detail::run_trace_figure(user, opt, csv);
      return;
    case 5: {
      ScenarioConfig general = pin_scenario(user, 0, 1, 1, 4, 2, 6, 5);
      ScenarioConfig special = pin_scenario(user, 0, 1, 1, 4, 5, 4, 5);
      ScenarioConfig conv = pin_scenario(user, 0, 1, 1, 1, 5, 1, 5);
      std::vector<CurveDef> curves = {
          {"fig5-conv", Method::bisection, conv},
          {"fig5-conv", Method::sca, conv},
          {"fig5-general", Method::bisection, general},
          {"fig5-general", Method::quadratic_closed, general},
          {"fig5-general", Method::sca, general},
          {"fig5-special", Method::special_closed, special},
          {"fig5-special", Method::sca, special},
      };
      detail::run_scenario_sweep(curves, SweepVariable::power_dbm,
                                 detail::linspace(0.0, 30.0, 16), opt, csv);
      return;
    }
    case 6: {
      ScenarioConfig general = pin_scenario(user, 5, 1, 1, 4, 5, 6, 1);
      ScenarioConfig conv = pin_scenario(user, 5, 1, 1, 1, 5, 1, 1);
      std::vector<CurveDef> curves = {
          {"fig6-conv", Method::bisection, conv, false},
          {"fig6-general", Method::bisection, general},
          {"fig6-general", Method::quadratic_closed, general},
          {"fig6-general", Method::sca, general},
      };
      detail::run_scenario_sweep(curves, SweepVariable::n_c, detail::linspace(1.0, 20.0, 20),
                                 opt, csv);
      return;
    }
    case 7: {
      ScenarioConfig general = pin_scenario(user, 10, 1, 1, 4, 1, 6, 5);
      ScenarioConfig conv = pin_scenario(user, 10, 1, 1, 1, 1, 1, 5);
      std::vector<CurveDef> curves = {
          {"fig7-conv", Method::bisection, conv, false},
          {"fig7-general", Method::bisection, general},
          {"fig7-general", Method::quadratic_closed, general},
          {"fig7-general", Method::sca, general},
      };
      detail::run_scenario_sweep(curves, SweepVariable::n_e, detail::linspace(1.0, 20.0, 20),
                                 opt, csv);
      return;
    }
    case 8: {
      ScenarioConfig general = pin_scenario(user, 10, 1, 1, 6, 5, 4, 5);
      ScenarioConfig special = pin_scenario(user, 10, 1, 1, 4, 5, 4, 5);
      ScenarioConfig conv = pin_scenario(user, 10, 1, 1, 1, 5, 1, 5);
      std::vector<CurveDef> curves = {
          {"fig8-conv", Method::bisection, conv},
          {"fig8-general", Method::bisection, general},
          {"fig8-general", Method::quadratic_closed, general},
          {"fig8-general", Method::sca, general},
          {"fig8-special", Method::special_closed, special},
          {"fig8-special", Method::sca, special},
      };
      detail::run_scenario_sweep(curves, SweepVariable::r1, detail::linspace(0.5, 2.5, 21),
                                 opt, csv);
      return;
    }
    case 9: {
      ScenarioConfig general = pin_scenario(user, 10, 1, 1, 4, 5, 6, 5);
      ScenarioConfig special = pin_scenario(user, 10, 1, 1, 4, 5, 4, 5);
      ScenarioConfig conv = pin_scenario(user, 10, 1, 1, 1, 5, 1, 5);
      std::vector<CurveDef> curves = {
          {"fig9-conv", Method::bisection, conv},
          {"fig9-general", Method::bisection, general},
          {"fig9-general", Method::quadratic_closed, general},
          {"fig9-general", Method::sca, general},
          {"fig9-special", Method::special_closed, special},
          {"fig9-special", Method::sca, special},
      };
      detail::run_scenario_sweep(curves, SweepVariable::r2, detail::linspace(0.5, 2.5, 21),
                                 opt, csv);
      return;
    }
    default:
      throw ConfigError("figure id must be between 1 and 9");
  }
}

inline std::vector<double> sweep_grid(const SweepSpec& spec) {
  if (!(spec.start < spec.stop)) throw ConfigError("sweep start must be less than stop");
  if (spec.points < 2) throw ConfigError("sweep points must be at least 2");
  if (spec.variable == SweepVariable::n_c || spec.variable == SweepVariable::n_e) {
    if (spec.start != std::floor(spec.start) || spec.stop != std::floor(spec.stop))
      throw ConfigError("port-count sweeps need integer endpoints");
    long long span = static_cast<long long>(spec.stop) - static_cast<long long>(spec.start);
    if (span % (spec.points - 1) != 0)
      throw ConfigError("port-count sweeps must step through integers; "
                        "adjust points so the grid lands on whole numbers");
    long long step = span / (spec.points - 1);
    std::vector<double> grid(spec.points);
    for (int i = 0; i < spec.points; ++i)
      grid[i] = static_cast<double>(static_cast<long long>(spec.start) + step * i);
    return grid;
  }
  return detail::linspace(spec.start, spec.stop, spec.points);
}

inline void run_sweep(const SweepSpec& spec, const ScenarioConfig& base,
                      const HarnessOptions& opt, std::ostream& out) {
  validate_options(opt);
  std::vector<double> grid = sweep_grid(spec);
  CsvWriter csv(out);
  if (spec.variable == SweepVariable::alpha) {
    if (!spec.methods.empty())
      throw ConfigError("alpha sweeps evaluate outage directly; --methods applies to "
                        "scenario sweeps");
    if (!(spec.start > 0.0) || !(spec.stop < 1.0))
      throw ConfigError("alpha sweep bounds must lie inside (0, 1)");
    Scenario sc = base.scenario();
    QuadratureSpec qspec = quadrature_from(opt);
    csv.header(detail::alpha_sweep_header());
    auto rows = detail::build_rows_ordered(opt.threads, grid.size(), [&](std::size_t i) {
      return detail::alpha_eval_row("sweep-alpha", "eval", sc, grid[i], qspec);
    });
    for (const auto& r : rows) csv.row(r);
    return;
  }
  if (spec.methods.empty()) throw ConfigError("scenario sweeps require --methods");
  if ((spec.variable == SweepVariable::r1 || spec.variable == SweepVariable::r2) &&
      !(spec.start > 0.0))
    throw ConfigError("rate sweeps must start above zero");
  std::vector<detail::CurveDef> curves;
  std::string sid = std::string("sweep-") + variable_name(spec.variable);
  curves.reserve(spec.methods.size());
  for (Method m : spec.methods) curves.push_back({sid, m, base});
  detail::run_scenario_sweep(curves, spec.variable, grid, opt, csv);
}

struct McValidateResult {
  int rows = 0;
  int failures = 0;
};

// Pairs analytic outage with its Monte Carlo estimate at three power splits
// (two interior points and the regime boundary) plus the balanced OMA
// design. A row passes when the estimate sits within three standard errors;
// `low_power` marks rows whose band is too wide to be informative.
inline McValidateResult run_mc_validate(const ScenarioConfig& cfg, const HarnessOptions& opt,
                                        std::ostream& out) {
  validate_options(opt);
  Scenario sc = cfg.scenario();
  QuadratureSpec spec = quadrature_from(opt);
  McConfig mc = mc_config_from(opt);
  CsvWriter csv(out);
  csv.header({"scenario_id", "method", "alpha", "beta", "target", "p_analytic", "p_mc",
              "std_err", "pass_3sigma", "low_power"});
  McValidateResult res;
  auto emit = [&](const char* method, double alpha, const std::string& beta_cell,
                  const char* target, double analytic, const McEstimate& est) {
    double se_true =
        std::sqrt(std::max(analytic * (1.0 - analytic), 0.0) / static_cast<double>(mc.trials));
    double band = 3.0 * std::max(est.std_err, se_true);
    bool pass = std::fabs(est.p_hat - analytic) <= band;
    csv.row({"config", method, csv_number(alpha), beta_cell, target, csv_number(analytic),
             csv_number(est.p_hat), csv_number(est.std_err), pass ? "1" : "0",
             band > 0.05 ? "1" : "0"});
    ++res.rows;
    if (!pass) ++res.failures;
  };
  const double splits[3] = {0.15, 0.25, noma_alpha_boundary(sc.params)};
  for (double alpha : splits) {
    OutagePair exact = noma_outage_pair(sc, alpha, spec);
    McPair est = estimate_noma_outage(sc, alpha, mc);
    emit("mc-noma", alpha, "", "cu", exact.p_cu, est.cu);
    emit("mc-noma", alpha, "", "eu", exact.p_eu, est.eu);
  }
  OutagePair exact = oma_outage_pair(sc, 0.5, 0.5, spec);
  McPair est = estimate_oma_outage(sc, 0.5, 0.5, mc);
  emit("mc-oma", 0.5, csv_number(0.5), "cu", exact.p_cu, est.cu);
  emit("mc-oma", 0.5, csv_number(0.5), "eu", exact.p_eu, est.eu);
  return res;
}

// Single-solve CSV for the four solver subcommands. For SCA, an optional
// second row cross-checks against the exhaustive approximate-objective grid.
inline void write_solver_report(const SolveReport& rep, const Scenario& sc,
                                const HarnessOptions& opt, std::ostream& out) {
  CsvWriter csv(out);
  csv.header({"scenario_id", "method", "alpha", "beta", "p_cu", "p_eu", "p_max", "tau",
              "iterations", "converged", "note"});
  csv.row({"config", method_tag(rep.method), csv_number(rep.alpha),
           rep.beta ? csv_number(*rep.beta) : std::string{}, csv_number(rep.outage.p_cu),
           csv_number(rep.outage.p_eu), csv_number(rep.outage.p_max),
           rep.tau ? csv_number(*rep.tau) : std::string{}, csv_integer(rep.iterations),
           rep.converged ? "1" : "0", rep.note});
  if (rep.method == Method::sca && opt.oracle_step > 0.0) {
    GridPoint g = grid_oracle(sc, opt.oracle_step);
    OutagePair p = oma_outage_pair(sc, g.alpha, g.beta, quadrature_from(opt));
    csv.row({"config", "grid-oracle", csv_number(g.alpha), csv_number(g.beta),
             csv_number(p.p_cu), csv_number(p.p_eu), csv_number(p.p_max), csv_number(g.tau),
             "", "", ""});
  }
}

}  // namespace fasfair

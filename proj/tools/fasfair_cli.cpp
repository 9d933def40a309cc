#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fasfair/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_path = "-";
  fasfair::HarnessOptions opt;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "scenario file, flat 'key = value' lines");
  cmd->add_option("--out", args.out_path, "output path, '-' for stdout")
      ->capture_default_str();
  cmd->add_option("--seed", args.opt.seed, "Monte Carlo seed")->capture_default_str();
  cmd->add_option("--trials", args.opt.trials, "Monte Carlo trials")->capture_default_str();
  cmd->add_option("--quad-nodes", args.opt.quad_nodes, "Gauss-Laguerre node count")
      ->capture_default_str();
  cmd->add_option("--tol", args.opt.tol, "bisection half-width on alpha")
      ->capture_default_str();
  cmd->add_option("--threads", args.opt.threads, "worker threads, 0 = hardware default")
      ->capture_default_str();
  cmd->add_flag("--strict", args.opt.strict,
                "mc-validate: exit 4 when any 3-sigma check fails");
}

fasfair::ScenarioConfig load_config(const CommonArgs& args) {
  if (args.config_path.empty()) return {};
  return fasfair::parse_config_file(args.config_path);
}

void write_output(const std::string& path, const std::string& payload) {
  if (path == "-") {
    std::cout << payload;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw fasfair::ConfigError("cannot open output file '" + path + "'");
  f << payload;
  if (!f) throw fasfair::ConfigError("failed writing output file '" + path + "'");
}

int run_solver(fasfair::Method method, const CommonArgs& args) {
  fasfair::validate_options(args.opt);
  fasfair::Scenario sc = load_config(args).scenario();
  fasfair::SolveReport rep = fasfair::run_method(method, sc, args.opt);
  std::ostringstream buf;
  fasfair::write_solver_report(rep, sc, args.opt, buf);
  write_output(args.out_path, buf.str());
  return rep.converged ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"outage fairness toolkit for fluid-antenna NOMA/OMA downlinks"};
  app.require_subcommand(1);

  CommonArgs args;

  CLI::App* cmd_special = app.add_subcommand(
      "noma-special", "closed-form power split for matched port counts and correlation");
  CLI::App* cmd_bisect = app.add_subcommand(
      "noma-bisect", "bisection on the exact outage balance, general scenarios");
  CLI::App* cmd_closed = app.add_subcommand(
      "noma-closed", "quadratic closed-form split from the outage approximation");
  CLI::App* cmd_sca = app.add_subcommand(
      "oma-sca", "successive convex approximation for the OMA power/time split");
  CLI::App* cmd_mc = app.add_subcommand(
      "mc-validate", "Monte Carlo cross-check of the analytic outage evaluators");
  CLI::App* cmd_fig = app.add_subcommand("fig", "reproduce a documented figure as CSV");
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "custom parameter sweep as CSV");

  for (CLI::App* c : {cmd_special, cmd_bisect, cmd_closed, cmd_sca, cmd_mc, cmd_fig, cmd_sweep})
    add_common_flags(c, args);

  cmd_sca->add_option("--eps_tau", args.opt.eps_tau, "outer-loop objective tolerance")
      ->capture_default_str();
  cmd_sca->add_option("--max_outer", args.opt.max_outer, "outer iteration cap")
      ->capture_default_str();
  cmd_sca->add_option("--oracle-step", args.opt.oracle_step,
                      "grid cross-check spacing, 0 disables")
      ->capture_default_str();

  int fig_id = 0;
  cmd_fig->add_option("id", fig_id, "figure number")->required()->check(CLI::Range(1, 9));

  std::string sweep_var;
  double sweep_start = 0.0;
  double sweep_stop = 0.0;
  int sweep_points = 0;
  std::vector<std::string> sweep_methods;
  cmd_sweep->add_option("--var", sweep_var, "alpha, power_dbm, n_c, n_e, r1, or r2")
      ->required();
  cmd_sweep->add_option("--start", sweep_start, "first grid value")->required();
  cmd_sweep->add_option("--stop", sweep_stop, "last grid value")->required();
  cmd_sweep->add_option("--points", sweep_points, "grid size, at least 2")->required();
  cmd_sweep->add_option("--methods", sweep_methods,
                        "solver tags for scenario sweeps (comma separated)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(cmd_special)) return run_solver(fasfair::Method::special_closed, args);
    if (app.got_subcommand(cmd_bisect)) return run_solver(fasfair::Method::bisection, args);
    if (app.got_subcommand(cmd_closed)) return run_solver(fasfair::Method::quadratic_closed, args);
    if (app.got_subcommand(cmd_sca)) return run_solver(fasfair::Method::sca, args);

    if (app.got_subcommand(cmd_mc)) {
      fasfair::ScenarioConfig cfg = load_config(args);
      std::ostringstream buf;
      fasfair::McValidateResult res = fasfair::run_mc_validate(cfg, args.opt, buf);
      write_output(args.out_path, buf.str());
      if (args.opt.strict && res.failures > 0) {
        std::cerr << "error: " << res.failures << " of " << res.rows
                  << " rows missed the 3-sigma band\n";
        return 4;
      }
      return 0;
    }

    if (app.got_subcommand(cmd_fig)) {
      fasfair::ScenarioConfig cfg = load_config(args);
      std::ostringstream buf;
      fasfair::run_figure(fig_id, cfg, args.opt, buf);
      write_output(args.out_path, buf.str());
      return 0;
    }

    if (app.got_subcommand(cmd_sweep)) {
      fasfair::ScenarioConfig cfg = load_config(args);
      fasfair::SweepSpec spec;
      spec.variable = fasfair::parse_sweep_variable(sweep_var);
      spec.start = sweep_start;
      spec.stop = sweep_stop;
      spec.points = sweep_points;
      for (const std::string& tag : sweep_methods)
        spec.methods.push_back(fasfair::parse_method_tag(tag));
      std::ostringstream buf;
      fasfair::run_sweep(spec, cfg, args.opt, buf);
      write_output(args.out_path, buf.str());
      return 0;
    }
  } catch (const fasfair::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

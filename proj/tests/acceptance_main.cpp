// Acceptance gate: ten numbered end-to-end checks, one PASS/FAIL line each,
// with pinned tolerances and runtime budgets. Exits nonzero if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fasfair/harness.hpp"

using namespace fasfair;

namespace {

struct Gate {
  int failures = 0;

  void report(int id, const char* title, bool ok, const std::string& detail, double secs,
              double budget_secs) {
    if (budget_secs > 0.0 && secs > budget_secs) ok = false;
    std::printf("%s  %2d  %-52s %s (%.2fs", ok ? "PASS" : "FAIL", id, title, detail.c_str(),
                secs);
    if (budget_secs > 0.0) std::printf(" < %.0fs", budget_secs);
    std::printf(")\n");
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

double now_minus(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Scenario scenario_with(double p_dbm, int n_c, double w_c, int n_e, double w_e, double r1 = 1.0,
                       double r2 = 1.0) {
  SystemParams p;
  p.p_dbm = p_dbm;
  p.r1 = r1;
  p.r2 = r2;
  return make_scenario(p, n_c, w_c, n_e, w_e);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

FasSide side_with(int n, double mu, double sigma2) {
  FasSide s;
  s.n_ports = n;
  s.w_aperture = 1.0;
  s.mu = mu;
  s.sigma2 = sigma2;
  return s;
}

bool within_3sigma(const McEstimate& est, double analytic) {
  double se_true =
      std::sqrt(std::max(analytic * (1.0 - analytic), 0.0) / static_cast<double>(est.trials));
  return std::fabs(est.p_hat - analytic) <= 3.0 * std::max(est.std_err, se_true);
}

}  // namespace

int main() {
  Gate gate;
  const Scenario baseline = scenario_with(5.0, 4, 5.0, 4, 5.0);

  {  // 1: closed-form split for matched apertures lands on the known optimum
    auto t0 = std::chrono::steady_clock::now();
    SolveReport rep = solve_special_case(baseline);
    double err = std::fabs(rep.alpha - 0.18605);
    gate.report(1, "closed-form split hits alpha 0.18605 +- 5e-4",
                err <= 5e-4, fmt("alpha=%.7f err=%.1e", rep.alpha, err), now_minus(t0), 1.0);
  }

  {  // 2: regime boundary equalizes the two decoding thresholds
    auto t0 = std::chrono::steady_clock::now();
    double ab = noma_alpha_boundary(baseline.params);
    NomaDesign d = noma_design(baseline.params, ab);
    double p1 = noma_outage_cu_phi1(baseline.side_c, d);
    double p2 = noma_outage_cu_phi2(baseline.side_c, d);
    bool ok = std::fabs(ab - 1.0 / 3.0) <= 1e-12 && std::fabs(p1 - p2) < 1e-9;
    gate.report(2, "threshold outages cross at the boundary split 1/3", ok,
                fmt("alpha_b=%.10f |dp|=%.1e", ab, std::fabs(p1 - p2)), now_minus(t0), 5.0);
  }

  {  // 3: bisection finds the interior balance of the mixed-aperture scenario
    auto t0 = std::chrono::steady_clock::now();
    SolveReport rep = solve_general_bisection(scenario_with(5.0, 2, 1.0, 6, 5.0));
    double err = std::fabs(rep.alpha - 0.2887);
    gate.report(3, "bisection balance at alpha 0.2887 +- 2e-3", err <= 2e-3,
                fmt("alpha=%.7f err=%.1e", rep.alpha, err), now_minus(t0), 30.0);
  }

  {  // 4: dominant-side scenario returns the boundary split itself
    auto t0 = std::chrono::steady_clock::now();
    SolveReport rep = solve_general_bisection(scenario_with(5.0, 2, 1.0, 20, 5.0));
    double err = std::fabs(rep.alpha - 1.0 / 3.0);
    gate.report(4, "boundary-regime solve returns 0.3333 +- 1e-6", err <= 1e-6,
                fmt("alpha=%.8f err=%.1e", rep.alpha, err), now_minus(t0), 30.0);
  }

  {  // 5: quadratic closed form agrees with bisection at high power
    auto t0 = std::chrono::steady_clock::now();
    Scenario sc = scenario_with(20.0, 4, 2.0, 6, 5.0);
    double a_closed = solve_quadratic(sc).alpha;
    double a_bisect = solve_general_bisection(sc).alpha;
    bool ok = std::fabs(a_closed - 1.0 / 3.0) <= 1e-3 && std::fabs(a_bisect - 1.0 / 3.0) <= 1e-3;
    gate.report(5, "both general solvers reach 1/3 at 20 dBm", ok,
                fmt("closed=%.6f bisect=%.6f", a_closed, a_bisect), now_minus(t0), 30.0);
  }

  {  // 6: Monte Carlo agrees with the analytic evaluators
    auto t0 = std::chrono::steady_clock::now();
    int misses = 0;
    int rows = 0;
    McConfig mc;
    mc.trials = 100000;
    mc.seed = 20240801;
    for (double p : {5.0, 10.0, 15.0}) {
      Scenario sc = scenario_with(p, 4, 5.0, 4, 5.0);
      for (double alpha : {0.15, 0.25, 1.0 / 3.0}) {
        OutagePair exact = noma_outage_pair(sc, alpha);
        McPair est = estimate_noma_outage(sc, alpha, mc);
        rows += 2;
        if (!within_3sigma(est.cu, exact.p_cu)) ++misses;
        if (!within_3sigma(est.eu, exact.p_eu)) ++misses;
      }
    }
    McConfig deep = mc;
    deep.trials = 1000000;
    const std::pair<Scenario, double> anchors[] = {
        {baseline, solve_special_case(baseline).alpha},
        {scenario_with(5.0, 2, 1.0, 6, 5.0),
         solve_general_bisection(scenario_with(5.0, 2, 1.0, 6, 5.0)).alpha}};
    for (const auto& [sc, alpha] : anchors) {
      OutagePair exact = noma_outage_pair(sc, alpha);
      McPair est = estimate_noma_outage(sc, alpha, deep);
      rows += 2;
      if (!within_3sigma(est.cu, exact.p_cu)) ++misses;
      if (!within_3sigma(est.eu, exact.p_eu)) ++misses;
    }
    gate.report(6, "simulation within 3 sigma on grid and anchors", misses == 0,
                fmt("misses=%.0f of %.0f rows", misses, rows), now_minus(t0), 300.0);
  }

  {  // 7: exact identities of the best-port outage integral
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> umu(0.0, 0.95);
    std::uniform_int_distribution<int> un(1, 8);
    std::uniform_real_distribution<double> uphi(0.01, 5.0);
    std::uniform_real_distribution<double> usig(-8.0, 0.0);
    double worst_single = 0.0;
    double worst_uncorr = 0.0;
    for (int i = 0; i < 50; ++i) {
      double sigma2 = std::pow(10.0, usig(rng));
      double phi = uphi(rng) * sigma2;
      double e1 = std::fabs(outage_probability(side_with(1, umu(rng), sigma2), phi) -
                            (-std::expm1(-phi / sigma2)));
      worst_single = std::max(worst_single, e1);
      int n = un(rng);
      double e2 = std::fabs(outage_probability(side_with(n, 0.0, sigma2), phi) -
                            std::pow(-std::expm1(-phi / sigma2), n));
      worst_uncorr = std::max(worst_uncorr, e2);
    }
    const GaussLaguerreRule& rule = gauss_laguerre(96);
    double worst_ident = 0.0;
    for (double a : {0.5, 1.0, 2.0}) {
      for (double b : {0.5, 1.0, 2.0}) {
        double s = 0.0;
        for (std::size_t i = 0; i < rule.node.size(); ++i)
          s += rule.weight[i] * marcum_q1(a * std::sqrt(rule.node[i]), b);
        worst_ident = std::max(worst_ident, std::fabs(s - std::exp(-b * b / (a * a + 2.0))));
      }
    }
    bool ok = worst_single <= 1e-7 && worst_uncorr <= 1e-7 && worst_ident <= 1e-9;
    gate.report(7, "collapse and integral identities hold", ok,
                fmt("single=%.1e uncorr=%.1e integral=%.1e", worst_single, worst_uncorr,
                    worst_ident),
                now_minus(t0), 60.0);
  }

  {  // 8: shape properties behind the solvers
    auto t0 = std::chrono::steady_clock::now();
    bool mono = true;
    double prev1 = -1.0;
    double prev2 = 2.0;
    double preve = -1.0;
    for (int i = 0; i < 200; ++i) {
      double alpha = 0.01 + (0.49 - 0.01) * i / 199.0;
      NomaDesign d = noma_design(baseline.params, alpha);
      double p1 = noma_outage_cu_phi1(baseline.side_c, d);
      double p2 = noma_outage_cu_phi2(baseline.side_c, d);
      double pe = noma_outage_eu(baseline.side_e, d);
      if (p1 < prev1 - 1e-12 || p2 > prev2 + 1e-12 || pe < preve - 1e-12) mono = false;
      prev1 = p1;
      prev2 = p2;
      preve = pe;
    }
    bool concave = true;
    const double h = 1e-3;
    for (int n : {2, 4, 8})
      for (double eta : {0.3, 0.9})
        for (double tau = 0.05; tau <= 0.95; tau += 0.05) {
          double d2 = std::pow((tau + h) / eta, 1.0 / n) - 2.0 * std::pow(tau / eta, 1.0 / n) +
                      std::pow((tau - h) / eta, 1.0 / n);
          if (d2 > 1e-12) concave = false;
        }
    bool convex = true;
    for (double r : {0.5, 1.0, 2.0})
      for (double beta = 0.05; beta <= 0.95; beta += 0.01) {
        double d2a =
            std::exp2(r / (beta + h)) - 2.0 * std::exp2(r / beta) + std::exp2(r / (beta - h));
        double d2b = std::exp2(r / (1.0 - beta - h)) - 2.0 * std::exp2(r / (1.0 - beta)) +
                     std::exp2(r / (1.0 - beta + h));
        if (d2a < -1e-9 * std::exp2(r / beta)) convex = false;
        if (d2b < -1e-9 * std::exp2(r / (1.0 - beta))) convex = false;
      }
    gate.report(8, "monotone splits, concave tail root, convex rate terms",
                mono && concave && convex,
                std::string("mono=") + (mono ? "yes" : "no") + " concave=" +
                    (concave ? "yes" : "no") + " convex=" + (convex ? "yes" : "no"),
                now_minus(t0), 120.0);
  }

  {  // 9: SCA descends monotonically and lands on the grid optimum
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    for (double p : {5.0, 10.0, 15.0}) {
      Scenario sc = scenario_with(p, 4, 5.0, 4, 5.0);
      std::vector<double> trace;
      SolveReport rep = sca_solve(sc, {}, &trace);
      GridPoint g = grid_oracle(sc, 0.005);
      bool mono = true;
      for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i] > trace[i - 1] + 1e-9) mono = false;
      double gap = std::fabs(*rep.tau - g.tau);
      if (!(rep.converged && rep.iterations <= 4 && mono && gap <= 1e-2)) ok = false;
      detail += fmt("P%.0f:it=%.0f gap=%.0e ", p, rep.iterations, gap);
    }
    gate.report(9, "sca converges in <= 4 steps onto the 0.005 grid", ok, detail, now_minus(t0),
                300.0);
  }

  {  // 10: byte-identical artifacts across reruns and thread counts
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    for (int id : {1, 4, 5}) {
      HarnessOptions one;
      one.threads = 1;
      HarnessOptions many;
      many.threads = 6;
      std::ostringstream a, b, c;
      run_figure(id, ScenarioConfig{}, one, a);
      run_figure(id, ScenarioConfig{}, many, b);
      run_figure(id, ScenarioConfig{}, many, c);
      if (a.str() != b.str() || b.str() != c.str() || a.str().empty()) ok = false;
    }
    HarnessOptions mc1;
    mc1.trials = 20000;
    mc1.threads = 1;
    HarnessOptions mc6 = mc1;
    mc6.threads = 6;
    std::ostringstream a, b, c;
    run_mc_validate(ScenarioConfig{}, mc1, a);
    run_mc_validate(ScenarioConfig{}, mc6, b);
    run_mc_validate(ScenarioConfig{}, mc6, c);
    if (a.str() != b.str() || b.str() != c.str() || a.str().empty()) ok = false;
    gate.report(10, "csv bytes identical across reruns and threads", ok,
                ok ? "figs 1,4,5 + mc-validate" : "mismatch", now_minus(t0), 0.0);
  }

  std::printf("%d/10 criteria passed\n", 10 - gate.failures);
  return gate.failures == 0 ? 0 : 1;
}

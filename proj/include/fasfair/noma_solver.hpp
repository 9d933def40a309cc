#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fasfair/model.hpp"
#include "fasfair/outage.hpp"
#include "fasfair/solve_report.hpp"

namespace fasfair {

// Coefficients of the quadratic that equalizes the two high-SNR outage
// approximations 1 - N_c e^{-phi2/sigma_h^2} and 1 - N_e e^{-phi1/sigma_g^2}:
//   a1*d1*alpha^2 + (b1*d1 + c1 - a1)*alpha - b1 = 0
struct QuadraticCoeffs {
  double a1 = 0.0;  // ln(N_e / N_c)
  double b1 = 0.0;  // gamma1 * noise / (P * sigma_h^2)
  double c1 = 0.0;  // gamma2 * noise / (P * sigma_g^2)
  double d1 = 0.0;  // 1 + gamma2
};

inline constexpr double kBisectAlphaFloor = 1e-9;

// Equalizer of the exact outages when both sides share N and mu: the two
// integrals coincide once phi2/sigma_h^2 = phi1/sigma_g^2, which this alpha
// achieves identically. Shared by the special-case and quadratic solvers so
// their matched-port results agree bitwise.
inline double tail_balance_alpha(const Scenario& sc) {
  GammaPair g = gamma_thresholds(sc.params);
  double ratio = sc.side_c.sigma2 / sc.side_e.sigma2;
  return 1.0 / (1.0 + g.gamma2 + g.gamma2 * ratio / g.gamma1);
}

inline SolveReport solve_special_case(const Scenario& sc, const QuadratureSpec& spec = {}) {
  SolveReport r;
  r.method = Method::special_closed;
  r.alpha = tail_balance_alpha(sc);
  if (sc.side_c.n_ports != sc.side_e.n_ports || sc.side_c.mu != sc.side_e.mu) {
    r.note = "closed form assumes matched port counts and correlation; "
             "treating result as a baseline";
  }
  r.outage = noma_outage_pair(sc, r.alpha, spec);
  return r;
}

inline QuadraticCoeffs quadratic_coeffs(const Scenario& sc) {
  GammaPair g = gamma_thresholds(sc.params);
  double pn = sc.params.noise_mw() / sc.params.p_mw();
  QuadraticCoeffs c;
  c.a1 = std::log(double(sc.side_e.n_ports) / double(sc.side_c.n_ports));
  c.b1 = g.gamma1 * pn / sc.side_c.sigma2;
  c.c1 = g.gamma2 * pn / sc.side_e.sigma2;
  c.d1 = 1.0 + g.gamma2;
  return c;
}

inline SolveReport solve_quadratic(const Scenario& sc, const QuadratureSpec& spec = {}) {
  SolveReport r;
  r.method = Method::quadratic_closed;
  QuadraticCoeffs c = quadratic_coeffs(sc);
  double alpha_b = noma_alpha_boundary(sc.params);
  if (c.a1 == 0.0) {
    // quadratic degenerates to the matched-port closed form
    r.alpha = tail_balance_alpha(sc);
  } else {
    double qa = c.a1 * c.d1;
    double qb = c.b1 * c.d1 + c.c1 - c.a1;
    double qc = -c.b1;
    double disc = qb * qb - 4.0 * qa * qc;
    double inf = std::numeric_limits<double>::infinity();
    // nonpositive or complex roots are treated as +inf before the boundary cap
    double x1 = inf;
    double x2 = inf;
    if (disc >= 0.0) {
      double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
      double r1 = q / qa;
      double r2 = qc / q;  // q != 0 because qc = -b1 < 0
      if (r1 > 0.0) x1 = r1;
      if (r2 > 0.0) x2 = r2;
    }
    r.alpha = std::min(std::min(x1, alpha_b), std::min(x2, alpha_b));
  }
  r.outage = noma_outage_pair(sc, r.alpha, spec);
  return r;
}

// Minimizes max{P_cu(phi2), P_eu} over the low-power-split regime by locating
// the crossing of g(alpha) = P_cu(phi2) - P_eu, which is strictly decreasing:
// raising alpha relaxes the CU threshold and tightens the EU one.
inline SolveReport solve_general_bisection(const Scenario& sc, double tol_alpha = 1e-8,
                                           const QuadratureSpec& spec = {}) {
  if (!(tol_alpha > 0.0)) throw std::domain_error("tol_alpha must be positive");
  SolveReport r;
  r.method = Method::bisection;
  double alpha_b = noma_alpha_boundary(sc.params);
  auto g = [&](double alpha) {
    NomaDesign d = noma_design(sc.params, alpha);
    return noma_outage_cu_phi2(sc.side_c, d, spec) - noma_outage_eu(sc.side_e, d, spec);
  };
  if (g(alpha_b) >= 0.0) {
    // CU outage dominates over the whole regime; it decreases in alpha, so
    // the boundary is the minimizer
    r.alpha = alpha_b;
    r.bracket = Bracket{alpha_b, alpha_b};
    r.outage = noma_outage_pair(sc, r.alpha, spec);
    return r;
  }
  double lo = kBisectAlphaFloor;
  double hi = alpha_b;
  // At the floor the CU outage is saturated near 1, so g(lo) can sit inside
  // the quadrature noise band when the EU outage saturates too; only a
  // clearly negative value indicates a broken sign convention.
  if (g(lo) < -64.0 * spec.abs_tol) {
    throw std::runtime_error("bisection bracket failure: objective difference "
                             "does not change sign on the search interval");
  }
  int it = 0;
  while (hi - lo > tol_alpha) {
    double mid = 0.5 * (lo + hi);
    if (g(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++it;
  }
  r.alpha = 0.5 * (lo + hi);
  r.bracket = Bracket{lo, hi};
  r.iterations = it;
  r.outage = noma_outage_pair(sc, r.alpha, spec);
  return r;
}

}  // namespace fasfair

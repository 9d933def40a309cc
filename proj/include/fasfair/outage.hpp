#pragma once
// Analytic outage-probability evaluators: the exact correlated best-port
// integral shared by the NOMA and OMA thresholds, plus the two families of
// closed-form approximations used by the fairness solvers.

#include <cmath>

#include "fasfair/model.hpp"
#include "fasfair/specfun.hpp"

namespace fasfair {

struct OutagePair {
  double p_cu = 0.0;
  double p_eu = 0.0;
  double p_max = 0.0;
};

inline OutagePair make_outage_pair(double p_cu, double p_eu) {
  return {p_cu, p_eu, std::max(p_cu, p_eu)};
}

struct OutageEstimate {
  double value = 0.0;
  bool converged = true;
  int nodes_used = 0;
  double last_delta = 0.0;
};

// P(|h_max|^2 <= phi) for the constant-correlation best-port model:
// int_0^inf e^{-t} [1 - Q1(kappa sqrt(t), b)]^N dt with
// kappa^2 = 2 mu^2/(1-mu^2) and b^2 = 2 phi / (sigma^2 (1-mu^2))
inline OutageEstimate outage_probability_ex(const FasSide& side, double phi,
                                            const QuadratureSpec& spec = {}) {
  if (side.n_ports < 1) throw std::domain_error("outage_probability: n_ports must be >= 1");
  if (!(side.mu >= 0.0) || side.mu >= 1.0)
    throw std::domain_error("outage_probability: requires mu in [0,1)");
  if (!(side.sigma2 > 0.0)) throw std::domain_error("outage_probability: sigma2 must be positive");
  if (std::isnan(phi)) throw std::domain_error("outage_probability: threshold is NaN");
  if (phi <= 0.0) return {0.0, true, 0, 0.0};
  if (std::isinf(phi)) return {1.0, true, 0, 0.0};
  double om = 1.0 - side.mu * side.mu;
  double kappa = side.mu * std::sqrt(2.0 / om);
  double b = std::sqrt(2.0 * phi / (side.sigma2 * om));
  int n = side.n_ports;
  auto integrand = [kappa, b, n](double t) {
    MarcumSplit s = marcum_q1_split(kappa * std::sqrt(t), b);
    if (s.p <= 0.0) return 0.0;
    // (1 - q)^n through the log of whichever member holds full precision
    double lp = (s.q <= 0.5) ? std::log1p(-s.q) : std::log(s.p);
    return std::exp(n * lp);
  };
  IntegralEstimate est = integrate_exp_weighted(integrand, spec);
  return {est.value, est.converged, est.nodes_used, est.last_delta};
}

inline double outage_probability(const FasSide& side, double phi,
                                 const QuadratureSpec& spec = {}) {
  return outage_probability_ex(side, phi, spec).value;
}

// NOMA central user, combined event: threshold max{phi1, phi2}
inline OutageEstimate noma_outage_cu_ex(const FasSide& side_c, const NomaDesign& d,
                                        const QuadratureSpec& spec = {}) {
  if (d.regime == Regime::Infeasible) return {1.0, true, 0, 0.0};
  return outage_probability_ex(side_c, std::max(d.phi1, d.phi2), spec);
}

inline double noma_outage_cu(const FasSide& side_c, const NomaDesign& d,
                             const QuadratureSpec& spec = {}) {
  return noma_outage_cu_ex(side_c, d, spec).value;
}

// single-threshold variants used by the sub-problem decomposition
inline double noma_outage_cu_phi1(const FasSide& side_c, const NomaDesign& d,
                                  const QuadratureSpec& spec = {}) {
  return outage_probability(side_c, d.phi1, spec);
}

inline double noma_outage_cu_phi2(const FasSide& side_c, const NomaDesign& d,
                                  const QuadratureSpec& spec = {}) {
  return outage_probability(side_c, d.phi2, spec);
}

inline OutageEstimate noma_outage_eu_ex(const FasSide& side_e, const NomaDesign& d,
                                        const QuadratureSpec& spec = {}) {
  if (d.regime == Regime::Infeasible) return {1.0, true, 0, 0.0};
  return outage_probability_ex(side_e, d.phi1, spec);
}

inline double noma_outage_eu(const FasSide& side_e, const NomaDesign& d,
                             const QuadratureSpec& spec = {}) {
  return noma_outage_eu_ex(side_e, d, spec).value;
}

// OMA: one evaluator serves both users (psi1 with the CU side, psi2 with EU)
inline OutageEstimate oma_outage_ex(const FasSide& side, double psi,
                                    const QuadratureSpec& spec = {}) {
  return outage_probability_ex(side, psi, spec);
}

inline double oma_outage(const FasSide& side, double psi, const QuadratureSpec& spec = {}) {
  return outage_probability_ex(side, psi, spec).value;
}

inline OutagePair noma_outage_pair(const Scenario& sc, double alpha,
                                   const QuadratureSpec& spec = {}) {
  NomaDesign d = noma_design(sc.params, alpha);
  return make_outage_pair(noma_outage_cu(sc.side_c, d, spec),
                          noma_outage_eu(sc.side_e, d, spec));
}

inline OutagePair oma_outage_pair(const Scenario& sc, double alpha, double beta,
                                  const QuadratureSpec& spec = {}) {
  OmaDesign d = oma_design(sc.params, alpha, beta);
  return make_outage_pair(oma_outage(sc.side_c, d.psi1, spec),
                          oma_outage(sc.side_e, d.psi2, spec));
}

// small-threshold linearization 1 - N e^{-phi/sigma^2}; deliberately
// unclamped (negative values are harmless to the root solving it feeds)
inline double noma_outage_approx(const FasSide& side, double phi) {
  if (!(phi > 0.0)) throw std::domain_error("noma_outage_approx: phi must be positive");
  return 1.0 - side.n_ports * std::exp(-phi / side.sigma2);
}

// eta-scaled closed form eta [1 - e^{-psi/(sigma^2 (1-mu^2))}]^N
inline double oma_outage_approx(const FasSide& side, double psi) {
  if (!(psi > 0.0)) throw std::domain_error("oma_outage_approx: psi must be positive");
  if (side.mu >= 1.0) throw std::domain_error("oma_outage_approx: degenerate at mu = 1");
  double e = -std::expm1(-psi / side.s_eff());
  return side.eta() * std::pow(e, side.n_ports);
}

}  // namespace fasfair

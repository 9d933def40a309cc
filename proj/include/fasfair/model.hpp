#pragma once
// Scenario parameterization: dBm conversions, aperture-to-correlation mapping,
// distance-based channel variances, and the SINR thresholds that encode the
// NOMA/OMA rate targets.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fasfair/specfun.hpp"

namespace fasfair {

inline double dbm_to_mw(double x_dbm) {
  if (!std::isfinite(x_dbm)) throw std::domain_error("dbm_to_mw: non-finite input");
  return std::pow(10.0, x_dbm / 10.0);
}

// mu = sqrt(2 (1F2(1/2;1,3/2;-pi^2 w^2) - J1(2 pi w)/(2 pi w))), the
// constant-correlation parameter of a length-w (in wavelengths) aperture
inline double correlation_mu(double w) {
  if (!(w > 0.0) || !std::isfinite(w))
    throw std::domain_error("correlation_mu: aperture must be positive and finite");
  double x = 2.0 * std::numbers::pi * w;
  double f = hyp1f2(0.5, 1.0, 1.5, -0.25 * x * x);
  double m2 = 2.0 * (f - bessel_j1(x) / x);
  // clamp sub-epsilon rounding excursions only
  m2 = std::clamp(m2, 0.0, 1.0);
  return std::sqrt(m2);
}

struct SystemParams {
  double p_dbm = 5.0;
  double noise_dbm = -80.0;
  double d_c = 400.0;
  double d_e = 600.0;
  double theta = 3.0;
  double r1 = 1.0;
  double r2 = 1.0;

  double p_mw() const { return dbm_to_mw(p_dbm); }
  double noise_mw() const { return dbm_to_mw(noise_dbm); }

  void validate() const {
    if (!(d_c > 0.0)) throw std::domain_error("d_c must be positive");
    if (!(d_e > 0.0)) throw std::domain_error("d_e must be positive");
    if (!(theta > 0.0)) throw std::domain_error("theta must be positive");
    if (!(r1 > 0.0)) throw std::domain_error("r1 must be positive");
    if (!(r2 > 0.0)) throw std::domain_error("r2 must be positive");
    if (!(p_mw() > 0.0) || !(noise_mw() > 0.0))
      throw std::domain_error("derived linear powers must be positive");
  }
};

struct FasSide {
  int n_ports = 1;
  double w_aperture = 0.0;
  double mu = 0.0;      // derived: correlation_mu(w_aperture)
  double sigma2 = 1.0;  // derived: d^{-theta}

  // variance of the decorrelated component, sigma^2 (1 - mu^2)
  double s_eff() const { return sigma2 * (1.0 - mu * mu); }
  // scale factor of the closed-form outage approximation
  double eta() const { return (1.0 - mu * mu) / (1.0 + (n_ports - 1) * mu * mu); }
};

inline FasSide make_side(int n_ports, double w_aperture, double distance, double theta) {
  if (n_ports < 1) throw std::domain_error("make_side: n_ports must be >= 1");
  if (!(distance > 0.0) || !(theta > 0.0))
    throw std::domain_error("make_side: distance and path-loss exponent must be positive");
  FasSide s;
  s.n_ports = n_ports;
  s.w_aperture = w_aperture;
  s.mu = correlation_mu(w_aperture);
  s.sigma2 = std::pow(distance, -theta);
  return s;
}

struct Scenario {
  SystemParams params;
  FasSide side_c;  // central user
  FasSide side_e;  // cell-edge user
};

inline Scenario make_scenario(const SystemParams& p, int n_c, double w_c, int n_e, double w_e) {
  p.validate();
  return {p, make_side(n_c, w_c, p.d_c, p.theta), make_side(n_e, w_e, p.d_e, p.theta)};
}

struct GammaPair {
  double gamma1;
  double gamma2;
};

inline GammaPair gamma_thresholds(const SystemParams& p) {
  if (!(p.r1 > 0.0) || !(p.r2 > 0.0))
    throw std::domain_error("gamma_thresholds: rates must be positive");
  return {std::exp2(p.r1) - 1.0, std::exp2(p.r2) - 1.0};
}

enum class Regime { P1, P2, Infeasible };

struct NomaDesign {
  double alpha = 0.0;
  double phi1 = 0.0;  // EU-message threshold (SIC stage / EU direct decoding)
  double phi2 = 0.0;  // CU-message threshold after SIC
  Regime regime = Regime::Infeasible;
};

// power fraction above which the EU message cannot be decoded (phi1 <= 0)
inline double noma_alpha_sup(const SystemParams& p) {
  auto g = gamma_thresholds(p);
  return 1.0 / (1.0 + g.gamma2);
}

// boundary between phi1 <= phi2 (P1) and phi1 > phi2 (P2)
inline double noma_alpha_boundary(const SystemParams& p) {
  auto g = gamma_thresholds(p);
  return 1.0 / (1.0 + g.gamma2 + g.gamma2 / g.gamma1);
}

inline NomaDesign noma_design(const SystemParams& p, double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::domain_error("noma_design: alpha must lie in (0,1)");
  auto g = gamma_thresholds(p);
  double P = p.p_mw();
  double s2 = p.noise_mw();
  NomaDesign d;
  d.alpha = alpha;
  d.phi2 = g.gamma1 * s2 / (P * alpha);
  double denom = 1.0 - alpha * (1.0 + g.gamma2);
  if (denom <= 0.0) {
    // EU message undecodable; thresholds effectively infinite
    d.phi1 = std::numeric_limits<double>::infinity();
    d.regime = Regime::Infeasible;
  } else {
    d.phi1 = g.gamma2 * s2 / (P * denom);
    d.regime = (alpha <= noma_alpha_boundary(p)) ? Regime::P1 : Regime::P2;
  }
  return d;
}

struct OmaDesign {
  double alpha = 0.0;
  double beta = 0.0;
  double psi1 = 0.0;
  double psi2 = 0.0;
};

inline OmaDesign oma_design(const SystemParams& p, double alpha, double beta) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::domain_error("oma_design: alpha must lie in (0,1)");
  if (!(beta > 0.0) || !(beta < 1.0))
    throw std::domain_error("oma_design: beta must lie in (0,1)");
  double P = p.p_mw();
  double s2 = p.noise_mw();
  OmaDesign d;
  d.alpha = alpha;
  d.beta = beta;
  // 2^{r/beta} overflows to +inf near the time-share boundaries; the +inf
  // threshold propagates to outage probability 1
  d.psi1 = (std::exp2(p.r1 / beta) - 1.0) * s2 / (P * alpha);
  d.psi2 = (std::exp2(p.r2 / (1.0 - beta)) - 1.0) * s2 / (P * (1.0 - alpha));
  return d;
}

}  // namespace fasfair

#pragma once
// Stochastic oracle for the analytic evaluators: samples the constant-
// correlation port model with counter-based substreams so that any degree of
// parallelism (or rerun) reproduces the estimates bit for bit.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <thread>
#include <utility>
#include <vector>

#include "fasfair/model.hpp"

namespace fasfair {

namespace detail {

struct PhiloxBlock {
  uint32_t x[4];
};

// Philox-4x32-10: ten rounds of the two-multiplier Feistel-like mix with
// Weyl-sequence key bumps
inline PhiloxBlock philox4x32(uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3,
                              uint32_t k0, uint32_t k1) {
  const uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  const uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    uint64_t p0 = uint64_t(M0) * c0;
    uint64_t p1 = uint64_t(M1) * c2;
    uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
    uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
    uint32_t n0 = hi1 ^ c1 ^ k0;
    uint32_t n1 = lo1;
    uint32_t n2 = hi0 ^ c3 ^ k1;
    uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += W0;
    k1 += W1;
  }
  return {{c0, c1, c2, c3}};
}

struct Gauss2 {
  double re;
  double im;
};

// one complex standard Gaussian per counter block via Box-Muller;
// antithetic partners complement the raw bits
inline Gauss2 gaussian_pair(uint64_t seed, uint64_t trial, uint32_t block, uint32_t stream,
                            bool antithetic) {
  PhiloxBlock b = philox4x32(uint32_t(trial), uint32_t(trial >> 32), block, stream,
                             uint32_t(seed), uint32_t(seed >> 32));
  uint64_t v1 = (uint64_t(b.x[0]) << 32) | b.x[1];
  uint64_t v2 = (uint64_t(b.x[2]) << 32) | b.x[3];
  if (antithetic) {
    v1 = ~v1;
    v2 = ~v2;
  }
  double u1 = 1.0 - double(v1 >> 11) * 0x1p-53;  // (0, 1]
  double u2 = double(v2 >> 11) * 0x1p-53;        // [0, 1)
  double rad = std::sqrt(-2.0 * std::log(u1));
  double ang = 2.0 * std::numbers::pi * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

// associative integer reduction over trial chunks; the totals are invariant
// under the partition, which is what makes thread count irrelevant
template <class PerTrial>
inline std::pair<uint64_t, uint64_t> count_events(uint64_t trials, int threads,
                                                  PerTrial&& per_trial) {
  int nt = threads;
  if (nt <= 0) {
    unsigned hw = std::thread::hardware_concurrency();
    nt = int(hw == 0 ? 1 : (hw > 8 ? 8 : hw));
  }
  if (uint64_t(nt) > trials) nt = int(trials);
  if (nt < 1) nt = 1;
  std::vector<uint64_t> first(nt, 0), second(nt, 0);
  uint64_t chunk = (trials + nt - 1) / nt;
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int w = 0; w < nt; ++w) {
    uint64_t lo = uint64_t(w) * chunk;
    uint64_t hi = std::min(trials, lo + chunk);
    pool.emplace_back([&, w, lo, hi] {
      uint64_t a = 0, b = 0;
      for (uint64_t t = lo; t < hi; ++t) {
        auto [ea, eb] = per_trial(t);
        a += ea ? 1 : 0;
        b += eb ? 1 : 0;
      }
      first[w] = a;
      second[w] = b;
    });
  }
  for (auto& th : pool) th.join();
  uint64_t a = 0, b = 0;
  for (int w = 0; w < nt; ++w) {
    a += first[w];
    b += second[w];
  }
  return {a, b};
}

}  // namespace detail

struct McConfig {
  uint64_t trials = 100000;
  uint64_t seed = 1;
  bool antithetic = false;
  int threads = 0;  // 0 = pick from hardware
};

struct McEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;
  uint64_t trials = 0;
};

struct McPair {
  McEstimate cu;
  McEstimate eu;
};

inline McEstimate make_mc_estimate(uint64_t count, uint64_t trials) {
  double p = trials ? double(count) / double(trials) : 0.0;
  return {p, std::sqrt(p * (1.0 - p) / double(trials)), trials};
}

// |h_max|^2 for one trial: h_k = mu h0 + sqrt(1-mu^2) z_k, best of N ports.
// stream tags keep the two users' draws independent; trial/seed form the key.
inline double sample_port_gains(const FasSide& side, uint64_t seed, uint64_t trial,
                                uint32_t stream, bool antithetic = false) {
  double om = std::sqrt(1.0 - side.mu * side.mu);
  double comp = std::sqrt(0.5 * side.sigma2);  // per-component deviation
  detail::Gauss2 h0 = detail::gaussian_pair(seed, trial, 0, stream, antithetic);
  double best = 0.0;
  for (int k = 1; k <= side.n_ports; ++k) {
    detail::Gauss2 z = detail::gaussian_pair(seed, trial, uint32_t(k), stream, antithetic);
    double re = comp * (side.mu * h0.re + om * z.re);
    double im = comp * (side.mu * h0.im + om * z.im);
    double gain = re * re + im * im;
    if (gain > best) best = gain;
  }
  return best;
}

namespace detail {

// antithetic pairing: odd trials replay the preceding even trial's counters
// with complemented bits
inline std::pair<uint64_t, bool> trial_substream(uint64_t t, bool antithetic) {
  if (!antithetic) return {t, false};
  return {t >> 1, (t & 1u) != 0};
}

}  // namespace detail

inline McPair estimate_noma_outage(const Scenario& sc, double alpha, const McConfig& cfg) {
  NomaDesign d = noma_design(sc.params, alpha);
  if (d.regime == Regime::Infeasible) {
    return {{1.0, 0.0, cfg.trials}, {1.0, 0.0, cfg.trials}};
  }
  double thr_c = std::max(d.phi1, d.phi2);
  double thr_e = d.phi1;
  auto [nc, ne] = detail::count_events(
      cfg.trials, cfg.threads, [&](uint64_t t) -> std::pair<bool, bool> {
        auto [base, anti] = detail::trial_substream(t, cfg.antithetic);
        double gc = sample_port_gains(sc.side_c, cfg.seed, base, 0, anti);
        double ge = sample_port_gains(sc.side_e, cfg.seed, base, 1, anti);
        return {gc <= thr_c, ge <= thr_e};
      });
  return {make_mc_estimate(nc, cfg.trials), make_mc_estimate(ne, cfg.trials)};
}

inline McPair estimate_oma_outage(const Scenario& sc, double alpha, double beta,
                                  const McConfig& cfg) {
  OmaDesign d = oma_design(sc.params, alpha, beta);
  auto [nc, ne] = detail::count_events(
      cfg.trials, cfg.threads, [&](uint64_t t) -> std::pair<bool, bool> {
        auto [base, anti] = detail::trial_substream(t, cfg.antithetic);
        double gc = sample_port_gains(sc.side_c, cfg.seed, base, 0, anti);
        double ge = sample_port_gains(sc.side_e, cfg.seed, base, 1, anti);
        return {gc <= d.psi1, ge <= d.psi2};
      });
  return {make_mc_estimate(nc, cfg.trials), make_mc_estimate(ne, cfg.trials)};
}

// rate-comparison formulation of the same OMA events; must match the
// threshold formulation trial by trial
inline McPair estimate_oma_outage_rateform(const Scenario& sc, double alpha, double beta,
                                           const McConfig& cfg) {
  if (!(alpha > 0.0) || !(alpha < 1.0) || !(beta > 0.0) || !(beta < 1.0))
    throw std::domain_error("estimate_oma_outage: alpha and beta must lie in (0,1)");
  double P = sc.params.p_mw();
  double s2 = sc.params.noise_mw();
  auto [nc, ne] = detail::count_events(
      cfg.trials, cfg.threads, [&](uint64_t t) -> std::pair<bool, bool> {
        auto [base, anti] = detail::trial_substream(t, cfg.antithetic);
        double gc = sample_port_gains(sc.side_c, cfg.seed, base, 0, anti);
        double ge = sample_port_gains(sc.side_e, cfg.seed, base, 1, anti);
        double rate_c = beta * std::log2(1.0 + alpha * P * gc / s2);
        double rate_e = (1.0 - beta) * std::log2(1.0 + (1.0 - alpha) * P * ge / s2);
        return {rate_c < sc.params.r1, rate_e < sc.params.r2};
      });
  return {make_mc_estimate(nc, cfg.trials), make_mc_estimate(ne, cfg.trials)};
}

}  // namespace fasfair

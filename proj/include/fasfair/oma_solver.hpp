#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fasfair/model.hpp"
#include "fasfair/outage.hpp"
#include "fasfair/solve_report.hpp"

namespace fasfair {

// Iterate of the successive convex approximation: the time/power shares, the
// epigraph variable tau, and the slack chain (c, d) bounding the thresholds
// and (a, b) bounding the exponentials from below.
struct ScaState {
  double tau = 0.0;
  double alpha = 0.5;
  double beta = 0.5;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  int iteration = 0;
};

struct ScaConfig {
  double eps_tau = 1e-6;
  int max_outer = 50;
  double barrier_t0 = 1.0;
  double barrier_mu = 20.0;
  double inner_tol = 1e-9;
};

struct GridPoint {
  double alpha = 0.0;
  double beta = 0.0;
  double tau = 0.0;
};

namespace detail {

inline constexpr double kShareMin = 1e-6;           // alpha, beta box interior
inline constexpr double kShareClampFlag = 1e-4;     // near-boundary reporting band
inline constexpr double kSlackFloor = 1e-12;        // a, b lower bounds
inline constexpr double kScaledSlackCap = 10.0;     // q, w upper bounds
inline constexpr double kNudge = 1e-3;              // strict-interior margin

struct OmaApproxModel {
  int n_c = 0;
  int n_e = 0;
  double eta_c = 0.0;
  double eta_e = 0.0;
  double s_c = 0.0;   // sigma_h^2 (1-mu_h^2)
  double s_e = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double noise_over_p = 0.0;
};

inline OmaApproxModel make_approx_model(const Scenario& sc) {
  if (sc.side_c.mu >= 1.0 || sc.side_e.mu >= 1.0) {
    throw std::domain_error("sca requires port correlation below 1 on both sides");
  }
  OmaApproxModel m;
  m.n_c = sc.side_c.n_ports;
  m.n_e = sc.side_e.n_ports;
  m.eta_c = sc.side_c.eta();
  m.eta_e = sc.side_e.eta();
  m.s_c = sc.side_c.s_eff();
  m.s_e = sc.side_e.s_eff();
  m.r1 = sc.params.r1;
  m.r2 = sc.params.r2;
  m.noise_over_p = sc.params.noise_mw() / sc.params.p_mw();
  return m;
}

// Approximate max-outage objective optimized by the SCA loop.
inline double approx_objective(const OmaApproxModel& m, double alpha, double beta) {
  double psi1 = (std::exp2(m.r1 / beta) - 1.0) * m.noise_over_p / alpha;
  double psi2 = (std::exp2(m.r2 / (1.0 - beta)) - 1.0) * m.noise_over_p / (1.0 - alpha);
  double pc = m.eta_c * std::pow(-std::expm1(-psi1 / m.s_c), m.n_c);
  double pe = m.eta_e * std::pow(-std::expm1(-psi2 / m.s_e), m.n_e);
  return std::max(pc, pe);
}

// Convex subproblem of one SCA iteration. Variables are ordered
// (tau, alpha, beta, a, b, q, w) where q = c / sc_cu and w = d / sc_eu are
// the threshold slacks rescaled so that q and alpha share magnitude at the
// linearization point; without the rescaling the quarter-square surrogates
// are so lopsided that alpha barely moves.
struct ScaDescriptor {
  OmaApproxModel model;
  double sc_cu = 0.0;       // c = sc_cu * q
  double sc_eu = 0.0;       // d = sc_eu * w
  double a0 = 0.0;          // log-tangent points
  double b0 = 0.0;
  double u0 = 0.0;          // alpha0 + q0, quarter-square expansion point
  double v0 = 0.0;          // (1 - alpha0) + w0
  std::array<double, 7> warm{};  // strictly feasible start

  static constexpr int kNumVars = 7;
  static constexpr int kNumConstraints = 17;

  // f_i(x) <= 0 for all i; returns the constraint values.
  std::array<double, kNumConstraints> constraints(const std::array<double, 7>& x) const {
    const auto& m = model;
    double tau = x[0], alpha = x[1], beta = x[2], a = x[3], b = x[4], q = x[5], w = x[6];
    std::array<double, kNumConstraints> f{};
    f[0] = (1.0 - a) - std::pow(tau / m.eta_c, 1.0 / m.n_c);
    f[1] = (1.0 - b) - std::pow(tau / m.eta_e, 1.0 / m.n_e);
    double kcu = m.noise_over_p / sc_cu;
    double keu = m.noise_over_p / sc_eu;
    double zeta_cu = 0.25 * u0 * u0 + 0.5 * u0 * (alpha + q - u0);
    double zeta_eu = 0.25 * v0 * v0 + 0.5 * v0 * ((1.0 - alpha) + w - v0);
    f[2] = kcu * (std::exp2(m.r1 / beta) - 1.0) + 0.25 * (alpha - q) * (alpha - q) - zeta_cu;
    f[3] = keu * (std::exp2(m.r2 / (1.0 - beta)) - 1.0) +
           0.25 * ((1.0 - alpha) - w) * ((1.0 - alpha) - w) - zeta_eu;
    f[4] = std::log(a0) + (a - a0) / a0 + q * sc_cu / m.s_c;
    f[5] = std::log(b0) + (b - b0) / b0 + w * sc_eu / m.s_e;
    f[6] = tau - 1.0;
    f[7] = kSlackFloor - a;
    f[8] = kSlackFloor - b;
    f[9] = kShareMin - alpha;
    f[10] = alpha - (1.0 - kShareMin);
    f[11] = kShareMin - beta;
    f[12] = beta - (1.0 - kShareMin);
    f[13] = q - kScaledSlackCap;
    f[14] = w - kScaledSlackCap;
    f[15] = -q;
    f[16] = -w;
    return f;
  }

  double strict_margin(const std::array<double, 7>& x) const {
    auto f = constraints(x);
    double worst = -std::numeric_limits<double>::infinity();
    for (double v : f) {
      if (std::isnan(v)) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, v);
    }
    return worst;
  }
};

struct InnerResult {
  std::array<double, 7> x{};
  double tau = 0.0;
  double kkt_residual = 0.0;
  int newton_steps = 0;
  bool converged = false;
};

// Dense symmetric 7x7 solve via Cholesky; returns false when the matrix is
// not positive definite.
inline bool cholesky_solve7(std::array<double, 49>& h, std::array<double, 7>& rhs) {
  constexpr int n = 7;
  for (int j = 0; j < n; ++j) {
    double diag = h[j * n + j];
    for (int k = 0; k < j; ++k) diag -= h[j * n + k] * h[j * n + k];
    if (!(diag > 0.0)) return false;
    diag = std::sqrt(diag);
    h[j * n + j] = diag;
    for (int i = j + 1; i < n; ++i) {
      double v = h[i * n + j];
      for (int k = 0; k < j; ++k) v -= h[i * n + k] * h[j * n + k];
      h[i * n + j] = v / diag;
    }
  }
  for (int i = 0; i < n; ++i) {
    double v = rhs[i];
    for (int k = 0; k < i; ++k) v -= h[i * n + k] * rhs[k];
    rhs[i] = v / h[i * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double v = rhs[i];
    for (int k = i + 1; k < n; ++k) v -= h[k * n + i] * rhs[k];
    rhs[i] = v / h[i * n + i];
  }
  return true;
}

// Gradients of the constraint set; dense rows indexed [constraint][variable].
inline void constraint_gradients(const ScaDescriptor& ds, const std::array<double, 7>& x,
                                 std::array<std::array<double, 7>, 17>& grad) {
  const auto& m = ds.model;
  double tau = x[0], alpha = x[1], beta = x[2], q = x[5], w = x[6];
  for (auto& row : grad) row.fill(0.0);
  double pc = std::pow(tau / m.eta_c, 1.0 / m.n_c);
  double pe = std::pow(tau / m.eta_e, 1.0 / m.n_e);
  grad[0][0] = -pc / (m.n_c * tau);
  grad[0][3] = -1.0;
  grad[1][0] = -pe / (m.n_e * tau);
  grad[1][4] = -1.0;
  constexpr double ln2 = 0.6931471805599453;
  double kcu = m.noise_over_p / ds.sc_cu;
  double keu = m.noise_over_p / ds.sc_eu;
  double ecu = std::exp2(m.r1 / beta);
  double eeu = std::exp2(m.r2 / (1.0 - beta));
  grad[2][1] = 0.5 * (alpha - q) - 0.5 * ds.u0;
  grad[2][2] = -kcu * ecu * ln2 * m.r1 / (beta * beta);
  grad[2][5] = -0.5 * (alpha - q) - 0.5 * ds.u0;
  double vmw = (1.0 - alpha) - w;
  grad[3][1] = -0.5 * vmw + 0.5 * ds.v0;
  grad[3][2] = keu * eeu * ln2 * m.r2 / ((1.0 - beta) * (1.0 - beta));
  grad[3][6] = -0.5 * vmw - 0.5 * ds.v0;
  grad[4][3] = 1.0 / ds.a0;
  grad[4][5] = ds.sc_cu / m.s_c;
  grad[5][4] = 1.0 / ds.b0;
  grad[5][6] = ds.sc_eu / m.s_e;
  grad[6][0] = 1.0;
  grad[7][3] = -1.0;
  grad[8][4] = -1.0;
  grad[9][1] = -1.0;
  grad[10][1] = 1.0;
  grad[11][2] = -1.0;
  grad[12][2] = 1.0;
  grad[13][5] = 1.0;
  grad[14][6] = 1.0;
  grad[15][5] = -1.0;
  grad[16][6] = -1.0;
}

// Hessian contributions of the non-linear constraints, scaled by 1/(-f_i),
// accumulated into h (row-major 7x7).
inline void accumulate_constraint_curvature(const ScaDescriptor& ds,
                                            const std::array<double, 7>& x,
                                            const std::array<double, 17>& f,
                                            std::array<double, 49>& h) {
  const auto& m = ds.model;
  double tau = x[0], alpha = x[1], beta = x[2], q = x[5], w = x[6];
  auto add = [&](int i, int j, double v) {
    h[i * 7 + j] += v;
    if (i != j) h[j * 7 + i] += v;
  };
  double pc = std::pow(tau / m.eta_c, 1.0 / m.n_c);
  double pe = std::pow(tau / m.eta_e, 1.0 / m.n_e);
  // d2/dtau2 of -(tau/eta)^{1/N} is (N-1)/N^2 * (tau/eta)^{1/N} / tau^2 >= 0
  add(0, 0, (m.n_c - 1.0) / (m.n_c * m.n_c) * pc / (tau * tau) / (-f[0]) +
                (m.n_e - 1.0) / (m.n_e * m.n_e) * pe / (tau * tau) / (-f[1]));
  constexpr double ln2 = 0.6931471805599453;
  double kcu = m.noise_over_p / ds.sc_cu;
  double keu = m.noise_over_p / ds.sc_eu;
  double ecu = std::exp2(m.r1 / beta);
  double eeu = std::exp2(m.r2 / (1.0 - beta));
  double lr1 = ln2 * m.r1;
  double lr2 = ln2 * m.r2;
  // quarter-square curvature of f[2]
  add(1, 1, 0.5 / (-f[2]));
  add(5, 5, 0.5 / (-f[2]));
  add(1, 5, -0.5 / (-f[2]));
  add(2, 2, kcu * ecu * lr1 * (lr1 + 2.0 * beta) / std::pow(beta, 4) / (-f[2]));
  // quarter-square curvature of f[3]; note d(1-alpha)/dalpha = -1
  add(1, 1, 0.5 / (-f[3]));
  add(6, 6, 0.5 / (-f[3]));
  add(1, 6, 0.5 / (-f[3]));
  add(2, 2, keu * eeu * lr2 * (lr2 + 2.0 * (1.0 - beta)) / std::pow(1.0 - beta, 4) /
                (-f[3]));
}

inline InnerResult solve_subproblem(const ScaDescriptor& ds, const ScaConfig& cfg,
                                    double gap) {
  constexpr int nv = ScaDescriptor::kNumVars;
  constexpr int nc = ScaDescriptor::kNumConstraints;
  std::array<double, nv> x = ds.warm;
  if (ds.strict_margin(x) >= 0.0) {
    throw std::runtime_error("sca subproblem started from an infeasible point");
  }
  auto barrier_value = [&](double t, const std::array<double, nv>& pt) {
    auto f = ds.constraints(pt);
    double v = t * pt[0];
    for (double fi : f) {
      if (!(fi < 0.0)) return std::numeric_limits<double>::infinity();
      v -= std::log(-fi);
    }
    return v;
  };
  InnerResult res;
  double t = cfg.barrier_t0;
  std::array<std::array<double, nv>, nc> grad;
  while (true) {
    for (int step = 0; step < 80; ++step) {
      auto f = ds.constraints(x);
      constraint_gradients(ds, x, grad);
      std::array<double, nv> g{};
      g[0] = t;
      std::array<double, 49> h{};
      for (int i = 0; i < nc; ++i) {
        double inv = 1.0 / (-f[i]);
        for (int a = 0; a < nv; ++a) {
          if (grad[i][a] == 0.0) continue;
          g[a] += grad[i][a] * inv;
          for (int b = a; b < nv; ++b) {
            if (grad[i][b] == 0.0) continue;
            double v = grad[i][a] * grad[i][b] * inv * inv;
            h[a * 7 + b] += v;
            if (a != b) h[b * 7 + a] += v;
          }
        }
      }
      accumulate_constraint_curvature(ds, x, f, h);
      std::array<double, nv> dir = g;
      for (auto& v : dir) v = -v;
      double ridge = 0.0;
      std::array<double, 49> hc = h;
      std::array<double, nv> rhs = dir;
      while (!cholesky_solve7(hc, rhs)) {
        ridge = (ridge == 0.0) ? 1e-10 : ridge * 16.0;
        if (ridge > 1e8) {
          throw std::runtime_error("sca subproblem: barrier hessian factorization failed");
        }
        hc = h;
        for (int i = 0; i < nv; ++i) hc[i * 7 + i] += ridge;
        rhs = dir;
      }
      dir = rhs;
      double slope = 0.0;
      for (int i = 0; i < nv; ++i) slope += g[i] * dir[i];
      if (!(slope < 0.0)) break;  // ascent direction after ridging: stage converged
      if (-slope * 0.5 < 1e-12 * (1.0 + std::fabs(t * x[0]))) break;
      double b0v = barrier_value(t, x);
      double s = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        std::array<double, nv> cand = x;
        for (int i = 0; i < nv; ++i) cand[i] += s * dir[i];
        if (barrier_value(t, cand) <= b0v + 0.25 * s * slope) {
          x = cand;
          moved = true;
          break;
        }
        s *= 0.5;
      }
      ++res.newton_steps;
      if (!moved) break;
    }
    if (double(nc) / t < gap) break;
    t *= cfg.barrier_mu;
  }
  auto f = ds.constraints(x);
  constraint_gradients(ds, x, grad);
  std::array<double, nv> resid{};
  resid[0] = t;
  for (int i = 0; i < nc; ++i) {
    for (int a = 0; a < nv; ++a) resid[a] += grad[i][a] / (-f[i]);
  }
  double nrm = 0.0;
  for (double v : resid) nrm += v * v;
  res.kkt_residual = std::sqrt(nrm) / t;
  res.x = x;
  res.tau = x[0];
  res.converged = true;
  return res;
}

}  // namespace detail

inline ScaState sca_initialize_at(const Scenario& sc, double alpha, double beta) {
  detail::OmaApproxModel m = detail::make_approx_model(sc);
  ScaState st;
  st.alpha = alpha;
  st.beta = beta;
  double psi1 = (std::exp2(m.r1 / beta) - 1.0) * m.noise_over_p / alpha;
  double psi2 = (std::exp2(m.r2 / (1.0 - beta)) - 1.0) * m.noise_over_p / (1.0 - alpha);
  st.c = psi1 * (1.0 + detail::kNudge);
  st.d = psi2 * (1.0 + detail::kNudge);
  st.a = std::max(std::exp(-st.c / m.s_c) * (1.0 - detail::kNudge),
                  2.0 * detail::kSlackFloor);
  st.b = std::max(std::exp(-st.d / m.s_e) * (1.0 - detail::kNudge),
                  2.0 * detail::kSlackFloor);
  double floor_tau = std::max(m.eta_c * std::pow(1.0 - st.a, m.n_c),
                              m.eta_e * std::pow(1.0 - st.b, m.n_e));
  st.tau = floor_tau * (1.0 + detail::kNudge);
  // keep the epigraph variable strictly inside its unit cap
  if (st.tau >= 1.0) st.tau = 0.5 * (floor_tau + 1.0);
  return st;
}

inline ScaState sca_initialize(const Scenario& sc) { return sca_initialize_at(sc, 0.5, 0.5); }

inline detail::ScaDescriptor sca_linearize(const Scenario& sc, const ScaState& st) {
  detail::ScaDescriptor ds;
  ds.model = detail::make_approx_model(sc);
  ds.sc_cu = st.c / st.alpha;
  ds.sc_eu = st.d / (1.0 - st.alpha);
  ds.a0 = st.a;
  ds.b0 = st.b;
  double q0 = st.c / ds.sc_cu;
  double w0 = st.d / ds.sc_eu;
  ds.u0 = st.alpha + q0;
  ds.v0 = (1.0 - st.alpha) + w0;
  ds.warm = {st.tau, st.alpha, st.beta, st.a, st.b, q0, w0};
  if (ds.strict_margin(ds.warm) >= -1e-13) {
    throw std::runtime_error("sca linearization point is not strictly feasible; "
                             "re-initialize the iterate");
  }
  return ds;
}

inline ScaState sca_state_from(const detail::ScaDescriptor& ds,
                               const detail::InnerResult& inner, int iteration) {
  ScaState st;
  st.tau = inner.x[0];
  st.alpha = inner.x[1];
  st.beta = inner.x[2];
  st.a = inner.x[3];
  st.b = inner.x[4];
  st.c = inner.x[5] * ds.sc_cu;
  st.d = inner.x[6] * ds.sc_eu;
  st.iteration = iteration;
  return st;
}

inline SolveReport sca_solve(const Scenario& sc, const ScaConfig& cfg = {},
                             std::vector<double>* tau_trace = nullptr) {
  if (!(cfg.eps_tau > 0.0) || cfg.max_outer < 1 || !(cfg.barrier_t0 > 0.0) ||
      !(cfg.barrier_mu > 1.0) || !(cfg.inner_tol > 0.0)) {
    throw std::domain_error("invalid sca configuration");
  }
  SolveReport rep;
  rep.method = Method::sca;
  ScaState state = sca_initialize(sc);
  double tau_prev = state.tau;
  double delta_prev = std::numeric_limits<double>::infinity();
  bool converged = false;
  int outer = 0;
  bool repaired_last = false;
  while (outer < cfg.max_outer) {
    detail::ScaDescriptor ds;
    try {
      ds = sca_linearize(sc, state);
    } catch (const std::runtime_error&) {
      // numerically non-interior iterate: rebuild healthy slack margins at
      // the same shares
      state = sca_initialize_at(sc, state.alpha, state.beta);
      repaired_last = true;
      ds = sca_linearize(sc, state);
    }
    double gap = std::max(1e-12, std::min(cfg.inner_tol, 1e-3 * state.tau));
    detail::InnerResult inner = detail::solve_subproblem(ds, cfg, gap);
    ++outer;
    double tau_new = inner.tau;
    if (tau_trace) tau_trace->push_back(tau_new);
    state = sca_state_from(ds, inner, outer);
    double delta = tau_prev - tau_new;
    if (delta < -cfg.inner_tol) {
      // a slack-margin repair restarts the subproblem from a loosened point
      // and may give back up to its nudge before re-descending
      double allowance = repaired_last ? 2.0 * detail::kNudge * tau_prev : 0.0;
      if (-delta > cfg.inner_tol + allowance) {
        throw std::runtime_error("sca objective increased across an iteration");
      }
      converged = true;  // stall at numerical accuracy
      break;
    }
    repaired_last = false;
    if (std::fabs(delta) < cfg.eps_tau ||
        (std::fabs(delta) < 0.01 * tau_new && std::fabs(delta) < 0.3 * delta_prev) ||
        tau_new < 10.0 * cfg.inner_tol) {
      converged = true;
      break;
    }
    tau_prev = tau_new;
    delta_prev = std::fabs(delta);
  }
  rep.alpha = state.alpha;
  rep.beta = state.beta;
  rep.tau = state.tau;
  rep.iterations = outer;
  rep.converged = converged;
  if (!converged) rep.note = "outer iteration cap reached before convergence";
  if (state.alpha <= detail::kShareClampFlag || state.alpha >= 1.0 - detail::kShareClampFlag ||
      state.beta <= detail::kShareClampFlag || state.beta >= 1.0 - detail::kShareClampFlag) {
    rep.note = rep.note.empty() ? "share clamped at box boundary"
                                : rep.note + "; share clamped at box boundary";
  }
  rep.outage = oma_outage_pair(sc, state.alpha, state.beta);
  return rep;
}

// Exhaustive comparator on the approximate objective; deterministic row-major
// scan keeps ties stable.
inline GridPoint grid_oracle(const Scenario& sc, double step) {
  if (!(step > 0.0) || !(step < 0.5)) {
    throw std::domain_error("grid step must lie in (0, 0.5)");
  }
  detail::OmaApproxModel m = detail::make_approx_model(sc);
  GridPoint best;
  best.tau = std::numeric_limits<double>::infinity();
  int cells = int(std::floor((1.0 - 0.5 * step) / step));
  for (int i = 1; i <= cells; ++i) {
    double alpha = i * step;
    for (int j = 1; j <= cells; ++j) {
      double beta = j * step;
      double tau = detail::approx_objective(m, alpha, beta);
      if (tau < best.tau) {
        best.alpha = alpha;
        best.beta = beta;
        best.tau = tau;
      }
    }
  }
  return best;
}

}  // namespace fasfair

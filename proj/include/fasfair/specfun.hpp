#pragma once
// Special-function kernel for the correlated best-port outage integrals:
// Bessel J1 and I0, the 1F2 hypergeometric series, the first-order Marcum Q
// function, and a cached Gauss-Laguerre rule for integrals of e^{-t} f(t).

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fasfair {

namespace detail {

// One backward (Miller) pass over the J-Bessel recurrence. Returns J0(x),
// J1(x) and sum_{k>=0} J_{2k+1}(x), normalized via J0 + 2*sum J_{2k} = 1.
// Requires x > 0; intended for x >= ~0.25 (small x is served by series).
struct JBesselPass {
  double j0;
  double j1;
  double odd_sum;
};

inline JBesselPass bessel_j_pass(double x) {
  // start order: past the k ~ x turning point plus several Airy widths,
  // so the seeded tail is damped below 1e-17 of the surviving terms
  int m = static_cast<int>(x + 11.0 * std::cbrt(x + 1.0)) + 26;
  if (m % 2 != 0) ++m;
  double fp = 0.0;     // f_{k+1}
  double fc = 1e-30;   // f_k, starting at k = m
  double j1 = 0.0, odd = 0.0, norm = 0.0;
  for (int k = m; k >= 0; --k) {
    if (k == 1) j1 = fc;
    if (k % 2 == 1) {
      odd += fc;
    } else {
      norm += (k == 0) ? fc : 2.0 * fc;
    }
    if (k == 0) break;
    double fm = (2.0 * k / x) * fc - fp;
    fp = fc;
    fc = fm;
    if (std::fabs(fc) > 1e250) {
      fc *= 1e-250;
      fp *= 1e-250;
      j1 *= 1e-250;
      odd *= 1e-250;
      norm *= 1e-250;
    }
  }
  return {fc / norm, j1 / norm, odd / norm};
}

}  // namespace detail

inline double bessel_j1(double x) {
  if (!std::isfinite(x)) throw std::domain_error("bessel_j1: non-finite argument");
  double ax = std::fabs(x);
  double r;
  if (ax < 0.25) {
    // ascending series (x/2) sum_k (-x^2/4)^k / (k! (k+1)!)
    double q = -0.25 * ax * ax;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 12; ++k) {
      term *= q / (k * (k + 1.0));
      sum += term;
      if (std::fabs(term) < 1e-18) break;
    }
    r = 0.5 * ax * sum;
  } else {
    r = detail::bessel_j_pass(ax).j1;
  }
  return x < 0.0 ? -r : r;
}

// e^{-|z|} I0(z); never overflows
inline double bessel_i0_scaled(double z) {
  if (!std::isfinite(z)) throw std::domain_error("bessel_i0: non-finite argument");
  double x = std::fabs(z);
  if (x < 40.0) {
    double t = 1.0, s = 1.0;
    for (int k = 1; k < 200; ++k) {
      t *= (x * x) / (4.0 * double(k) * double(k));
      s += t;
      if (t < s * 1e-17) break;
    }
    return s * std::exp(-x);
  }
  // asymptotic tail sum ((2k-1)!!)^2 / (k! (8x)^k); terms decay well before k=30
  double t = 1.0, s = 1.0;
  for (int k = 1; k <= 30; ++k) {
    double odd = 2.0 * k - 1.0;
    t *= odd * odd / (8.0 * x * k);
    s += t;
    if (t < s * 1e-17) break;
  }
  return s / std::sqrt(2.0 * std::numbers::pi * x);
}

inline double bessel_i0(double z) {
  if (!std::isfinite(z)) throw std::domain_error("bessel_i0: non-finite argument");
  double x = std::fabs(z);
  if (x < 40.0) {
    double t = 1.0, s = 1.0;
    for (int k = 1; k < 200; ++k) {
      t *= (x * x) / (4.0 * double(k) * double(k));
      s += t;
      if (t < s * 1e-17) break;
    }
    return s;
  }
  // overflows to +inf past x ~ 713; callers needing the tail use the scaled form
  return std::exp(x) * bessel_i0_scaled(x);
}

inline double hyp1f2(double a, double b1, double b2, double z) {
  if (!std::isfinite(a) || !std::isfinite(b1) || !std::isfinite(b2) || !std::isfinite(z))
    throw std::domain_error("hyp1f2: non-finite argument");
  auto bad_pole = [](double b) { return b <= 0.0 && b == std::floor(b); };
  if (bad_pole(b1) || bad_pole(b2))
    throw std::domain_error("hyp1f2: lower parameter is a nonpositive integer");
  if (z == 0.0) return 1.0;
  if (a == 0.5 && b1 == 1.0 && b2 == 1.5 && z <= -25.0) {
    // 1F2(1/2; 1, 3/2; -x^2/4) = (2/x) sum_{k>=0} J_{2k+1}(x). The direct
    // series loses ~10 digits to cancellation by z = -250; the Bessel form
    // keeps full precision at any aperture.
    double x = 2.0 * std::sqrt(-z);
    return (2.0 / x) * detail::bessel_j_pass(x).odd_sum;
  }
  double term = 1.0, sum = 1.0, comp = 0.0;
  for (int k = 0; k < 10000; ++k) {
    term *= z * (a + k) / ((b1 + k) * (b2 + k) * (k + 1.0));
    double y = term - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (k > 3 && std::fabs(term) <= 1e-17 * std::fabs(sum)) return sum;
  }
  throw std::domain_error("hyp1f2: series did not converge within 10000 terms");
}

// Q1 and its complement P = 1 - Q1, each computed by a series of positive
// terms in its own small-value regime so both carry full relative precision.
struct MarcumSplit {
  double q;
  double p;
};

inline MarcumSplit marcum_q1_split(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw std::domain_error("marcum_q1: arguments must be finite and nonnegative");
  if (b == 0.0) return {1.0, 0.0};
  if (a == 0.0) {
    double q = std::exp(-0.5 * b * b);
    return {q, -std::expm1(-0.5 * b * b)};
  }
  double x = a * b;
  double r = (a < b) ? a / b : b / a;

  // series length: r^k e^{-x} I_k(x) falls below ~1e-18 once
  // k^2/(2x) + k ln(1/r) exceeds 42
  double L = -std::log(r);
  int kmax = static_cast<int>(84.0 * x / (x * L + std::sqrt(x * L * x * L + 84.0 * x))) + 8;

  double i0s;         // e^{-x} I0(x)
  double tail = 0.0;  // sum_{k>=1} r^k e^{-x} I_k(x)
  if (x < 0.5) {
    // ascending series per order; the backward recurrence would grow by
    // 2k/x per step and overflow long before the rescale guard for tiny x
    i0s = bessel_i0_scaled(x);
    double ex = std::exp(-x);
    double rp = 1.0;
    double pk = 1.0;  // (x/2)^k / k!
    for (int k = 1; k <= kmax; ++k) {
      rp *= r;
      pk *= 0.5 * x / k;
      if (rp == 0.0 || pk == 0.0) break;
      double term = 1.0, ssum = 1.0;
      for (int j = 1; j <= 40; ++j) {
        term *= 0.25 * x * x / (double(j) * (k + j));
        ssum += term;
        if (term < ssum * 1e-18) break;
      }
      double t = rp * ex * pk * ssum;
      tail += t;
      if (t == 0.0 || t < tail * 1e-18) break;
    }
  } else {
    int m = static_cast<int>(std::ceil(std::sqrt(double(kmax) * kmax + 84.0 * x))) + 12;
    if (m < kmax + 8) m = kmax + 8;
    // backward recurrence for the scaled I_k; normalization 1 = I0' + 2 sum I_k'
    std::vector<double> y(static_cast<size_t>(m) + 2);
    y[m + 1] = 0.0;
    y[m] = 1e-250;
    for (int k = m; k >= 1; --k) {
      y[k - 1] = y[k + 1] + (2.0 * k / x) * y[k];
      if (y[k - 1] > 1e250) {
        for (int j = k - 1; j <= m + 1; ++j) y[j] *= 1e-250;
      }
    }
    double norm = y[0];
    for (int k = 1; k <= m; ++k) norm += 2.0 * y[k];
    i0s = y[0] / norm;
    double rp = 1.0;
    for (int k = 1; k <= m; ++k) {
      rp *= r;
      double t = rp * (y[k] / norm);
      tail += t;
      if (t < tail * 1e-18 || rp == 0.0) break;
    }
  }
  double d = (a < b) ? b - a : a - b;
  double damp = std::exp(-0.5 * d * d);
  if (a < b) {
    double q = damp * (i0s + tail);
    return {q, 1.0 - q};
  }
  double p = damp * tail;
  return {1.0 - p, p};
}

inline double marcum_q1(double a, double b) { return marcum_q1_split(a, b).q; }

struct QuadratureSpec {
  int node_count = 96;
  double abs_tol = 1e-9;
  int max_refinements = 1;
};

struct IntegralEstimate {
  double value = 0.0;
  bool converged = false;
  int nodes_used = 0;
  double last_delta = 0.0;
};

struct GaussLaguerreRule {
  std::vector<double> node;
  std::vector<double> weight;
};

namespace detail {

// Golub-Welsch: nodes are eigenvalues of the Laguerre Jacobi matrix
// (diag 2i+1, subdiag i+1), weights the squared first eigenvector
// components (mu0 = 1). Implicit-shift QL tracking only the first row.
inline GaussLaguerreRule make_gauss_laguerre(int n) {
  std::vector<double> d(n), e(n), z(n, 0.0);
  for (int i = 0; i < n; ++i) {
    d[i] = 2.0 * i + 1.0;
    e[i] = (i < n - 1) ? double(i + 1) : 0.0;
  }
  z[0] = 1.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    for (;;) {
      int m = l;
      while (m < n - 1) {
        double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd) break;
        ++m;
      }
      if (m == l) break;
      if (++iter > 60) throw std::runtime_error("gauss_laguerre: eigensolver failed to converge");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double rr = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(rr, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (int i = m - 1; i >= l; --i) {
        double f = s * e[i];
        double bb = c * e[i];
        rr = std::hypot(f, g);
        e[i + 1] = rr;
        if (rr == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / rr;
        c = g / rr;
        g = d[i + 1] - p;
        rr = (d[i] - g) * s + 2.0 * c * bb;
        p = s * rr;
        d[i + 1] = g + p;
        g = c * rr - bb;
        double fz = z[i + 1];
        z[i + 1] = s * z[i] + c * fz;
        z[i] = c * z[i] - s * fz;
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) { return d[i] < d[j]; });
  GaussLaguerreRule rule;
  rule.node.resize(n);
  rule.weight.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.node[i] = d[order[i]];
    rule.weight[i] = z[order[i]] * z[order[i]];
  }
  // cheap self-check on the first three moments of e^{-t}
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    m0 += rule.weight[i];
    m1 += rule.weight[i] * rule.node[i];
    m2 += rule.weight[i] * rule.node[i] * rule.node[i];
  }
  if (std::fabs(m0 - 1.0) > 1e-10 || std::fabs(m1 - 1.0) > 1e-10 || std::fabs(m2 - 2.0) > 2e-10)
    throw std::runtime_error("gauss_laguerre: moment self-check failed for n=" + std::to_string(n));
  return rule;
}

}  // namespace detail

inline const GaussLaguerreRule& gauss_laguerre(int n) {
  if (n < 1) throw std::domain_error("gauss_laguerre: node count must be positive");
  static std::mutex mtx;
  static std::map<int, GaussLaguerreRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::make_gauss_laguerre(n)).first;
  return it->second;
}

// Quadrature estimate of int_0^inf e^{-t} f(t) dt with doubling refinement.
// Intended for integrands mapping into [0,1]; when the sampled values stay in
// that range the estimate is clamped against rounding excursions.
template <class F>
IntegralEstimate integrate_exp_weighted(F&& f, const QuadratureSpec& spec = {}) {
  if (spec.node_count < 8) throw std::domain_error("integrate_exp_weighted: node_count must be >= 8");
  if (!(spec.abs_tol > 0.0)) throw std::domain_error("integrate_exp_weighted: abs_tol must be positive");
  if (spec.max_refinements < 1) throw std::domain_error("integrate_exp_weighted: max_refinements must be >= 1");
  double fmin = std::numeric_limits<double>::infinity();
  double fmax = -fmin;
  auto eval = [&](int m) {
    const GaussLaguerreRule& rule = gauss_laguerre(m);
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      double v = f(rule.node[i]);
      fmin = std::min(fmin, v);
      fmax = std::max(fmax, v);
      s += rule.weight[i] * v;
    }
    return s;
  };
  IntegralEstimate out;
  int n = spec.node_count;
  double prev = eval(n);
  out.value = prev;
  out.nodes_used = n;
  for (int k = 0; k < spec.max_refinements; ++k) {
    n *= 2;
    double next = eval(n);
    out.last_delta = std::fabs(next - prev);
    out.value = next;
    out.nodes_used = n;
    if (out.last_delta < spec.abs_tol) {
      out.converged = true;
      break;
    }
    prev = next;
  }
  if (fmin >= -1e-12 && fmax <= 1.0 + 1e-12) out.value = std::clamp(out.value, 0.0, 1.0);
  return out;
}

}  // namespace fasfair

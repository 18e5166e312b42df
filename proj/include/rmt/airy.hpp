#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "rmt/errors.hpp"

namespace rmt {

struct AiryValue {
  double ai = 0.0;
  double ai_prime = 0.0;
};

namespace detail {

// Ai(0) = 3^(-2/3)/Gamma(2/3), -Ai'(0) = 3^(-1/3)/Gamma(1/3).
inline constexpr double kAiZero = 0.35502805388781723926;
inline constexpr double kAiPrimeZero = -0.25881940379280679840;

// Maclaurin series Ai = c1*f - c2*g, reliable for |x| <= 5 before the
// cancellation between f and g costs more than ~3 digits.
inline AiryValue airy_series(double x) {
  const double x3 = x * x * x;
  // f = sum 3^k (1/3)_k x^{3k}/(3k)!, g = sum 3^k (2/3)_k x^{3k+1}/(3k+1)!
  double f_term = 1.0, g_term = x;
  double fp_term = 0.5 * x * x, gp_term = 1.0; // f', g' leading terms
  double f = f_term, g = g_term, fp = fp_term, gp = gp_term;
  for (int k = 0; k < 200; ++k) {
    const double tk = 3.0 * k;
    f_term *= x3 / ((tk + 2.0) * (tk + 3.0));
    g_term *= x3 / ((tk + 3.0) * (tk + 4.0));
    // fp indexes from k=1: ratio b_{k+1}/b_k = (k+1)/k * x^3/((3k+2)(3k+3))
    fp_term *= (k + 2.0) / (k + 1.0) * x3 / ((tk + 5.0) * (tk + 6.0));
    gp_term *= x3 / ((tk + 1.0) * (tk + 3.0));
    f += f_term;
    g += g_term;
    fp += fp_term;
    gp += gp_term;
    if (std::abs(f_term) < 1e-18 * std::abs(f) &&
        std::abs(g_term) < 1e-18 * (std::abs(g) + 1e-30)) {
      break;
    }
  }
  AiryValue v;
  v.ai = kAiZero * f + kAiPrimeZero * g;
  v.ai_prime = kAiZero * fp + kAiPrimeZero * gp;
  return v;
}

// Poincare expansions for large |x| (DLMF 9.7); coefficients
// u_k = u_{k-1} (6k-5)(6k-3)(6k-1)/(216 k (2k-1)), v_k = u_k (6k+1)/(1-6k).
inline AiryValue airy_asymptotic_pos(double x) {
  const double sqrtx = std::sqrt(x);
  const double xi = (2.0 / 3.0) * x * sqrtx;
  double u = 1.0, su = 0.0, sv = 0.0;
  double prev = std::numeric_limits<double>::max();
  double sign = 1.0, pw = 1.0;
  for (int k = 0;; ++k) {
    if (k > 0) {
      u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
           (216.0 * k * (2.0 * k - 1.0));
      pw /= xi;
      sign = -sign;
    }
    const double v = (k == 0) ? 1.0 : u * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
    const double tu = sign * u * pw;
    if (std::abs(tu) >= prev || k > 60) break; // divergent tail
    su += tu;
    sv += sign * v * pw;
    prev = std::abs(tu);
    if (prev < 1e-18) break;
  }
  const double pre = std::exp(-xi) / (2.0 * std::sqrt(M_PI));
  AiryValue r;
  r.ai = pre / std::pow(x, 0.25) * su;
  r.ai_prime = -pre * std::pow(x, 0.25) * sv;
  return r;
}

inline AiryValue airy_asymptotic_neg(double x) {
  const double z = -x;
  const double sqrtz = std::sqrt(z);
  const double zeta = (2.0 / 3.0) * z * sqrtz;
  // Split u_k, v_k into even/odd alternating sums.
  double u = 1.0, pw = 1.0;
  double ce = 0.0, co = 0.0, de = 0.0, doo = 0.0;
  double prev = std::numeric_limits<double>::max();
  for (int k = 0; k <= 60; ++k) {
    if (k > 0) {
      u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
           (216.0 * k * (2.0 * k - 1.0));
      pw /= zeta;
    }
    const double v = (k == 0) ? 1.0 : u * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
    const double term = u * pw;
    if (std::abs(term) >= prev) break;
    prev = std::abs(term);
    const double s4 = ((k / 2) % 2 == 0) ? 1.0 : -1.0; // (-1)^{k/2}
    if (k % 2 == 0) {
      ce += s4 * term;
      de += s4 * v * pw;
    } else {
      co += s4 * term;
      doo += s4 * v * pw;
    }
    if (prev < 1e-18) break;
  }
  const double ph = zeta - 0.25 * M_PI;
  const double c = std::cos(ph), s = std::sin(ph);
  const double q = std::pow(z, 0.25);
  AiryValue r;
  r.ai = (c * ce + s * co) / (std::sqrt(M_PI) * q);
  r.ai_prime = (s * de - c * doo) * q / std::sqrt(M_PI);
  return r;
}

// One Taylor step for y'' = t*y, expanding around t0, evaluated at t0+h.
inline void airy_taylor_step(double t0, double h, double& y, double& yp) {
  constexpr int kOrder = 30;
  double c[kOrder + 1];
  c[0] = y;
  c[1] = yp;
  for (int n = 0; n + 2 <= kOrder; ++n) {
    const double lower = (n >= 1) ? c[n - 1] : 0.0;
    c[n + 2] = (t0 * c[n] + lower) / ((n + 1.0) * (n + 2.0));
  }
  double v = 0.0, vp = 0.0;
  for (int n = kOrder; n >= 0; --n) v = v * h + c[n];
  for (int n = kOrder; n >= 1; --n) vp = vp * h + n * c[n];
  y = v;
  yp = vp;
}

// Bridge regions 5 < |x| < 8 by Taylor-stepping the Airy ODE from a
// trusted anchor toward x (always in the direction of decreasing x, where
// the propagation is numerically benign).
inline AiryValue airy_bridge(double x, double anchor, AiryValue a) {
  double t = anchor, y = a.ai, yp = a.ai_prime;
  while (t > x + 1e-14) {
    const double h = std::max(x - t, -0.25);
    airy_taylor_step(t, h, y, yp);
    t += h;
  }
  return {y, yp};
}

} // namespace detail

// Airy function of the first kind and its derivative.
// Series for |x| <= 5, asymptotic expansions for |x| >= 8, ODE Taylor
// propagation from the nearest trusted anchor in between.
inline AiryValue airy_ai(double x) {
  if (!std::isfinite(x)) throw domain_error("airy_ai: non-finite argument");
  if (std::abs(x) > 200.0) throw domain_error("airy_ai: |x| > 200");
  if (std::abs(x) <= 5.0) return detail::airy_series(x);
  if (x >= 8.0) return detail::airy_asymptotic_pos(x);
  if (x <= -8.0) return detail::airy_asymptotic_neg(x);
  if (x > 0.0) return detail::airy_bridge(x, 8.0, detail::airy_asymptotic_pos(8.0));
  return detail::airy_bridge(x, -5.0, detail::airy_series(-5.0));
}

} // namespace rmt

#pragma once

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>
#include <vector>

#include "rmt/errors.hpp"
#include "rmt/fredholm.hpp"
#include "rmt/painleve.hpp"

namespace rmt {

// The two candidate F_2 integrand readings; the Fredholm oracle picks one
// at build time.
enum class TWIntegrand {
  x_minus_s_times_q_squared, // (x-s) q(x)^2
  x_minus_s_squared_times_q  // (x-s)^2 q(x)
};

struct TWBuildInfo {
  TWIntegrand adopted = TWIntegrand::x_minus_s_times_q_squared;
  double max_oracle_dev_adopted = 0.0;
  double max_oracle_dev_rejected = 0.0;
};

// Tabulated Tracy-Widom CDF with monotone cubic (PCHIP) interpolation.
struct TWDistribution {
  int beta = 0;
  std::vector<double> grid;
  std::vector<double> cdf;
  std::vector<double> slope; // PCHIP slopes, same length as grid
  TWBuildInfo build_info;
};

namespace detail {

// Cumulative integral from each node to the right end by trapezoid with
// endpoint-derivative correction (O(h^4) when f' is exact).
inline std::vector<double> cumulative_from_right(
    const std::vector<double>& grid, const std::vector<double>& f,
    const std::vector<double>& fp) {
  const std::size_t n = grid.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    const double h = grid[i + 1] - grid[i];
    out[i] = out[i + 1] + 0.5 * h * (f[i] + f[i + 1]) +
             h * h / 12.0 * (fp[i] - fp[i + 1]);
  }
  return out;
}

// Fritsch-Carlson monotone cubic slopes.
inline std::vector<double> pchip_slopes(const std::vector<double>& x,
                                        const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n - 1), m(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  m[0] = d[0];
  m[n - 1] = d[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      m[i] = 0.0;
    } else {
      const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      const double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
      m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  // Clip endpoint slopes to preserve monotonicity.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (d[i] == 0.0) {
      m[i] = m[i + 1] = 0.0;
    } else {
      m[i] = std::clamp(m[i], 0.0, 3.0 * d[i]);
      m[i + 1] = std::clamp(m[i + 1], 0.0, 3.0 * d[i]);
    }
  }
  return m;
}

inline double hermite_eval(double x0, double x1, double y0, double y1,
                           double m0, double m1, double x) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return y0 * (2 * t3 - 3 * t2 + 1) + h * m0 * (t3 - 2 * t2 + t) +
         y1 * (-2 * t3 + 3 * t2) + h * m1 * (t3 - t2);
}

} // namespace detail

// Builds the F_beta table on [-13, 10], step 0.01. F_2 comes from the
// Painleve solution through whichever integrand variant the Fredholm
// oracle confirms; F_1 through F_1(s)^2 = F_2(s) exp(-int_s^inf q).
inline TWDistribution build_tw(int beta) {
  if (beta != 1 && beta != 2) throw domain_error("build_tw: beta must be 1 or 2");

  // The Hastings-McLeod branch can be shot reliably down to about -10 in
  // extended precision; the table below that comes from tail asymptotics.
  const double p_min = -10.0, p_max = 10.0, h = 0.01;
  const PainleveSolution sol = solve_painleve_ii(p_min, p_max, h);
  const std::size_t pn = sol.grid.size();

  // Integrands and their exact derivatives for the corrected trapezoid.
  std::vector<double> q2(pn), xq2(pn), q1(pn), xq(pn), x2q(pn);
  std::vector<double> dq2(pn), dxq2(pn), dq1(pn), dxq(pn), dx2q(pn);
  for (std::size_t i = 0; i < pn; ++i) {
    const double x = sol.grid[i], q = sol.q[i], qp = sol.q_prime[i];
    q2[i] = q * q;
    xq2[i] = x * q * q;
    q1[i] = q;
    xq[i] = x * q;
    x2q[i] = x * x * q;
    dq2[i] = 2.0 * q * qp;
    dxq2[i] = q * q + 2.0 * x * q * qp;
    dq1[i] = qp;
    dxq[i] = q + x * qp;
    dx2q[i] = 2.0 * x * q + x * x * qp;
  }
  const auto Iq2 = detail::cumulative_from_right(sol.grid, q2, dq2);
  const auto Ixq2 = detail::cumulative_from_right(sol.grid, xq2, dxq2);
  const auto Iq = detail::cumulative_from_right(sol.grid, q1, dq1);
  const auto Ixq = detail::cumulative_from_right(sol.grid, xq, dxq);
  const auto Ix2q = detail::cumulative_from_right(sol.grid, x2q, dx2q);

  auto f2_variant_a = [&](std::size_t i) {
    const double s = sol.grid[i];
    return std::exp(-(Ixq2[i] - s * Iq2[i]));
  };
  auto f2_variant_b = [&](std::size_t i) {
    const double s = sol.grid[i];
    return std::exp(-(Ix2q[i] - 2.0 * s * Ixq[i] + s * s * Iq[i]));
  };

  // Adjudicate the integrand reading against the Fredholm oracle.
  TWBuildInfo info;
  {
    double dev_a = 0.0, dev_b = 0.0;
    for (double s = -5.0; s <= 3.0 + 1e-9; s += 0.5) {
      const std::size_t i = (std::size_t)std::llround((s - sol.grid.front()) / h);
      const double oracle = fredholm_tw2_cdf(s, 60);
      dev_a = std::max(dev_a, std::abs(f2_variant_a(i) - oracle));
      dev_b = std::max(dev_b, std::abs(f2_variant_b(i) - oracle));
    }
    if (dev_a <= dev_b) {
      info.adopted = TWIntegrand::x_minus_s_times_q_squared;
      info.max_oracle_dev_adopted = dev_a;
      info.max_oracle_dev_rejected = dev_b;
    } else {
      info.adopted = TWIntegrand::x_minus_s_squared_times_q;
      info.max_oracle_dev_adopted = dev_b;
      info.max_oracle_dev_rejected = dev_a;
    }
    if (info.max_oracle_dev_adopted > 1e-4) {
      throw build_error(
          "build_tw: neither F_2 integrand variant matches the Fredholm "
          "oracle (max deviation " +
          std::to_string(info.max_oracle_dev_adopted) + ")");
    }
  }
  const bool use_a = info.adopted == TWIntegrand::x_minus_s_times_q_squared;

  TWDistribution dist;
  dist.beta = beta;
  dist.build_info = info;
  const double t_min = -13.0, t_max = p_max;
  const std::size_t tn = (std::size_t)std::llround((t_max - t_min) / h) + 1;
  dist.grid.resize(tn);
  dist.cdf.resize(tn);

  // Values at the left edge of the Painleve range, for tail matching.
  const double f2_at_pmin = use_a ? f2_variant_a(0) : f2_variant_b(0);
  const double f1_at_pmin = std::sqrt(f2_at_pmin * std::exp(-Iq[0]));

  for (std::size_t k = 0; k < tn; ++k) {
    const double s = t_min + h * (double)k;
    dist.grid[k] = s;
    double v;
    if (s < p_min - 1e-12) {
      // Left-tail continuation matched at the solve boundary:
      // ln F_2 ~ -|s|^3/12; ln F_1 picks up half of that plus half the
      // divergent part of int q ~ (sqrt2/3)|s|^{3/2} (q ~ sqrt(-s/2)).
      const double a3 = std::abs(s * s * s);
      const double b3 = std::abs(p_min * p_min * p_min);
      double g = (a3 - b3) / (beta == 2 ? 12.0 : 24.0);
      if (beta == 1)
        g += std::sqrt(2.0) / 6.0 *
             (std::pow(-s, 1.5) - std::pow(-p_min, 1.5));
      v = (beta == 2 ? f2_at_pmin : f1_at_pmin) * std::exp(-g);
    } else {
      const std::size_t i = (std::size_t)std::llround((s - sol.grid.front()) / h);
      const double f2 = use_a ? f2_variant_a(i) : f2_variant_b(i);
      v = (beta == 2) ? f2 : std::sqrt(f2 * std::exp(-Iq[i]));
    }
    dist.cdf[k] = std::min(v, 1.0);
  }
  dist.slope = detail::pchip_slopes(dist.grid, dist.cdf);
  return dist;
}

// Monotone cubic interpolation of the table; clamps to {0,1} off-grid.
inline double tw_cdf(const TWDistribution& dist, double s) {
  if (dist.grid.empty()) throw domain_error("tw_cdf: distribution not built");
  if (std::isnan(s)) throw domain_error("tw_cdf: NaN argument");
  if (s <= dist.grid.front()) return 0.0;
  if (s >= dist.grid.back()) return 1.0;
  const auto it = std::upper_bound(dist.grid.begin(), dist.grid.end(), s);
  const std::size_t i = (std::size_t)(it - dist.grid.begin()) - 1;
  return detail::hermite_eval(dist.grid[i], dist.grid[i + 1], dist.cdf[i],
                              dist.cdf[i + 1], dist.slope[i],
                              dist.slope[i + 1], s);
}

// Quantile by bisection, then one secant refinement.
inline double tw_quantile(const TWDistribution& dist, double p) {
  if (!(p > 0.0 && p < 1.0)) throw domain_error("tw_quantile: p outside (0,1)");
  double lo = dist.grid.front(), hi = dist.grid.back();
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (tw_cdf(dist, mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  double s = 0.5 * (lo + hi);
  const double f_lo = tw_cdf(dist, lo), f_hi = tw_cdf(dist, hi);
  if (f_hi > f_lo) s = lo + (p - f_lo) * (hi - lo) / (f_hi - f_lo);
  return s;
}

// Memoized shared tables; immutable once built.
inline const TWDistribution& tw_table(int beta) {
  if (beta != 1 && beta != 2) throw domain_error("tw_table: beta must be 1 or 2");
  static std::once_flag once1, once2;
  static TWDistribution t1, t2;
  if (beta == 1) {
    std::call_once(once1, [] { t1 = build_tw(1); });
    return t1;
  }
  std::call_once(once2, [] { t2 = build_tw(2); });
  return t2;
}

} // namespace rmt

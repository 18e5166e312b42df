#pragma once

#include <cmath>
#include <vector>

#include "rmt/airy.hpp"
#include "rmt/errors.hpp"

namespace rmt {

// Hastings-McLeod solution of q'' = s q + 2 q^3 on an ascending grid.
struct PainleveSolution {
  std::vector<double> grid;
  std::vector<double> q;
  std::vector<double> q_prime;
};

namespace detail {

struct PState {
  long double q;
  long double qp;
};

inline PState pii_rhs(long double s, const PState& y) {
  return {y.qp, s * y.q + 2.0L * y.q * y.q * y.q};
}

// One embedded Cash-Karp 4(5) step; returns the 5th-order solution and the
// embedded error estimate.
inline PState pii_step(long double s, const PState& y, long double h,
                       long double& err) {
  const PState k1 = pii_rhs(s, y);
  auto at = [&](long double c1, long double c2, long double c3, long double c4,
                long double c5, const PState& K1, const PState& K2,
                const PState& K3, const PState& K4, const PState& K5) {
    return PState{y.q + h * (c1 * K1.q + c2 * K2.q + c3 * K3.q + c4 * K4.q +
                             c5 * K5.q),
                  y.qp + h * (c1 * K1.qp + c2 * K2.qp + c3 * K3.qp +
                              c4 * K4.qp + c5 * K5.qp)};
  };
  const PState z{0.0L, 0.0L};
  const PState k2 = pii_rhs(s + h / 5.0L, at(1.0L / 5.0L, 0, 0, 0, 0, k1, z, z, z, z));
  const PState k3 = pii_rhs(s + 3.0L * h / 10.0L,
                            at(3.0L / 40.0L, 9.0L / 40.0L, 0, 0, 0, k1, k2, z, z, z));
  const PState k4 = pii_rhs(s + 3.0L * h / 5.0L,
                            at(3.0L / 10.0L, -9.0L / 10.0L, 6.0L / 5.0L, 0, 0,
                               k1, k2, k3, z, z));
  const PState k5 = pii_rhs(s + h,
                            at(-11.0L / 54.0L, 5.0L / 2.0L, -70.0L / 27.0L,
                               35.0L / 27.0L, 0, k1, k2, k3, k4, z));
  const PState k6 = pii_rhs(s + 7.0L * h / 8.0L,
                            at(1631.0L / 55296.0L, 175.0L / 512.0L,
                               575.0L / 13824.0L, 44275.0L / 110592.0L,
                               253.0L / 4096.0L, k1, k2, k3, k4, k5));
  auto comb = [&](long double b1, long double b3, long double b4,
                  long double b5, long double b6) {
    return PState{
        y.q + h * (b1 * k1.q + b3 * k3.q + b4 * k4.q + b5 * k5.q + b6 * k6.q),
        y.qp + h * (b1 * k1.qp + b3 * k3.qp + b4 * k4.qp + b5 * k5.qp +
                    b6 * k6.qp)};
  };
  const PState y5 = comb(37.0L / 378.0L, 250.0L / 621.0L, 125.0L / 594.0L,
                         0.0L, 512.0L / 1771.0L);
  const PState y4 = comb(2825.0L / 27648.0L, 18575.0L / 48384.0L,
                         13525.0L / 55296.0L, 277.0L / 14336.0L, 1.0L / 4.0L);
  err = std::max(std::abs((double)(y5.q - y4.q)),
                 std::abs((double)(y5.qp - y4.qp)));
  return y5;
}

// Integrate from s_from down to s_to (s_to < s_from) with adaptive steps.
inline void pii_advance(long double& s, PState& y, long double s_to,
                        long double rtol, long double atol) {
  long double h = -1e-3L;
  int rejects = 0;
  while (s > s_to + 1e-14L) {
    if (s + h < s_to) h = s_to - s;
    long double err = 0.0L;
    const PState trial = pii_step(s, y, h, err);
    const long double scale =
        atol + rtol * std::max(std::abs((double)y.q) + std::abs((double)y.qp),
                               std::abs((double)trial.q) +
                                   std::abs((double)trial.qp));
    const long double ratio = err / scale;
    if (ratio <= 1.0L) {
      s += h;
      y = trial;
      if (std::abs((double)y.q) > 1e6) {
        throw integration_error(
            "solve_painleve_ii: blow-up detected (|q| > 1e6); wrong branch or "
            "step too coarse");
      }
      // The Hastings-McLeod solution is strictly positive. A negative q
      // means accumulated error pushed the shot onto a different branch
      // (either the blow-up side or the bounded oscillatory side).
      if (y.q <= 0.0L) {
        throw integration_error(
            "solve_painleve_ii: Hastings-McLeod branch lost (q <= 0)");
      }
      rejects = 0;
    } else if (++rejects > 200) {
      throw integration_error("solve_painleve_ii: step size collapse");
    }
    long double f = 0.9L * std::pow((double)(ratio + 1e-30L), -0.2);
    if (f > 5.0L) f = 5.0L;
    if (f < 0.2L) f = 0.2L;
    h *= f;
    if (std::abs(h) < 1e-13L) h = h < 0 ? -1e-13L : 1e-13L;
  }
}

} // namespace detail

// Integrates backwards from q(s_max) = Ai(s_max), q'(s_max) = Ai'(s_max).
// Output grid ascends from (approximately) s_min to s_max in units of
// `step`; the branch is selected purely by the Airy boundary data.
inline PainleveSolution solve_painleve_ii(double s_min, double s_max,
                                          double step) {
  if (!(s_min < -8.0)) throw domain_error("solve_painleve_ii: s_min must be < -8");
  if (!(s_max > 5.0)) throw domain_error("solve_painleve_ii: s_max must be > 5");
  if (!(step > 0.0)) throw domain_error("solve_painleve_ii: step must be > 0");

  const long long m =
      (long long)std::ceil((s_max - s_min) / step - 1e-9);
  PainleveSolution out;
  out.grid.resize(m + 1);
  out.q.resize(m + 1);
  out.q_prime.resize(m + 1);

  const AiryValue a = airy_ai(s_max);
  detail::PState y{(long double)a.ai, (long double)a.ai_prime};
  long double s = s_max;
  // Tight tolerances: perturbations off the Hastings-McLeod branch grow
  // like exp((2*sqrt(2)/3)|s|^{3/2}) once s < 0.
  const long double rtol = 1e-16L, atol = 1e-19L;
  for (long long k = 0; k <= m; ++k) {
    const long double target = (long double)s_max - (long double)step * k;
    detail::pii_advance(s, y, target, rtol, atol);
    const long long idx = m - k;
    out.grid[idx] = (double)target;
    out.q[idx] = (double)y.q;
    out.q_prime[idx] = (double)y.qp;
  }
  return out;
}

} // namespace rmt

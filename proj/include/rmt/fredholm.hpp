#pragma once

#include <cmath>
#include <vector>

#include "rmt/airy.hpp"
#include "rmt/errors.hpp"
#include "rmt/linalg.hpp"
#include "rmt/quadrature.hpp"

namespace rmt {

namespace detail {

// Airy kernel; diagonal limit K(x,x) = Ai'(x)^2 - x Ai(x)^2.
inline double airy_kernel(double x, double y, const AiryValue& ax,
                          const AiryValue& ay) {
  if (std::abs(x - y) < 1e-8) {
    const double m = 0.5 * (x + y);
    const AiryValue am = airy_ai(m);
    return am.ai_prime * am.ai_prime - m * am.ai * am.ai;
  }
  return (ax.ai * ay.ai_prime - ax.ai_prime * ay.ai) / (x - y);
}

} // namespace detail

// F_2(s) as the Nystrom determinant det(I - K) of the Airy kernel on
// (s, oo). Independent of the Painleve route; serves as its oracle.
inline double fredholm_tw2_cdf(double s, int quad_order = 80) {
  if (!(s >= -10.0 && s <= 6.0))
    throw domain_error("fredholm_tw2_cdf: s outside [-10, 6]");
  if (quad_order < 20 || quad_order > 200)
    throw domain_error("fredholm_tw2_cdf: quad_order outside [20, 200]");

  // The kernel decays superexponentially; truncating the half-line at
  // x = 16 leaves mass below 1e-25.
  const double upper = 16.0;
  const GaussLegendre gl(quad_order);
  const int n = quad_order;
  std::vector<double> xs(n), ws(n);
  std::vector<AiryValue> av(n);
  const double c = 0.5 * (s + upper), h = 0.5 * (upper - s);
  for (int i = 0; i < n; ++i) {
    xs[i] = c + h * gl.x[i];
    ws[i] = h * gl.w[i];
    av[i] = airy_ai(xs[i]);
  }

  SymMatrix m(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double k = detail::airy_kernel(xs[i], xs[j], av[i], av[j]);
      m.at(i, j) = (i == j ? 1.0 : 0.0) - std::sqrt(ws[i] * ws[j]) * k;
    }
  }

  double det;
  try {
    det = std::exp(2.0 * cholesky(m).log_det());
  } catch (const not_positive_definite_error&) {
    throw numerical_error("fredholm_tw2_cdf: determinant not positive");
  }
  if (det < -1e-6 || det > 1.0 + 1e-6)
    throw numerical_error("fredholm_tw2_cdf: determinant outside [0, 1]");
  return det;
}

} // namespace rmt

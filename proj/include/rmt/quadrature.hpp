#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rmt/errors.hpp"

namespace rmt {

// Gauss-Legendre rule on [-1, 1]; nodes ascending.
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;

  explicit GaussLegendre(int n) {
    if (n < 1) throw domain_error("GaussLegendre: order must be >= 1");
    x.resize(n);
    w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
      // Chebyshev initial guess, refined by Newton on P_n.
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
        }
        pp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / pp;
        z -= dz;
        if (std::abs(dz) < 1e-15) break;
      }
      x[i] = -z;
      x[n - 1 - i] = z;
      w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
  }

  // Integrate f over [a, b].
  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(c + h * x[i]);
    return s * h;
  }
};

} // namespace rmt

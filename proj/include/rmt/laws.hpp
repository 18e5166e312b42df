#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rmt/errors.hpp"
#include "rmt/quadrature.hpp"

namespace rmt {

// Marchenko-Pastur law for S = n^{-1} X X^T with aspect ratio gamma = p/n.
struct MPLaw {
  double gamma = 0.0;
  double b_minus = 0.0;
  double b_plus = 0.0;
  double atom_at_zero = 0.0;
};

inline MPLaw mp_law(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw domain_error("mp_law: gamma must be a positive real");
  MPLaw law;
  law.gamma = gamma;
  const double r = std::sqrt(gamma);
  law.b_minus = (1.0 - r) * (1.0 - r);
  law.b_plus = (1.0 + r) * (1.0 + r);
  law.atom_at_zero = std::max(0.0, 1.0 - 1.0 / gamma);
  return law;
}

// Continuous part only; the zero atom lives in the MPLaw field.
inline double mp_density(const MPLaw& law, double t) {
  if (t <= law.b_minus || t >= law.b_plus) return 0.0;
  if (t <= 0.0) return 0.0;
  return std::sqrt((law.b_plus - t) * (t - law.b_minus)) /
         (2.0 * M_PI * law.gamma * t);
}

// CDF including the zero atom. The substitution t = 1 + gamma +
// 2 sqrt(gamma) sin(theta) makes the integrand smooth across the edges
// (and removes the gamma = 1 singularity at t = 0).
inline double mp_cdf(const MPLaw& law, double t) {
  if (t < 0.0) return 0.0;
  if (t >= law.b_plus) return 1.0;
  double c = law.atom_at_zero;
  if (t <= law.b_minus) return c;
  const double r = std::sqrt(law.gamma);
  const double mid = 1.0 + law.gamma;
  const double theta_t = std::asin(std::clamp((t - mid) / (2.0 * r), -1.0, 1.0));
  static const GaussLegendre gl(128);
  c += gl.integrate(
      [&](double th) {
        const double ct = std::cos(th);
        // mid + 2 r sin(th) = b_minus + 4 r cos^2(pi/4 - th/2), which does
        // not cancel near th = -pi/2 (the gamma = 1 hard edge).
        const double cq = std::cos(M_PI / 4.0 - 0.5 * th);
        return 2.0 * ct * ct / (M_PI * (law.b_minus + 4.0 * r * cq * cq));
      },
      -M_PI / 2.0, theta_t);
  return std::min(c, 1.0);
}

enum class Family { Single, Double };
enum class Field { Real, Complex };

// Dimensions of the null ensemble. Single Wishart uses (n, p); double
// Wishart uses (n1, n2, p).
struct EnsembleCase {
  Family family = Family::Single;
  Field field = Field::Real;
  int n = 0;
  int n1 = 0;
  int n2 = 0;
  int p = 0;

  static EnsembleCase single(Field f, int n, int p) {
    EnsembleCase c;
    c.family = Family::Single;
    c.field = f;
    c.n = n;
    c.p = p;
    c.validate();
    return c;
  }

  static EnsembleCase double_wishart(Field f, int n1, int n2, int p) {
    EnsembleCase c;
    c.family = Family::Double;
    c.field = f;
    c.n1 = n1;
    c.n2 = n2;
    c.p = p;
    c.validate();
    return c;
  }

  void validate() const {
    if (family == Family::Single) {
      if (n < 1 || p < 1)
        throw domain_error("EnsembleCase: single Wishart needs n >= 1, p >= 1");
    } else {
      if (p < 1 || n1 < p || n2 < p)
        throw domain_error(
            "EnsembleCase: double Wishart needs n1 >= p and n2 >= p");
    }
  }

  int beta() const { return field == Field::Real ? 1 : 2; }
};

// Centering and scaling of the largest-root statistic. The complex cases
// average two endpoint evaluations; the endpoints are kept for inspection.
struct CenterScale {
  double mu = 0.0;
  double sigma = 0.0;
  bool averaged = false;
  double mu_endpoint_a = 0.0;
  double mu_endpoint_b = 0.0;
  double sigma_endpoint_a = 0.0;
  double sigma_endpoint_b = 0.0;
};

namespace detail {

// mu = (sqrt(n) + sqrt(p))^2, sigma = (sqrt(n)+sqrt(p))(1/sqrt(n)+1/sqrt(p))^{1/3}.
inline void single_mu_sigma(double n, double p, double& mu, double& sigma) {
  if (!(n > 0.0) || !(p > 0.0))
    throw domain_error("center_scale: effective dimensions must be positive");
  const double s = std::sqrt(n) + std::sqrt(p);
  mu = s * s;
  sigma = s * std::cbrt(1.0 / std::sqrt(n) + 1.0 / std::sqrt(p));
}

// Double Wishart recipe for given kappa, dimension p, and half-integer
// shift (+1/2 complex, -1/2 real; the real shift makes kappa * mu reduce
// exactly to the single-Wishart real centering as n2 -> infinity).
inline void double_mu_sigma(double n1, double p, double kappa, double shift,
                            double& mu, double& sigma) {
  const double sp2 = (n1 + shift) / kappa; // sin^2(phi/2)
  const double sg2 = (p + shift) / kappa;  // sin^2(gamma/2)
  if (!(sp2 > 0.0 && sp2 < 1.0) || !(sg2 > 0.0 && sg2 < 1.0))
    throw domain_error("center_scale: sine argument outside (0,1)");
  const double phi = 2.0 * std::asin(std::sqrt(sp2));
  const double gam = 2.0 * std::asin(std::sqrt(sg2));
  const double sh = std::sin(0.5 * (phi + gam));
  mu = sh * sh;
  const double s = std::sin(phi + gam);
  const double sigma3 =
      s * s * s * s / (4.0 * kappa * kappa * std::sin(phi) * std::sin(gam));
  sigma = std::cbrt(sigma3);
}

} // namespace detail

// Second-order-accurate centering/scaling in the four ensemble cases.
// Single statistic: n * l1_hat; double statistic: the raw root in (0,1).
inline CenterScale center_scale(const EnsembleCase& c) {
  c.validate();
  CenterScale cs;
  if (c.family == Family::Single) {
    if (c.field == Field::Real) {
      detail::single_mu_sigma(c.n - 0.5, c.p - 0.5, cs.mu, cs.sigma);
    } else {
      // Equal-weight average of the (n-1, p) and (n, p-1) evaluations,
      // each with the half-integer shifts n+1/2, p+1/2.
      detail::single_mu_sigma(c.n - 0.5, c.p + 0.5, cs.mu_endpoint_a,
                              cs.sigma_endpoint_a);
      detail::single_mu_sigma(c.n + 0.5, c.p - 0.5, cs.mu_endpoint_b,
                              cs.sigma_endpoint_b);
      cs.averaged = true;
      cs.mu = 0.5 * (cs.mu_endpoint_a + cs.mu_endpoint_b);
      cs.sigma = 0.5 * (cs.sigma_endpoint_a + cs.sigma_endpoint_b);
    }
  } else {
    if (c.field == Field::Real) {
      const double kappa = (double)c.n1 + (double)c.n2 - 1.0;
      detail::double_mu_sigma(c.n1, c.p, kappa, -0.5, cs.mu, cs.sigma);
    } else {
      const double kappa = (double)c.n1 + (double)c.n2 + 1.0;
      detail::double_mu_sigma(c.n1, c.p, kappa, 0.5, cs.mu_endpoint_a,
                              cs.sigma_endpoint_a);
      detail::double_mu_sigma(c.n1, c.p - 1.0, kappa, 0.5, cs.mu_endpoint_b,
                              cs.sigma_endpoint_b);
      cs.averaged = true;
      cs.mu = 0.5 * (cs.mu_endpoint_a + cs.mu_endpoint_b);
      cs.sigma = 0.5 * (cs.sigma_endpoint_a + cs.sigma_endpoint_b);
    }
  }
  if (!(cs.sigma > 0.0)) throw domain_error("center_scale: sigma <= 0");
  return cs;
}

// Exact null joint eigenvalue densities (real field).
struct JointDensityParams {
  Family family = Family::Single;
  int n = 0;  // single
  int n1 = 0; // double
  int n2 = 0;
  int p = 0;

  void validate() const {
    if (p < 1) throw domain_error("JointDensityParams: p >= 1 required");
    if (family == Family::Single) {
      if (n < p) throw domain_error("JointDensityParams: single needs n >= p");
    } else {
      if (n1 < p || n2 < p)
        throw domain_error("JointDensityParams: double needs n1, n2 >= p");
    }
  }
};

namespace detail {

// log of the multivariate gamma function Gamma_p(a).
inline double lgamma_p(int p, double a) {
  double s = 0.25 * p * (p - 1) * std::log(M_PI);
  for (int i = 0; i < p; ++i) s += std::lgamma(a - 0.5 * i);
  return s;
}

} // namespace detail

// Log joint density of the ordered eigenvalues under the null.
// Single Wishart: eigenvalues of A = X X^T, A ~ W_p(n, I).
// Double Wishart: roots of det[x(A+B) - A] = 0 on (0,1).
inline double joint_density_log(const JointDensityParams& params,
                                const std::vector<double>& x) {
  params.validate();
  const int p = params.p;
  if ((int)x.size() != p)
    throw domain_error("joint_density_log: x size must equal p");
  for (int i = 0; i < p; ++i) {
    const bool in_support = params.family == Family::Single
                                ? x[i] > 0.0
                                : (x[i] > 0.0 && x[i] < 1.0);
    if (!std::isfinite(x[i]) || !in_support)
      throw domain_error("joint_density_log: x outside the support");
    if (i > 0 && x[i] > x[i - 1])
      throw domain_error("joint_density_log: x must be sorted descending");
  }
  double log_vdm = 0.0;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const double d = x[i] - x[j];
      if (d == 0.0) return -std::numeric_limits<double>::infinity();
      log_vdm += std::log(d);
    }
  }
  double lf;
  if (params.family == Family::Single) {
    const double n = params.n;
    const double log_c = 0.5 * p * p * std::log(M_PI) -
                         0.5 * p * n * std::log(2.0) -
                         detail::lgamma_p(p, 0.5 * n) -
                         detail::lgamma_p(p, 0.5 * p);
    double log_w = 0.0;
    for (int i = 0; i < p; ++i)
      log_w += 0.5 * (n - p - 1) * std::log(x[i]) - 0.5 * x[i];
    lf = log_c + log_w + log_vdm;
  } else {
    const double n1 = params.n1, n2 = params.n2;
    const double log_c = 0.5 * p * p * std::log(M_PI) +
                         detail::lgamma_p(p, 0.5 * (n1 + n2)) -
                         detail::lgamma_p(p, 0.5 * n1) -
                         detail::lgamma_p(p, 0.5 * n2) -
                         detail::lgamma_p(p, 0.5 * p);
    double log_w = 0.0;
    for (int i = 0; i < p; ++i)
      log_w += 0.5 * (n1 - p - 1) * std::log(x[i]) +
               0.5 * (n2 - p - 1) * std::log1p(-x[i]);
    lf = log_c + log_w + log_vdm;
  }
  return lf;
}

enum class WeightFamily { hermite, laguerre, jacobi };

// Classical orthogonal-polynomial weights in standard form; 0 off-support.
inline double weight_function(WeightFamily family, double x, double a = 0.0,
                              double b = 0.0) {
  switch (family) {
    case WeightFamily::hermite:
      return std::exp(-0.5 * x * x);
    case WeightFamily::laguerre:
      if (x < 0.0) return 0.0;
      return std::pow(x, a) * std::exp(-x);
    case WeightFamily::jacobi:
      if (x <= -1.0 || x >= 1.0) return 0.0;
      return std::pow(1.0 - x, a) * std::pow(1.0 + x, b);
  }
  throw domain_error("weight_function: unknown family");
}

} // namespace rmt

#pragma once

#include <cmath>
#include <vector>

#include "rmt/errors.hpp"
#include "rmt/laws.hpp"
#include "rmt/linalg.hpp"
#include "rmt/tracy_widom.hpp"

namespace rmt {

struct TestResult {
  EnsembleCase ensemble;
  double raw_statistic = 0.0;
  double standardized = 0.0;
  double p_value = 0.0;
  CenterScale cs;
};

// Largest-root test. Single Wishart: l1_hat is the top eigenvalue of
// S = n^{-1} X X^T and the tested statistic is n * l1_hat. Double Wishart:
// l1_hat is the largest root of det[x(A+B) - A] = 0, used raw.
inline TestResult largest_root_test(const EnsembleCase& c, double l1_hat) {
  c.validate();
  if (!std::isfinite(l1_hat))
    throw domain_error("largest_root_test: non-finite statistic");
  TestResult r;
  r.ensemble = c;
  if (c.family == Family::Single) {
    if (!(l1_hat > 0.0))
      throw domain_error("largest_root_test: eigenvalue must be positive");
    r.raw_statistic = (double)c.n * l1_hat;
  } else {
    if (!(l1_hat > 0.0 && l1_hat < 1.0))
      throw domain_error("largest_root_test: double Wishart root must be in (0,1)");
    r.raw_statistic = l1_hat;
  }
  r.cs = center_scale(c);
  r.standardized = (r.raw_statistic - r.cs.mu) / r.cs.sigma;
  r.p_value = 1.0 - tw_cdf(tw_table(c.beta()), r.standardized);
  return r;
}

// Spiked covariance Sigma = diag(l_1, ..., l_M, s2, ..., s2) with base
// variance s2 and aspect ratio gamma = p/n.
struct SpikedModel {
  double gamma = 0.0;
  double base_var = 1.0;
  std::vector<double> spikes; // descending, each > base_var

  void validate() const {
    if (!(gamma > 0.0)) throw domain_error("SpikedModel: gamma must be > 0");
    if (!(base_var > 0.0))
      throw domain_error("SpikedModel: base variance must be > 0");
    for (std::size_t i = 0; i < spikes.size(); ++i) {
      if (!(spikes[i] > base_var))
        throw domain_error("SpikedModel: spikes must exceed the base variance");
      if (i > 0 && spikes[i] > spikes[i - 1])
        throw domain_error("SpikedModel: spikes must be descending");
    }
  }

  // lambda_nu = l_nu / s2 - 1, the spike strength above base.
  double lambda(std::size_t which) const {
    if (which >= spikes.size()) throw domain_error("SpikedModel: index out of range");
    return spikes[which] / base_var - 1.0;
  }
};

enum class Regime { subcritical, critical, supercritical };
enum class FluctuationLaw { TW, Gaussian };

struct SpikePrediction {
  Regime regime = Regime::subcritical;
  double threshold = 0.0; // covariance units
  double mean = 0.0;      // predicted top sample eigenvalue
  double sd = 0.0;
  FluctuationLaw fluctuation_law = FluctuationLaw::TW;
};

// BBP dichotomy for the top sample eigenvalue at sample size n. Predictions
// are made in unit-base-variance units, then rescaled by base_var.
inline SpikePrediction spike_predict(const SpikedModel& model,
                                     std::size_t which, int n) {
  model.validate();
  if (which >= model.spikes.size())
    throw domain_error("spike_predict: index out of range");
  if (n < 1) throw domain_error("spike_predict: n >= 1 required");
  const double g = model.gamma;
  const double ell = model.spikes[which] / model.base_var;
  if (!(ell > 1.0))
    throw domain_error("spike_predict: spike must exceed the base variance");
  const double rg = std::sqrt(g);
  const double thr = 1.0 + rg;

  SpikePrediction out;
  out.threshold = model.base_var * thr;
  if (ell > thr) {
    out.regime = Regime::supercritical;
    out.fluctuation_law = FluctuationLaw::Gaussian;
    const double mean_u = ell * (1.0 + g / (ell - 1.0));
    // Real-data fluctuations: twice the variance of the complex-case
    // sigma^2(ell) = ell^2 (1 - gamma/(ell-1)^2).
    const double var_u =
        2.0 * ell * ell * (1.0 - g / ((ell - 1.0) * (ell - 1.0)));
    out.mean = model.base_var * mean_u;
    out.sd = model.base_var * std::sqrt(std::max(var_u, 0.0)) / std::sqrt((double)n);
  } else {
    out.regime = ell == thr ? Regime::critical : Regime::subcritical;
    out.fluctuation_law = FluctuationLaw::TW;
    out.mean = model.base_var * thr * thr;
    // Tracy-Widom scale at the Marchenko-Pastur edge, n^{-2/3} order.
    out.sd = out.regime == Regime::critical
                 ? 0.0
                 : model.base_var * thr * std::cbrt(1.0 + 1.0 / rg) *
                       std::pow((double)n, -2.0 / 3.0);
  }
  return out;
}

// Limiting inner product between the sample and population spike
// eigenvectors: 0 below the detection threshold, else the displayed limit.
inline double overlap_limit(double gamma, double lambda) {
  if (!(gamma > 0.0)) throw domain_error("overlap_limit: gamma must be > 0");
  if (lambda < 0.0) throw domain_error("overlap_limit: lambda must be >= 0");
  if (lambda <= std::sqrt(gamma)) return 0.0;
  return (1.0 - gamma / (lambda * lambda)) / (1.0 + gamma / lambda);
}

inline double overlap_limit(const SpikedModel& model, std::size_t which) {
  model.validate();
  return overlap_limit(model.gamma, model.lambda(which));
}

// Sign-aligned squared distance between unit vectors: 4 sin^2(angle / 2).
inline double loss(const std::vector<double>& theta_hat,
                   const std::vector<double>& theta) {
  if (theta_hat.size() != theta.size() || theta.empty())
    throw domain_error("loss: dimension mismatch");
  double n1 = 0.0, n2 = 0.0, ip = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    n1 += theta_hat[i] * theta_hat[i];
    n2 += theta[i] * theta[i];
    ip += theta_hat[i] * theta[i];
  }
  if (std::abs(n1 - 1.0) > 1e-8 || std::abs(n2 - 1.0) > 1e-8)
    throw domain_error("loss: inputs must be unit vectors");
  const double s = ip < 0.0 ? -1.0 : 1.0;
  double d = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double e = theta_hat[i] - s * theta[i];
    d += e * e;
  }
  return d;
}

// Population eigenvalues of the four-factor model covariance
// Sigma = sigma_f^2 B B^T + sigma_e^2 I with B columns ~ N(beta_f 1, sigma_b^2 I):
// l_1 = p sigma_f^2 (sigma_b^2 + 4 beta_f^2) + sigma_e^2, and
// l_2 = l_3 = l_4 = p sigma_f^2 sigma_b^2 + sigma_e^2.
struct BrownEigs {
  double ell1 = 0.0;
  double ell2 = 0.0; // = ell3 = ell4
  double base = 0.0; // sigma_e^2
};

inline BrownEigs brown_population_eigs(int p, double beta_f, double sigma_b,
                                       double sigma_f, double sigma_e) {
  if (p < 1) throw domain_error("brown_population_eigs: p >= 1 required");
  if (!(sigma_b > 0.0 && sigma_f >= 0.0 && sigma_e > 0.0) || beta_f < 0.0)
    throw domain_error("brown_population_eigs: scale parameters must be positive");
  const double sf2 = sigma_f * sigma_f, sb2 = sigma_b * sigma_b;
  BrownEigs out;
  out.base = sigma_e * sigma_e;
  out.ell2 = (double)p * sf2 * sb2 + out.base;
  out.ell1 = (double)p * sf2 * (sb2 + 4.0 * beta_f * beta_f) + out.base;
  return out;
}

struct Detectability {
  bool detectable = false;
  double threshold = 0.0; // sigma_e^2 (1 + sqrt(p/T))
  double mp_edge = 0.0;   // sigma_e^2 (1 + sqrt(p/T))^2
};

// Phase-transition detectability of a population eigenvalue ell against
// noise level sigma_e at aspect ratio p/T. Ties are undetectable.
inline Detectability detectability(int p, int T, double sigma_e, double ell) {
  if (p < 1 || T < 1) throw domain_error("detectability: p, T >= 1 required");
  if (!(sigma_e > 0.0)) throw domain_error("detectability: sigma_e must be > 0");
  const double root = 1.0 + std::sqrt((double)p / (double)T);
  Detectability out;
  out.threshold = sigma_e * sigma_e * root;
  out.mp_edge = sigma_e * sigma_e * root * root;
  out.detectable = ell > out.threshold;
  return out;
}

// Subtract the sample mean from each row (each variable).
inline void center_rows(Matrix& x) {
  for (int i = 0; i < x.rows; ++i) {
    double m = 0.0;
    for (int j = 0; j < x.cols; ++j) m += x(i, j);
    m /= x.cols;
    for (int j = 0; j < x.cols; ++j) x(i, j) -= m;
  }
}

// Squared sample canonical correlations between two variable blocks
// (p x n and q x n, columns are shared observations). Solves
// A v = r^2 (A + B) v with A = S_xy S_yy^{-1} S_yx, A + B = S_xx.
inline std::vector<double> canonical_correlations(Matrix x_block,
                                                  Matrix y_block) {
  if (x_block.cols != y_block.cols)
    throw domain_error("canonical_correlations: observation counts differ");
  const int n = x_block.cols;
  if (n <= x_block.rows + y_block.rows)
    throw domain_error("canonical_correlations: need n > p + q");
  // The roots are symmetric in the two blocks; solve in the smaller one.
  if (x_block.rows > y_block.rows) std::swap(x_block, y_block);
  const int p = x_block.rows, q = y_block.rows;
  center_rows(x_block);
  center_rows(y_block);

  const SymMatrix sxx = cross_product(x_block);
  const SymMatrix syy = cross_product(y_block);
  Matrix sxy(p, q);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += x_block(i, k) * y_block(j, k);
      sxy(i, j) = s;
    }

  try {
    const LowerTriangular ly = cholesky(syy);
    // Z = S_yy^{-1} S_yx, column by column.
    Matrix z(q, p);
    std::vector<double> col(q);
    for (int j = 0; j < p; ++j) {
      for (int i = 0; i < q; ++i) col[i] = sxy(j, i);
      ly.solve(col);
      ly.solve_transposed(col);
      for (int i = 0; i < q; ++i) z(i, j) = col[i];
    }
    SymMatrix a(p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j <= i; ++j) {
        double s = 0.0;
        for (int k = 0; k < q; ++k) s += sxy(i, k) * z(k, j);
        a.at(i, j) = s;
      }
    return generalized_eig(a, sxx).values;
  } catch (const not_positive_definite_error&) {
    throw numerical_error(
        "canonical_correlations: within-block covariance is rank-deficient");
  }
}

} // namespace rmt

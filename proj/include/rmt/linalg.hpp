#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "rmt/errors.hpp"

namespace rmt {

// Dense rectangular matrix, row-major. Data matrices are p x n
// (variables x observations).
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data((std::size_t)r * c, 0.0) {}

  double& operator()(int i, int j) { return data[(std::size_t)i * cols + j]; }
  double operator()(int i, int j) const {
    return data[(std::size_t)i * cols + j];
  }
};

// Symmetric matrix, single stored (lower) triangle.
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : n_(n), a_((std::size_t)n * (n + 1) / 2, 0.0) {
    if (n < 1) throw domain_error("SymMatrix: order must be >= 1");
  }

  static SymMatrix identity(int n) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  int order() const { return n_; }

  double operator()(int i, int j) const {
    return i >= j ? a_[idx(i, j)] : a_[idx(j, i)];
  }
  double& at(int i, int j) { return i >= j ? a_[idx(i, j)] : a_[idx(j, i)]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  bool all_finite() const {
    for (double v : a_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

private:
  static std::size_t idx(int i, int j) {
    return (std::size_t)i * (i + 1) / 2 + j;
  }
  int n_ = 0;
  std::vector<double> a_;
};

// A XX^T / Gram product: returns n^{-0} * X * X^T (no normalization).
inline SymMatrix cross_product(const Matrix& x) {
  SymMatrix a(x.rows);
  for (int i = 0; i < x.rows; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      const double* ri = &x.data[(std::size_t)i * x.cols];
      const double* rj = &x.data[(std::size_t)j * x.cols];
      for (int k = 0; k < x.cols; ++k) s += ri[k] * rj[k];
      a.at(i, j) = s;
    }
  }
  return a;
}

struct Spectrum {
  std::vector<double> values;  // descending
  Matrix vectors;              // orthonormal columns, empty if not requested
  bool has_vectors = false;
};

namespace detail {

// Cyclic Jacobi on a full working copy. Converged when the off-diagonal
// Frobenius norm drops below 1e-12 * ||A||_F.
inline Spectrum jacobi_eig(const SymMatrix& in, bool want_vectors) {
  const int n = in.order();
  std::vector<double> a((std::size_t)n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[(std::size_t)i * n + j] = in(i, j);

  std::vector<double> v;
  if (want_vectors) {
    v.assign((std::size_t)n * n, 0.0);
    for (int i = 0; i < n; ++i) v[(std::size_t)i * n + i] = 1.0;
  }

  double norm_f = 0.0;
  for (double e : a) norm_f += e * e;
  norm_f = std::sqrt(norm_f);
  const double tol = 1e-12 * (norm_f > 0 ? norm_f : 1.0);

  auto off_norm = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) s += 2.0 * a[(std::size_t)i * n + j] *
                                       a[(std::size_t)i * n + j];
    return std::sqrt(s);
  };

  const int max_sweeps = 60;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_norm() <= tol) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[(std::size_t)p * n + q];
        if (apq == 0.0) continue;
        const double app = a[(std::size_t)p * n + p];
        const double aqq = a[(std::size_t)q * n + q];
        if (std::abs(apq) < 1e-300) {
          a[(std::size_t)p * n + q] = a[(std::size_t)q * n + p] = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0)
                             ? 1.0 / (theta + std::sqrt(theta * theta + 1.0))
                             : 1.0 / (theta - std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[(std::size_t)k * n + p];
          const double akq = a[(std::size_t)k * n + q];
          a[(std::size_t)k * n + p] = c * akp - s * akq;
          a[(std::size_t)k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[(std::size_t)p * n + k];
          const double aqk = a[(std::size_t)q * n + k];
          a[(std::size_t)p * n + k] = c * apk - s * aqk;
          a[(std::size_t)q * n + k] = s * apk + c * aqk;
        }
        if (want_vectors) {
          for (int k = 0; k < n; ++k) {
            const double vkp = v[(std::size_t)k * n + p];
            const double vkq = v[(std::size_t)k * n + q];
            v[(std::size_t)k * n + p] = c * vkp - s * vkq;
            v[(std::size_t)k * n + q] = s * vkp + c * vkq;
          }
        }
      }
    }
  }
  if (sweep == max_sweeps && off_norm() > tol) {
    throw numerical_error("sym_eig: Jacobi sweeps failed to converge");
  }

  Spectrum sp;
  sp.values.resize(n);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return a[(std::size_t)i * n + i] > a[(std::size_t)j * n + j];
  });
  for (int i = 0; i < n; ++i) sp.values[i] = a[(std::size_t)order[i] * n + order[i]];
  if (want_vectors) {
    sp.has_vectors = true;
    sp.vectors = Matrix(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        sp.vectors(i, j) = v[(std::size_t)i * n + order[j]];
  }
  return sp;
}

} // namespace detail

inline Spectrum sym_eig(const SymMatrix& a, bool want_vectors = false) {
  if (!a.all_finite()) throw domain_error("sym_eig: non-finite entries");
  if (a.order() > 4096) throw domain_error("sym_eig: order > 4096");
  return detail::jacobi_eig(a, want_vectors);
}

// Lower-triangular Cholesky factor with forward/backward solves.
class LowerTriangular {
public:
  explicit LowerTriangular(int n)
      : n_(n), l_((std::size_t)n * (n + 1) / 2, 0.0) {}

  int order() const { return n_; }
  double operator()(int i, int j) const { return j > i ? 0.0 : l_[idx(i, j)]; }
  double& at(int i, int j) { return l_[idx(i, j)]; }

  // Solve L y = b in place.
  void solve(std::vector<double>& b) const {
    for (int i = 0; i < n_; ++i) {
      double s = b[i];
      for (int j = 0; j < i; ++j) s -= l_[idx(i, j)] * b[j];
      b[i] = s / l_[idx(i, i)];
    }
  }

  // Solve L^T y = b in place.
  void solve_transposed(std::vector<double>& b) const {
    for (int i = n_ - 1; i >= 0; --i) {
      double s = b[i];
      for (int j = i + 1; j < n_; ++j) s -= l_[idx(j, i)] * b[j];
      b[i] = s / l_[idx(i, i)];
    }
  }

  double log_det() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += std::log(l_[idx(i, i)]);
    return s;
  }

  double min_diag() const {
    double m = l_[0];
    for (int i = 0; i < n_; ++i) m = std::min(m, l_[idx(i, i)]);
    return m;
  }
  double max_diag() const {
    double m = l_[0];
    for (int i = 0; i < n_; ++i) m = std::max(m, l_[idx(i, i)]);
    return m;
  }

private:
  static std::size_t idx(int i, int j) {
    return (std::size_t)i * (i + 1) / 2 + j;
  }
  int n_;
  std::vector<double> l_;
};

inline LowerTriangular cholesky(const SymMatrix& a) {
  if (!a.all_finite()) throw domain_error("cholesky: non-finite entries");
  const int n = a.order();
  LowerTriangular l(n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      throw not_positive_definite_error("cholesky: non-positive pivot");
    }
    const double ljj = std::sqrt(d);
    l.at(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l.at(i, j) = s / ljj;
    }
  }
  return l;
}

// Roots x of det[x m - a] = 0 via congruence reduction m = L L^T,
// C = L^{-1} a L^{-T}, never by forming m^{-1} a.
inline Spectrum generalized_eig(const SymMatrix& a, const SymMatrix& m) {
  if (a.order() != m.order())
    throw domain_error("generalized_eig: dimension mismatch");
  const LowerTriangular l = cholesky(m);
  const double cond_est =
      (l.max_diag() / l.min_diag()) * (l.max_diag() / l.min_diag());
  if (cond_est > 1e12) {
    throw numerical_error("generalized_eig: m is near-singular");
  }
  const int n = a.order();
  // W = L^{-1} A, then C = (L^{-1} W^T)^T  (C symmetric).
  Matrix w(n, n);
  std::vector<double> col(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) col[i] = a(i, j);
    l.solve(col);
    for (int i = 0; i < n; ++i) w(i, j) = col[i];
  }
  SymMatrix c(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) col[i] = w(j, i);
    l.solve(col);
    for (int i = j; i < n; ++i) c.at(i, j) = col[i];
  }
  return sym_eig(c, false);
}

} // namespace rmt

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rmt/errors.hpp"
#include "rmt/linalg.hpp"

namespace {

rmt::SymMatrix random_sym(int n, unsigned seed, double scale = 1.0) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd(0.0, scale);
  rmt::SymMatrix a(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a.at(i, j) = nd(gen);
  return a;
}

rmt::SymMatrix random_psd(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  rmt::Matrix x(n, n + 4);
  for (double& v : x.data) v = nd(gen);
  return rmt::cross_product(x);
}

// Eigenvalues of a symmetric 3x3 by the trigonometric closed form.
std::vector<double> eig3_closed_form(const rmt::SymMatrix& a) {
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  const double q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                    (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  // det(B) with B = (A - qI)/p
  auto b = [&](int i, int j) { return (a(i, j) - (i == j ? q : 0.0)) / p; };
  const double detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                      b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                      b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  const double r = std::clamp(detb / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  const double e2 = 3.0 * q - e1 - e3;
  return {e1, e2, e3};
}

} // namespace

TEST_CASE("sym_eig basics") {
  SUBCASE("identity") {
    const rmt::Spectrum sp = rmt::sym_eig(rmt::SymMatrix::identity(5));
    for (double v : sp.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("diagonal comes back sorted descending") {
    rmt::SymMatrix a(3);
    a.at(0, 0) = 3.0;
    a.at(1, 1) = 1.0;
    a.at(2, 2) = 2.0;
    const rmt::Spectrum sp = rmt::sym_eig(a);
    CHECK(sp.values[0] == doctest::Approx(3.0));
    CHECK(sp.values[1] == doctest::Approx(2.0));
    CHECK(sp.values[2] == doctest::Approx(1.0));
  }
}

TEST_CASE("sym_eig random 3x3 against the trigonometric closed form") {
  for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
    const rmt::SymMatrix a = random_sym(3, seed);
    const std::vector<double> want = eig3_closed_form(a);
    const rmt::Spectrum sp = rmt::sym_eig(a);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(sp.values[i] - want[i]) < 1e-10);
  }
}

TEST_CASE("sym_eig eigenvectors") {
  const rmt::SymMatrix a = random_sym(8, 42);
  const rmt::Spectrum sp = rmt::sym_eig(a, true);
  REQUIRE(sp.has_vectors);
  const int n = 8;

  SUBCASE("orthonormal: V^T V = I") {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += sp.vectors(k, i) * sp.vectors(k, j);
        CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-10);
      }
    }
  }

  SUBCASE("residual A v = lambda v") {
    double amax = a.max_abs();
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        double av = 0.0;
        for (int k = 0; k < n; ++k) av += a(i, k) * sp.vectors(k, j);
        CHECK(std::abs(av - sp.values[j] * sp.vectors(i, j)) < 1e-8 * amax);
      }
    }
  }
}

TEST_CASE("cholesky") {
  SUBCASE("identity and diagonal") {
    const rmt::LowerTriangular li = rmt::cholesky(rmt::SymMatrix::identity(4));
    for (int i = 0; i < 4; ++i) CHECK(li(i, i) == doctest::Approx(1.0));
    rmt::SymMatrix d(2);
    d.at(0, 0) = 4.0;
    d.at(1, 1) = 9.0;
    const rmt::LowerTriangular ld = rmt::cholesky(d);
    CHECK(ld(0, 0) == doctest::Approx(2.0));
    CHECK(ld(1, 1) == doctest::Approx(3.0));
    CHECK(ld(1, 0) == 0.0);
  }
  SUBCASE("reconstruction L L^T = A") {
    rmt::SymMatrix a = random_psd(6, 7);
    for (int i = 0; i < 6; ++i) a.at(i, i) += 1.0;
    const rmt::LowerTriangular l = rmt::cholesky(a);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = 0.0;
        for (int k = 0; k <= j; ++k) s += l(i, k) * l(j, k);
        CHECK(std::abs(s - a(i, j)) < 1e-10 * a.max_abs());
      }
    }
  }
  SUBCASE("non-positive definite throws") {
    rmt::SymMatrix a(2);
    a.at(0, 0) = 1.0;
    a.at(1, 1) = 1.0;
    a.at(1, 0) = 2.0;
    CHECK_THROWS_AS((void)rmt::cholesky(a), rmt::not_positive_definite_error);
  }
}

TEST_CASE("generalized_eig") {
  SUBCASE("a == m gives all ones") {
    const rmt::SymMatrix a = random_psd(5, 11);
    const rmt::Spectrum sp = rmt::generalized_eig(a, a);
    for (double v : sp.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("scalar case") {
    rmt::SymMatrix a(1), m(1);
    a.at(0, 0) = 1.0;
    m.at(0, 0) = 2.0;
    CHECK(rmt::generalized_eig(a, m).values[0] == doctest::Approx(0.5));
  }
  SUBCASE("2x2 against the quadratic formula") {
    // det(x m - a) = 0 expands to a quadratic in x.
    rmt::SymMatrix a = random_psd(2, 21);
    rmt::SymMatrix m = random_psd(2, 22);
    for (int i = 0; i < 2; ++i) m.at(i, i) += 0.5;
    const double dm = m(0, 0) * m(1, 1) - m(0, 1) * m(0, 1);
    const double da = a(0, 0) * a(1, 1) - a(0, 1) * a(0, 1);
    const double cb = -(a(0, 0) * m(1, 1) + a(1, 1) * m(0, 0) -
                        2.0 * a(0, 1) * m(0, 1));
    const double disc = std::sqrt(cb * cb - 4.0 * dm * da);
    const double hi = (-cb + disc) / (2.0 * dm);
    const double lo = (-cb - disc) / (2.0 * dm);
    const rmt::Spectrum sp = rmt::generalized_eig(a, m);
    CHECK(std::abs(sp.values[0] - hi) < 1e-10);
    CHECK(std::abs(sp.values[1] - lo) < 1e-10);
  }
  SUBCASE("roots of (A, A+B) lie in [0,1] for psd A, B") {
    const rmt::SymMatrix a = random_psd(6, 31);
    const rmt::SymMatrix b = random_psd(6, 32);
    rmt::SymMatrix m(6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j <= i; ++j) m.at(i, j) = a(i, j) + b(i, j);
    const rmt::Spectrum sp = rmt::generalized_eig(a, m);
    for (double v : sp.values) {
      CHECK(v > -1e-12);
      CHECK(v < 1.0 + 1e-12);
    }
  }
  SUBCASE("trace identity sum x_i = tr(m^{-1} a)") {
    const rmt::SymMatrix a = random_psd(5, 41);
    rmt::SymMatrix m = random_psd(5, 42);
    for (int i = 0; i < 5; ++i) m.at(i, i) += 1.0;
    const rmt::Spectrum sp = rmt::generalized_eig(a, m);
    double sum = 0.0;
    for (double v : sp.values) sum += v;
    // tr(m^{-1} a) column by column through the Cholesky solves.
    const rmt::LowerTriangular l = rmt::cholesky(m);
    double tr = 0.0;
    for (int j = 0; j < 5; ++j) {
      std::vector<double> col(5);
      for (int i = 0; i < 5; ++i) col[i] = a(i, j);
      l.solve(col);
      l.solve_transposed(col);
      tr += col[j];
    }
    CHECK(std::abs(sum - tr) < 1e-9 * 5 * a.max_abs());
  }
  SUBCASE("invariant under a simultaneous symmetric permutation") {
    const rmt::SymMatrix a = random_psd(4, 51);
    rmt::SymMatrix m = random_psd(4, 52);
    for (int i = 0; i < 4; ++i) m.at(i, i) += 1.0;
    const int perm[4] = {2, 0, 3, 1};
    rmt::SymMatrix ap(4), mp(4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j <= i; ++j) {
        ap.at(i, j) = a(perm[i], perm[j]);
        mp.at(i, j) = m(perm[i], perm[j]);
      }
    }
    const rmt::Spectrum s1 = rmt::generalized_eig(a, m);
    const rmt::Spectrum s2 = rmt::generalized_eig(ap, mp);
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(s1.values[i] - s2.values[i]) < 1e-10);
  }
  SUBCASE("errors") {
    rmt::SymMatrix a(2);
    a.at(0, 0) = std::nan("");
    a.at(1, 1) = 1.0;
    CHECK_THROWS_AS((void)rmt::sym_eig(a), rmt::domain_error);

    const rmt::SymMatrix ok = random_psd(3, 61);
    rmt::SymMatrix indef(3);
    indef.at(0, 0) = -1.0;
    indef.at(1, 1) = 1.0;
    indef.at(2, 2) = 1.0;
    CHECK_THROWS_AS((void)rmt::generalized_eig(ok, indef),
                    rmt::not_positive_definite_error);

    // Nearly singular m: huge condition estimate must be refused.
    rmt::SymMatrix sing(2);
    sing.at(0, 0) = 1.0;
    sing.at(1, 1) = 1e-14;
    rmt::SymMatrix a2(2);
    a2.at(0, 0) = 1.0;
    a2.at(1, 1) = 1.0;
    CHECK_THROWS_AS((void)rmt::generalized_eig(a2, sing), rmt::numerical_error);

    CHECK_THROWS_AS((void)rmt::generalized_eig(a2, random_psd(3, 62)),
                    rmt::domain_error);
  }
}

TEST_CASE("cross_product matches a direct computation") {
  rmt::Matrix x(2, 3);
  x(0, 0) = 1.0;
  x(0, 1) = 2.0;
  x(0, 2) = 3.0;
  x(1, 0) = -1.0;
  x(1, 1) = 0.5;
  x(1, 2) = 2.0;
  const rmt::SymMatrix a = rmt::cross_product(x);
  CHECK(a(0, 0) == doctest::Approx(14.0));
  CHECK(a(1, 0) == doctest::Approx(6.0));
  CHECK(a(1, 1) == doctest::Approx(5.25));
}

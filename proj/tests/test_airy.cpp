#include <doctest.h>

#include <cmath>

#include "rmt/airy.hpp"
#include "rmt/errors.hpp"

namespace {

// Independent oracle: rotate the oscillatory Airy integral onto the ray
// t = u exp(i pi/6), which makes the integrand decay like exp(-u^3/3):
//   Ai(x)  =  (1/pi) int_0^inf exp(-u^3/3 - xu/2) cos(sqrt3 xu/2 + pi/6) du
//   Ai'(x) = -(1/pi) int_0^inf u exp(-u^3/3 - xu/2) cos(sqrt3 xu/2 - pi/6) du
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) < 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Pre-split into half-unit panels: a single top-level Simpson estimate of
// an oscillatory integrand can have an accidentally tiny error estimate,
// which would end the adaptive recursion before it starts.
template <typename F>
double integrate(const F& f, double a, double b, double tol) {
  const int panels = (int)std::ceil((b - a) / 0.5);
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double pa = a + (b - a) * k / panels;
    const double pb = a + (b - a) * (k + 1) / panels;
    const double m = 0.5 * (pa + pb);
    const double fa = f(pa), fm = f(m), fb = f(pb);
    const double whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
    total += adaptive_simpson(f, pa, pb, fa, fm, fb, whole, tol / panels, 40);
  }
  return total;
}

double oracle_ai(double x) {
  auto f = [x](double u) {
    return std::exp(-u * u * u / 3.0 - 0.5 * x * u) *
           std::cos(0.5 * std::sqrt(3.0) * x * u + M_PI / 6.0);
  };
  return integrate(f, 0.0, 14.0, 1e-13) / M_PI;
}

double oracle_ai_prime(double x) {
  auto f = [x](double u) {
    return u * std::exp(-u * u * u / 3.0 - 0.5 * x * u) *
           std::cos(0.5 * std::sqrt(3.0) * x * u - M_PI / 6.0);
  };
  return -integrate(f, 0.0, 14.0, 1e-13) / M_PI;
}

} // namespace

TEST_CASE("airy closed-form values at zero") {
  const rmt::AiryValue v = rmt::airy_ai(0.0);
  CHECK(v.ai == doctest::Approx(0.35502805388781723926).epsilon(1e-14));
  CHECK(v.ai_prime == doctest::Approx(-0.25881940379280679840).epsilon(1e-14));
}

TEST_CASE("airy at one matches the integral oracle") {
  const rmt::AiryValue v = rmt::airy_ai(1.0);
  CHECK(v.ai == doctest::Approx(0.1352924163).epsilon(1e-9));
  CHECK(std::abs(v.ai - oracle_ai(1.0)) < 1e-12);
}

TEST_CASE("airy matches the integral oracle to 1e-10 on [-5, 10]") {
  double worst_ai = 0.0, worst_aip = 0.0;
  for (double x = -5.0; x <= 10.0 + 1e-9; x += 0.25) {
    const rmt::AiryValue v = rmt::airy_ai(x);
    worst_ai = std::max(worst_ai, std::abs(v.ai - oracle_ai(x)));
    worst_aip = std::max(worst_aip, std::abs(v.ai_prime - oracle_ai_prime(x)));
  }
  CHECK(worst_ai < 1e-10);
  CHECK(worst_aip < 1e-10);
}

TEST_CASE("airy positive and decreasing on the right half line") {
  double prev = rmt::airy_ai(1.0).ai;
  CHECK(prev > 0.0);
  for (double x = 1.5; x <= 40.0; x += 0.5) {
    const double cur = rmt::airy_ai(x).ai;
    CHECK(cur > 0.0);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("airy large-argument relative accuracy") {
  // Sanity against the leading asymptotic term. (Beyond x ~ 108 the value
  // underflows double range entirely, so stay below that.)
  for (double x : {50.0, 100.0}) {
    const double zeta = 2.0 / 3.0 * std::pow(x, 1.5);
    const double lead = std::exp(-zeta) / (2.0 * std::sqrt(M_PI) * std::pow(x, 0.25));
    const double v = rmt::airy_ai(x).ai;
    CHECK(std::abs(v / lead - 1.0) < 0.01);
  }
}

TEST_CASE("airy domain errors") {
  CHECK_THROWS_AS((void)rmt::airy_ai(std::nan("")), rmt::domain_error);
  CHECK_THROWS_AS((void)rmt::airy_ai(1.0 / 0.0), rmt::domain_error);
  CHECK_THROWS_AS((void)rmt::airy_ai(201.0), rmt::domain_error);
  CHECK_THROWS_AS((void)rmt::airy_ai(-201.0), rmt::domain_error);
}

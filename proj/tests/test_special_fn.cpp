#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lltomo/special_fn.hpp"

using namespace lltomo;
using std::numbers::pi;

namespace {

cplx generating(const Mat2c& S, const Vec2c& k, cplx a1, cplx a2) {
  const Vec2c a(a1, a2);
  return std::exp(-0.5 * (a.transpose() * S * a)(0, 0) + (a.transpose() * S * k)(0, 0));
}

// n1! n2! [a1^n1 a2^n2] of the generating function, by trapezoid sums over
// circles of radius r (spectrally accurate for entire functions).
cplx cauchy_coefficient(const Mat2c& S, const Vec2c& k, int n1, int n2, double r = 0.8) {
  const int N = 64;
  cplx acc{0.0};
  for (int p = 0; p < N; ++p) {
    for (int q = 0; q < N; ++q) {
      const cplx a1 = std::polar(r, 2 * pi * p / N);
      const cplx a2 = std::polar(r, 2 * pi * q / N);
      acc += generating(S, k, a1, a2) / (std::pow(a1, n1) * std::pow(a2, n2));
    }
  }
  return acc / double(N * N) * std::exp(std::lgamma(n1 + 1.0) + std::lgamma(n2 + 1.0));
}

// Three-term recurrence in n for classical superscripts, in extended precision.
double jacobi_recurrence(int n, long double a, long double b, long double x) {
  long double p0 = 1.0;
  if (n == 0) return p0;
  long double p1 = 0.5 * ((a - b) + (a + b + 2) * x);
  for (int k = 1; k < n; ++k) {
    const long double c = 2 * k + a + b;
    const long double a1 = 2 * (k + 1) * (k + a + b + 1) * c;
    const long double a2 = (c + 1) * (a * a - b * b);
    const long double a3 = c * (c + 1) * (c + 2);
    const long double a4 = 2 * (k + a) * (k + b) * (c + 2);
    const long double p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
    p0 = p1;
    p1 = p2;
  }
  return static_cast<double>(p1);
}

Mat2c random_symmetric(std::mt19937_64& g) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Mat2c S;
  S(0, 0) = {d(g), d(g)};
  S(1, 1) = {d(g), d(g)};
  S(0, 1) = S(1, 0) = cplx{d(g), d(g)};
  return S;
}

}  // namespace

TEST_CASE("log factorial") {
  CHECK(log_factorial(0) == 0.0);
  CHECK(log_factorial(1) == 0.0);
  CHECK(log_factorial(10) == doctest::Approx(std::log(3628800.0)).epsilon(1e-15));
  long double f = 1;
  for (int n = 2; n <= 60; ++n) {
    f *= n;
    CHECK(std::abs(log_factorial(n) - std::log(static_cast<double>(f))) <
          1e-13 * std::log(static_cast<double>(f)));
  }
  CHECK(log_factorial(300) == doctest::Approx(std::lgamma(301.0)).epsilon(1e-13));
}

TEST_CASE("Hermite-MV low orders") {
  std::mt19937_64 g(3);
  const Mat2c S = random_symmetric(g);
  const Vec2c k(cplx{0.3, -0.4}, cplx{1.2, 0.1});
  CHECK(std::abs(hermite_mv(HermiteMVSpec(S, k, 0, 0)) - cplx{1.0}) == 0.0);
  CHECK(std::abs(hermite_mv(HermiteMVSpec(S, k, 1, 0)) - (S * k)(0)) < 1e-15);
  CHECK(std::abs(hermite_mv(HermiteMVSpec(S, k, 0, 1)) - (S * k)(1)) < 1e-15);

  // Identity S reduces to He_2 in the first slot.
  for (double x : {-1.5, 0.0, 0.7, 2.0}) {
    const HermiteMVSpec spec(Mat2c::Identity(), Vec2c(x, 0.0), 2, 0);
    CHECK(std::abs(hermite_mv(spec) - cplx{x * x - 1}) < 1e-14);
    CHECK(std::abs(cauchy_coefficient(Mat2c::Identity(), Vec2c(x, 0.0), 2, 0) -
                   cplx{x * x - 1}) < 1e-11);
  }
}

TEST_CASE("Hermite-MV matches Cauchy-integral Taylor coefficients") {
  std::mt19937_64 g(11);
  for (int trial = 0; trial < 4; ++trial) {
    const Mat2c S = random_symmetric(g);
    const Vec2c k(cplx{0.5, 0.2} * double(trial), cplx{-0.3, 0.9});
    for (auto [n1, n2] : {std::pair{1, 1}, {3, 0}, {2, 3}, {5, 4}}) {
      const cplx h = hermite_mv(HermiteMVSpec(S, k, n1, n2));
      const cplx ref = cauchy_coefficient(S, k, n1, n2);
      CHECK(std::abs(h - ref) < 1e-9 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("Hermite-MV generating-function resummation") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat2c S = random_symmetric(g);
    const Vec2c k(cplx{d(g), d(g)}, cplx{d(g), d(g)});
    cplx a1{d(g), d(g)}, a2{d(g), d(g)};
    const double norm = std::sqrt(std::norm(a1) + std::norm(a2));
    a1 *= 0.5 / norm * std::abs(d(g));
    a2 *= 0.5 / norm * std::abs(d(g));
    cplx sum{0.0};
    for (int n1 = 0; n1 <= 10; ++n1)
      for (int n2 = 0; n2 <= 10; ++n2)
        sum += hermite_mv(HermiteMVSpec(S, k, n1, n2)) * std::pow(a1, n1) * std::pow(a2, n2) /
               std::exp(log_factorial(n1) + log_factorial(n2));
    CHECK(std::abs(sum - generating(S, k, a1, a2)) < 1e-8);
  }
}

TEST_CASE("Hermite-MV factorizes for diagonal S") {
  const double s1 = 1.7, s2 = 0.6;
  const double k1 = 0.9, k2 = -1.3;
  Mat2c S = Mat2c::Zero();
  S(0, 0) = s1;
  S(1, 1) = s2;
  // One-variable: exp(-s a²/2 + s k a) → s^{n/2} He_n(√s k).
  auto one = [](double s, double k, int n) {
    return std::pow(s, 0.5 * n) * hermite_he(n, std::sqrt(s) * k);
  };
  for (int n1 = 0; n1 <= 8; ++n1)
    for (int n2 = 0; n2 <= 8; ++n2) {
      const cplx h = hermite_mv(HermiteMVSpec(S, Vec2c(k1, k2), n1, n2));
      const double ref = one(s1, k1, n1) * one(s2, k2, n2);
      CHECK(std::abs(h - ref) < 1e-10 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("Hermite-MV validation") {
  Mat2c S = Mat2c::Identity();
  CHECK_THROWS_AS(HermiteMVSpec(S, Vec2c::Zero(), 21, 0), CapacityError);
  CHECK_NOTHROW(HermiteMVSpec(S, Vec2c::Zero(), 20, 20));
  CHECK_THROWS_AS(HermiteMVSpec(S, Vec2c::Zero(), -1, 0), DomainError);
  S(0, 1) = 1e-6;
  CHECK_THROWS_AS(HermiteMVSpec(S, Vec2c::Zero(), 1, 1), DomainError);
  S(0, 1) = 1e-14;
  const HermiteMVSpec ok(S, Vec2c::Zero(), 1, 1);
  CHECK(ok.S(0, 1) == ok.S(1, 0));
}

TEST_CASE("Jacobi values") {
  CHECK(jacobi_poly(0, 3, -2, 0.4) == 1.0);
  CHECK(jacobi_poly(1, 0, 0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(jacobi_poly(2, 1, 1, 1.0) == doctest::Approx(3.0).epsilon(1e-15));
  for (int n = 0; n <= 12; ++n)
    for (int s = 0; s <= 4; ++s)
      CHECK(jacobi_poly(n, s, 2, 1.0) == doctest::Approx(binomial(n + s, n)).epsilon(1e-13));
  CHECK(binomial(-3, 2) == doctest::Approx(6.0));
  CHECK(binomial(5, 7) == 0.0);
}

TEST_CASE("Jacobi agrees with the three-term recurrence") {
  for (int n = 0; n <= 20; ++n)
    for (int s = 0; s <= 5; ++s)
      for (int m = 0; m <= 5; ++m)
        for (double x : {-0.9, -0.3, 0.0, 0.28, 0.64, 0.95}) {
          const double ref = jacobi_recurrence(n, s, m, x);
          const double val = jacobi_poly(n, s, m, x);
          CHECK(std::abs(val - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
        }
}

TEST_CASE("Jacobi recurrence holds for negative superscripts") {
  // Recurrence in n stays valid for integer superscripts as long as the
  // coefficients are nonzero.
  for (int n = 1; n < 10; ++n)
    for (int s : {-3, -1, 2})
      for (int m : {-2, 1, 4}) {
        const double a = s, b = m, x = 0.37, k = n;
        const double c = 2 * k + a + b;
        const double a1 = 2 * (k + 1) * (k + a + b + 1) * c;
        if (a1 == 0.0 || c == 0.0 || c + 1 == 0.0 || c + 2 == 0.0) continue;
        const double lhs = a1 * jacobi_poly(n + 1, s, m, x);
        const double rhs = ((c + 1) * (a * a - b * b) + c * (c + 1) * (c + 2) * x) *
                               jacobi_poly(n, s, m, x) -
                           2 * (k + a) * (k + b) * (c + 2) * jacobi_poly(n - 1, s, m, x);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
      }
}

TEST_CASE("Jacobi reflection symmetry") {
  for (int n = 0; n <= 10; ++n)
    for (int s = -2; s <= 3; ++s)
      for (int m = -2; m <= 3; ++m)
        for (double x : {0.1, 0.5, 0.83}) {
          const double a = jacobi_poly(n, s, m, -x);
          const double b = (n % 2 ? -1.0 : 1.0) * jacobi_poly(n, m, s, x);
          CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
        }
}

TEST_CASE("probabilists' Hermite") {
  CHECK(hermite_he(0, 2.0) == 1.0);
  CHECK(hermite_he(3, 2.0) == doctest::Approx(8.0 - 6.0));
  CHECK(hermite_he(4, 1.5) == doctest::Approx(std::pow(1.5, 4) - 6 * 2.25 + 3));
}

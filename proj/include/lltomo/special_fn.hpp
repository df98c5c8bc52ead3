#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "lltomo/error.hpp"

namespace lltomo {

using cplx = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;
using Vec2c = Eigen::Vector2cd;

inline constexpr int kDefaultIndexCap = 20;
inline constexpr int kMaxIndexCap = 40;

// ln(n!), exact-table backed for small n.
double log_factorial(int n);

// Two-variable Hermite polynomial H^{S}_{n1 n2}(k) defined by
//   exp(-a S a^T / 2 + a S k) = sum H^{S}_{n1 n2}(k) a1^n1 a2^n2 / (n1! n2!).
struct HermiteMVSpec {
  HermiteMVSpec(const Mat2c& S, const Vec2c& k, int n1, int n2, int cap = kDefaultIndexCap);

  Mat2c S;
  Vec2c k;
  int n1, n2;
  int cap;
};

cplx hermite_mv(const HermiteMVSpec& spec);

// Same family parametrised by the linear coefficient v = S k directly, so a
// singular S is allowed: exp(-a S a^T / 2 + a v). Works for any scalar-like T
// supporting +, -, and multiplication by cplx (used with polynomial-valued v).
// Returns H_{n1 n2}.
template <class T>
T hermite_mv_linear(const Mat2c& S, const T& v1, const T& v2, int n1, int n2) {
  // Row recurrence in the first index, then column recurrence in the second:
  //   H_{i+1,j} = v1 H_{i,j} - S11 i H_{i-1,j} - S12 j H_{i,j-1}
  //   H_{i,j+1} = v2 H_{i,j} - S21 i H_{i-1,j} - S22 j H_{i,j-1}
  const int w = n2 + 1;
  std::vector<T> h(static_cast<std::size_t>((n1 + 1) * (n2 + 1)));
  auto at = [&](int i, int j) -> T& { return h[static_cast<std::size_t>(i * w + j)]; };
  at(0, 0) = v1 * cplx{0.0} + cplx{1.0};
  for (int j = 0; j < n2; ++j) {
    T next = v2 * at(0, j);
    if (j > 0) next = next - at(0, j - 1) * (S(1, 1) * static_cast<double>(j));
    at(0, j + 1) = next;
  }
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j <= n2; ++j) {
      T next = v1 * at(i, j);
      if (i > 0) next = next - at(i - 1, j) * (S(0, 0) * static_cast<double>(i));
      if (j > 0) next = next - at(i, j - 1) * (S(0, 1) * static_cast<double>(j));
      at(i + 1, j) = next;
    }
  }
  return at(n1, n2);
}

// Jacobi polynomial J_n^{(s,m)}(x), normalised so J_n^{(s,m)}(1) = C(n+s, n).
// Integer superscripts may be negative; binomials with negative upper index
// follow the generalised definition.
double jacobi_poly(int n, int s, int m, double x);

// Generalised binomial C(r, k) for integer r and k >= 0.
double binomial(int r, int k);

// Probabilists' Hermite polynomial He_n(x).
double hermite_he(int n, double x);

}  // namespace lltomo

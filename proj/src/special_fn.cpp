#include "lltomo/special_fn.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace lltomo {

namespace {

constexpr int kFactorialTable = 171;

const std::array<double, kFactorialTable>& log_factorial_table() {
  static const std::array<double, kFactorialTable> table = [] {
    std::array<double, kFactorialTable> t{};
    long double acc = 0.0L;
    t[0] = 0.0;
    for (int n = 1; n < kFactorialTable; ++n) {
      acc += std::log(static_cast<long double>(n));
      t[n] = static_cast<double>(acc);
    }
    return t;
  }();
  return table;
}

// Signed log-magnitude of a generalised binomial.
struct LogSigned {
  double log_abs;  // -inf for zero
  int sign;
};

LogSigned log_binomial(int r, int k) {
  if (k < 0) return {-INFINITY, 0};
  if (r >= 0) {
    if (k > r) return {-INFINITY, 0};
    return {log_factorial(r) - log_factorial(k) - log_factorial(r - k), 1};
  }
  // C(r, k) = (-1)^k C(k - r - 1, k) for r < 0.
  const int top = k - r - 1;
  return {log_factorial(top) - log_factorial(k) - log_factorial(top - k), (k % 2 == 0) ? 1 : -1};
}

#ifdef __SIZEOF_FLOAT128__
using Wide = __float128;
#else
using Wide = long double;
#endif

// Generalised binomial C(r, k), exact for the magnitudes used here.
Wide exact_binomial(int r, int k) {
  if (k < 0) return 0;
  if (r >= 0 && k > r) return 0;
  Wide c = 1;
  for (int i = 0; i < k; ++i) c = c * (r - i) / (i + 1);
  return c;
}

template <class T>
T pairwise_sum(const T* v, std::size_t n) {
  if (n <= 4) {
    T s = 0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

}  // namespace

double log_factorial(int n) {
  if (n < 0) throw DomainError("log_factorial of a negative integer");
  if (n < kFactorialTable) return log_factorial_table()[n];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

HermiteMVSpec::HermiteMVSpec(const Mat2c& S_in, const Vec2c& k_in, int n1_in, int n2_in,
                             int cap_in)
    : S(S_in), k(k_in), n1(n1_in), n2(n2_in), cap(cap_in) {
  if (n1 < 0 || n2 < 0) throw DomainError("Hermite indices must be non-negative");
  if (n1 > cap || n2 > cap) {
    throw CapacityError("Hermite index above cap " + std::to_string(cap));
  }
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  if (std::abs(S(0, 1) - S(1, 0)) > 1e-12 * scale) {
    throw DomainError("Hermite matrix S must be symmetric");
  }
  const cplx off = 0.5 * (S(0, 1) + S(1, 0));
  S(0, 1) = S(1, 0) = off;
}

cplx hermite_mv(const HermiteMVSpec& spec) {
  const Vec2c v = spec.S * spec.k;
  return hermite_mv_linear<cplx>(spec.S, v(0), v(1), spec.n1, spec.n2);
}

double binomial(int r, int k) {
  const LogSigned b = log_binomial(r, k);
  if (b.sign == 0) return 0.0;
  return b.sign * std::round(std::exp(b.log_abs));
}

double jacobi_poly(int n, int s, int m, double x) {
  if (n < 0) throw DomainError("Jacobi degree must be non-negative");
  if (n == 0) return 1.0;
  // Terms alternate in sign inside (-1, 1); exact binomials and extended
  // precision powers keep the cancellation harmless at the degrees we use.
  if (n + std::abs(s) + std::abs(m) <= 60) {
    const Wide lo = (static_cast<Wide>(x) - 1) / 2;
    const Wide hi = (static_cast<Wide>(x) + 1) / 2;
    std::vector<Wide> lo_pow(static_cast<std::size_t>(n) + 1, 1), hi_pow(lo_pow);
    for (int j = 1; j <= n; ++j) {
      lo_pow[j] = lo_pow[j - 1] * lo;
      hi_pow[j] = hi_pow[j - 1] * hi;
    }
    std::vector<Wide> terms;
    for (int j = 0; j <= n; ++j) {
      const Wide c = exact_binomial(n + s, n - j) * exact_binomial(n + m, j);
      if (c != 0) terms.push_back(c * lo_pow[j] * hi_pow[n - j]);
    }
    return static_cast<double>(pairwise_sum(terms.data(), terms.size()));
  }
  const double lo = 0.5 * (x - 1.0), hi = 0.5 * (x + 1.0);
  std::vector<double> terms;
  for (int j = 0; j <= n; ++j) {
    const LogSigned c1 = log_binomial(n + s, n - j);
    const LogSigned c2 = log_binomial(n + m, j);
    if (c1.sign == 0 || c2.sign == 0) continue;
    if ((j > 0 && lo == 0.0) || (n - j > 0 && hi == 0.0)) continue;
    double log_abs = c1.log_abs + c2.log_abs;
    int sign = c1.sign * c2.sign;
    if (j > 0) {
      log_abs += j * std::log(std::abs(lo));
      if (lo < 0.0 && j % 2 == 1) sign = -sign;
    }
    if (n - j > 0) {
      log_abs += (n - j) * std::log(std::abs(hi));
      if (hi < 0.0 && (n - j) % 2 == 1) sign = -sign;
    }
    terms.push_back(sign * std::exp(log_abs));
  }
  return pairwise_sum(terms.data(), terms.size());
}

double hermite_he(int n, double x) {
  if (n < 0) throw DomainError("Hermite degree must be non-negative");
  double h0 = 1.0, h1 = x;
  if (n == 0) return h0;
  for (int k = 1; k < n; ++k) {
    const double h2 = x * h1 - k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

}  // namespace lltomo

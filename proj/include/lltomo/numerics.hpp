#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lltomo/error.hpp"

namespace lltomo {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Quadrature

struct QuadratureBudget {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  std::size_t max_evals = 4'000'000;

  void validate() const;
};

struct Rect {
  double x0, x1, y0, y1;
};

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  std::size_t evals = 0;
};

// Globally adaptive tensor Gauss-Kronrod (7/15) cubature on a rectangle,
// starting from a uniform 4 x 4 partition (8 intervals in 1D).
// Throws BudgetError when max_evals is exhausted before the error estimate
// falls below max(abs_tol, rel_tol * |value|).
QuadResult<cplx> adaptive_quad_2d(const std::function<cplx(double, double)>& f,
                                  const Rect& domain,
                                  const QuadratureBudget& budget);

QuadResult<double> adaptive_quad_2d_real(const std::function<double(double, double)>& f,
                                    const Rect& domain,
                                    const QuadratureBudget& budget);

QuadResult<cplx> adaptive_quad_1d(const std::function<cplx(double)>& f, double a, double b,
                                  const QuadratureBudget& budget);

// Half-width L such that a Gaussian-tailed integrand poly(x) exp(-decay x^2)
// with polynomial degree `degree` has |tail beyond L| below `tail_tol`
// (relative to the integrand's unit scale).
double gaussian_truncation(double decay, int degree, double tail_tol);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

// ---------------------------------------------------------------------------
// Polynomials with complex coefficients in up to four real variables.

struct Monomial {
  std::array<std::uint8_t, 4> exps{};
  cplx coef;
};

using Polynomial = std::vector<Monomial>;

// Dense bivariate polynomial sum_{i+j<=deg} c_ij z1^i z2^j.
class Poly2 {
 public:
  Poly2() = default;
  explicit Poly2(int degree);
  static Poly2 constant(cplx c);
  static Poly2 linear(cplx c0, cplx c1, cplx c2);  // c0 + c1 z1 + c2 z2

  int degree() const { return degree_; }
  cplx coef(int i, int j) const;
  cplx& coef_ref(int i, int j);

  cplx operator()(cplx z1, cplx z2) const;

  Poly2& operator+=(const Poly2& o);
  Poly2& operator-=(const Poly2& o);
  Poly2& operator*=(cplx s);
  friend Poly2 operator+(Poly2 a, const Poly2& b) { return a += b; }
  friend Poly2 operator-(Poly2 a, const Poly2& b) { return a -= b; }
  friend Poly2 operator*(Poly2 a, cplx s) { return a *= s; }
  friend Poly2 operator*(cplx s, Poly2 a) { return a *= s; }
  friend Poly2 operator*(const Poly2& a, const Poly2& b);
  friend Poly2 operator+(Poly2 a, cplx c) {
    a.coef_ref(0, 0) += c;
    return a;
  }

  // Conjugates coefficients: for real arguments this is the complex conjugate
  // of the polynomial's value.
  Poly2 conj_coeffs() const;
  Polynomial terms() const;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * (degree_ + 1) + j;
  }
  int degree_ = 0;
  std::vector<cplx> c_{cplx{0.0}};
};

// Exact ∫_{R^d} poly(z) exp(-z^T Q z + u^T z) dz for complex symmetric Q with
// positive-definite real part, d <= 4. Completes the square and runs the
// Gaussian moment recursion
//   M(m + e_i) = z0_i M(m) + sum_j C_ij m_j M(m - e_j),  C = Q^{-1}/2.
// Throws DomainError if Re Q is not positive definite.
cplx gaussian_poly_moment(std::span<const cplx> Q, std::span<const cplx> u,
                          const Polynomial& poly, std::size_t dim);

// All raw moments M(m) for |m| <= max_degree, indexed m0 + (D+1) m1 + ...
class GaussianMoments {
 public:
  GaussianMoments(std::span<const cplx> Q, std::span<const cplx> u, std::size_t dim,
                  int max_degree);
  cplx operator()(std::span<const int> m) const;
  cplx integrate(const Polynomial& poly) const;

 private:
  std::size_t flat(std::span<const int> m) const;
  std::size_t dim_;
  int max_degree_;
  std::vector<cplx> table_;
  std::vector<bool> filled_;
};

// ---------------------------------------------------------------------------
// Counter-based random streams (Philox-4x32-10), keyed by (seed, stream).

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter = 0);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  std::uint64_t counter() const { return counter_; }

 private:
  void refill();
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
};

// ---------------------------------------------------------------------------
// Stratified importance-sampling Monte Carlo.

struct MCConfig {
  std::uint64_t seed = 1;
  std::size_t n_samples = 100'000;
  std::size_t n_strata = 100;
  // 0 selects the default (LLTOMO_THREADS env var, else hardware concurrency).
  std::size_t threads = 0;

  void validate() const;
};

struct MCResult {
  double value = 0.0;
  double std_err = 0.0;
  std::size_t n_samples = 0;
};

// Draws one point in `stratum` into `out` and returns its density with
// respect to Lebesgue measure restricted to that stratum (integrating to one
// over the stratum's region). Strata must partition the integration domain.
struct Sampler {
  std::size_t dim = 1;
  std::function<double(std::size_t stratum, std::size_t n_strata, CounterRng& rng,
                       std::span<double> out)>
      draw;
};

// Unbiased estimate of ∫ f. Stratum s uses random stream s, and per-stratum
// sums are reduced in a fixed tree order, so results are bit-identical across
// thread counts.
MCResult mc_estimate(const std::function<double(std::span<const double>)>& f,
                     const Sampler& sampler, const MCConfig& config);

// Several integrands sharing one sample stream: f writes out[k] = f_k(x).
using MultiIntegrand = std::function<void(std::span<const double> x, std::span<double> out)>;
std::vector<MCResult> mc_estimate_multi(const MultiIntegrand& f, std::size_t n_out,
                                        const Sampler& sampler, const MCConfig& config);

std::size_t default_thread_count();

// Runs body(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace lltomo

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lltomo/numerics.hpp"
#include "lltomo/states.hpp"

using namespace lltomo;
using std::numbers::pi;

namespace {

constexpr cplx I{0.0, 1.0};

// Context after a 1→4 step: ε has both frequency components.
FieldContext step_context() {
  const auto p = FieldProfile::step(1, 4, 0);
  const auto traj = solve_envelope(p, 1.3, 1e-11);
  return FieldContext::varying(traj.final_state(), traj.omega_ref());
}

std::vector<FieldContext> contexts() {
  return {FieldContext::constant(1.0), FieldContext::constant(2.0, 1.0), step_context()};
}

std::vector<StateLabel> labels() {
  return {StateLabel::fock(0, 0),  StateLabel::fock(1, 0),
          StateLabel::fock(0, 2),  StateLabel::fock(3, 1),
          StateLabel::fock(2, 3),  StateLabel::coherent({0.7, 0.2}, {0.0, -0.3}),
          StateLabel::coherent({-1.2, 0.9}, {1.1, 1.3})};
}

double spread(const StateLabel& l) {
  return l.is_coherent() ? std::abs(l.alpha()) + std::abs(l.beta()) : 1.0 + l.n1() + l.n2();
}

double norm_squared(const StateLabel& l, const FieldContext& ctx) {
  const double L = 9.0 * std::max(std::abs(ctx.eps), 1.0) + 3.0 * spread(l);
  return adaptive_quad_2d_real(
             [&](double x, double y) { return std::norm(wavefunction(l, ctx, x, y)); },
             Rect{-L, L, -L, L}, QuadratureBudget{1e-12, 1e-11, 8'000'000})
      .value;
}

double tomogram_mass(const StateLabel& l, const FieldContext& ctx, double mu1, double nu1,
                     double mu2, double nu2) {
  const auto f = tomogram_frame(ctx, mu1, nu1, mu2, nu2);
  const double L1 = std::abs(f.z[0]) * (8.0 + 2.0 * spread(l));
  const double L2 = std::abs(f.z[1]) * (8.0 + 2.0 * spread(l));
  return adaptive_quad_2d_real(
             [&](double X1, double X2) {
               return tomogram(l, ctx, TomogramPoint{X1, X2, mu1, nu1, mu2, nu2});
             },
             Rect{-L1, L1, -L2, L2}, QuadratureBudget{1e-12, 1e-11, 8'000'000})
      .value;
}

}  // namespace

TEST_CASE("labels and contexts validate") {
  CHECK_THROWS_AS(StateLabel::fock(21, 0), CapacityError);
  CHECK_THROWS_AS(StateLabel::fock(-1, 0), DomainError);
  CHECK_THROWS_AS(StateLabel::coherent(11.0, 0.0), DomainError);
  CHECK_THROWS_AS(FieldContext::constant(-1.0), DomainError);
  EnvelopeState bad;
  bad.eps_dot = {0.0, 2.0};
  CHECK_THROWS_AS(FieldContext::varying(bad, 1.0), DomainError);
  CHECK_THROWS_AS(TomogramPoint({0, 0, 0, 0, 1, 1}).validate(), DomainError);
  CHECK_THROWS_AS(tomogram_fock(StateLabel::coherent(0.0, 0.0), FieldContext::constant(1),
                                TomogramPoint{}),
                  DomainError);
  for (const auto& ctx : contexts()) {
    CHECK(std::abs(ctx.eps * std::conj(ctx.eta) - std::conj(ctx.eps) * ctx.eta + 2.0 * I) <
          1e-8);
  }
}

TEST_CASE("ground state wave function") {
  const auto ctx = FieldContext::constant(1.0);
  for (double x : {-1.0, 0.0, 0.4})
    for (double y : {-2.0, 0.3}) {
      const cplx ref = std::exp(-(x * x + y * y) / 2) / std::sqrt(pi);
      CHECK(std::abs(coherent_wavefunction(StateLabel::coherent(0.0, 0.0), ctx, x, y) - ref) <
            1e-15);
      CHECK(std::abs(fock_wavefunction(StateLabel::fock(0, 0), ctx, x, y) - ref) < 1e-15);
    }
}

TEST_CASE("wave functions are normalized and Fock states orthonormal") {
  for (const auto& ctx : contexts()) {
    for (const auto& l : labels()) CHECK(norm_squared(l, ctx) == doctest::Approx(1.0).epsilon(1e-8));
    const std::vector<StateLabel> fock = {StateLabel::fock(0, 0), StateLabel::fock(1, 0),
                                          StateLabel::fock(0, 1), StateLabel::fock(1, 1),
                                          StateLabel::fock(2, 0)};
    for (std::size_t i = 0; i < fock.size(); ++i)
      for (std::size_t j = i + 1; j < fock.size(); ++j) {
        const double L = 9.0 * std::max(std::abs(ctx.eps), 1.0) + 6.0;
        auto overlap = adaptive_quad_2d(
            [&](double x, double y) {
              return std::conj(fock_wavefunction(fock[i], ctx, x, y)) *
                     fock_wavefunction(fock[j], ctx, x, y);
            },
            Rect{-L, L, -L, L}, QuadratureBudget{1e-12, 1e-11, 8'000'000});
        CHECK(std::abs(overlap.value) < 1e-10);
      }
  }
}

TEST_CASE("evolved context at the start equals the stationary one") {
  const auto traj = solve_envelope(FieldProfile::constant(1.0), 3.0, 1e-11);
  const auto at0 = FieldContext::varying(traj.at(0.0), 1.0);
  const auto fixed = FieldContext::constant(1.0);
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> d(-2.5, 2.5);
  const auto l = StateLabel::coherent({0.5, -0.4}, {-0.2, 0.9});
  cplx phase{0.0};
  for (int i = 0; i < 20; ++i) {
    const double x = d(g), y = d(g);
    const cplx a = coherent_wavefunction(l, at0, x, y), b = coherent_wavefunction(l, fixed, x, y);
    if (i == 0) phase = a / b;
    CHECK(std::abs(std::abs(phase) - 1.0) < 1e-12);
    CHECK(std::abs(a - phase * b) < 1e-12);
  }
}

TEST_CASE("Fock states are Taylor coefficients of coherent states") {
  // 8th-order central differences of e^{|α|²/2} ψ_{α,0} along real α.
  const auto ctx = step_context();
  const double h = 0.05;
  const double w[4] = {4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  for (auto [x, y] : {std::pair{1.0, 0.0}, {-0.3, 0.8}}) {
    auto g = [&](double a) {
      return std::exp(0.5 * a * a) * coherent_wavefunction(StateLabel::coherent(a, 0.0), ctx, x, y);
    };
    cplx d1{0.0};
    for (int k = 1; k <= 4; ++k) d1 += w[k - 1] * (g(k * h) - g(-k * h)) / h;
    CHECK(std::abs(d1 - fock_wavefunction(StateLabel::fock(1, 0), ctx, x, y)) < 1e-7);
  }
}

TEST_CASE("closed-form tomogram examples") {
  const auto ctx = FieldContext::constant(1.0);
  for (double X1 : {-1.0, 0.0, 0.7})
    for (double X2 : {0.2, 1.5}) {
      const TomogramPoint pt{X1, X2, 0.0, 1.0, 0.0, 1.0};
      const double ref = std::exp(-X1 * X1 - X2 * X2) / pi;
      CHECK(tomogram(StateLabel::coherent(0.0, 0.0), ctx, pt) == doctest::Approx(ref).epsilon(1e-14));
      CHECK(tomogram(StateLabel::fock(0, 0), ctx, pt) == doctest::Approx(ref).epsilon(1e-14));
    }
}

TEST_CASE("position frames reproduce the position density") {
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (const auto& ctx : contexts())
    for (const auto& l : labels())
      for (int i = 0; i < 5; ++i) {
        const double x = d(g), y = d(g);
        const double w = tomogram(l, ctx, TomogramPoint{x, y, 1.0, 0.0, 1.0, 0.0});
        const double rho = std::norm(wavefunction(l, ctx, x, y));
        CHECK(std::abs(w - rho) < 1e-12 * std::max(1.0, rho));
      }
}

TEST_CASE("tomograms are normalized, nonnegative and homogeneous") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> d(-2.0, 2.0), lam(0.2, 3.0);
  for (const auto& ctx : contexts())
    for (const auto& l : labels()) {
      for (int k = 0; k < 10; ++k) {
        const double mu1 = d(g), nu1 = d(g), mu2 = d(g), nu2 = d(g);
        CHECK(tomogram_mass(l, ctx, mu1, nu1, mu2, nu2) == doctest::Approx(1.0).epsilon(1e-6));

        const TomogramPoint pt{d(g), d(g), mu1, nu1, mu2, nu2};
        const double w = tomogram(l, ctx, pt);
        CHECK(w >= 0.0);
        const double l1 = lam(g) * (k % 2 ? -1 : 1), l2 = lam(g);
        const TomogramPoint scaled{l1 * pt.X1, l2 * pt.X2, l1 * mu1, l1 * nu1, l2 * mu2, l2 * nu2};
        const double ws = tomogram(l, ctx, scaled);
        CHECK(std::abs(ws * std::abs(l1 * l2) - w) <= 1e-10 * w + 1e-300);
      }
    }
}

TEST_CASE("Fock tomograms are stationary in a constant field") {
  const auto traj = solve_envelope(FieldProfile::constant(1.0), 7.0, 1e-12);
  const auto fixed = FieldContext::constant(1.0);
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (double t : {0.0, 1.3, 6.1}) {
    const auto ctx = FieldContext::varying(traj.at(t), 1.0);
    for (int i = 0; i < 20; ++i) {
      const TomogramPoint pt{d(g), d(g), d(g), d(g), d(g), d(g)};
      for (const auto& l : {StateLabel::fock(0, 0), StateLabel::fock(1, 2), StateLabel::fock(3, 0)}) {
        CHECK(std::abs(tomogram(l, ctx, pt) - tomogram(l, fixed, pt)) < 1e-8);
      }
    }
  }
}

TEST_CASE("phase-averaged coherent tomogram resolves into Fock tomograms") {
  const int M = 32;
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  for (const auto& ctx : contexts()) {
    const TomogramPoint pt{d(g), d(g), d(g), d(g), d(g), d(g)};
    double avg = 0.0;
    for (int p = 0; p < M; ++p)
      for (int q = 0; q < M; ++q) {
        const auto l = StateLabel::coherent(std::polar(1.0, 2 * pi * p / M),
                                            std::polar(1.0, 2 * pi * q / M));
        avg += tomogram(l, ctx, pt) / (M * M);
      }
    double sum = 0.0;
    for (int n1 = 0; n1 <= 12; ++n1)
      for (int n2 = 0; n2 <= 12; ++n2)
        sum += std::norm(fock_coefficient(1.0, 1.0, n1, n2)) *
               tomogram(StateLabel::fock(n1, n2), ctx, pt);
    CHECK(std::abs(sum - avg) < 1e-6);
  }
}

TEST_CASE("continued coherent tomogram") {
  const auto ctx = step_context();
  const auto f = tomogram_frame(ctx, 0.3, -1.1, 1.4, 0.6);
  const cplx a{0.4, -0.7}, b{-1.0, 0.2};
  const double w = tomogram(StateLabel::coherent(a, b), ctx, {0.5, -0.9, 0.3, -1.1, 1.4, 0.6});
  const cplx c = coherent_tomogram_continued(f, 0.5, -0.9, a, b, std::conj(a), std::conj(b));
  CHECK(std::abs(c - w) < 1e-14);
}

TEST_CASE("Taylor expansion of the coherent tomogram gives the Fock tomograms") {
  // Coefficients of a1^n1 a2^n2 b1^n1 b2^n2 in e^{a·b} w(a, b) by trapezoid
  // sums over the torus |a_i| = |b_i| = 1.
  const int N = 32;
  const auto ctx = step_context();
  const TomogramPoint pt{0.4, -0.8, 0.9, -0.5, -0.3, 1.2};
  const auto f = tomogram_frame(ctx, pt.mu1, pt.nu1, pt.mu2, pt.nu2);
  std::vector<cplx> unit(N);
  for (int k = 0; k < N; ++k) unit[k] = std::polar(1.0, 2 * pi * k / N);
  std::vector<cplx> F(N * N * N * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l) {
          const cplx a1 = unit[i], a2 = unit[j], b1 = unit[k], b2 = unit[l];
          F[((i * N + j) * N + k) * N + l] =
              coherent_tomogram_continued(f, pt.X1, pt.X2, a1, a2, b1, b2) *
              std::exp(a1 * b1 + a2 * b2);
        }
  for (int n1 = 0; n1 <= 3; ++n1)
    for (int n2 = 0; n2 <= 3; ++n2) {
      cplx c{0.0};
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          for (int k = 0; k < N; ++k)
            for (int l = 0; l < N; ++l)
              c += F[((i * N + j) * N + k) * N + l] *
                   std::conj(unit[(n1 * (i + k)) % N] * unit[(n2 * (j + l)) % N]);
      c /= double(N * N * N * N);
      const double w = tomogram_fock(StateLabel::fock(n1, n2), ctx, pt);
      const double scale = std::exp(log_factorial(n1) + log_factorial(n2));
      CHECK(std::abs(c.imag()) < 1e-10);
      CHECK(std::abs(c.real() * scale - w) < 1e-9);
    }
}

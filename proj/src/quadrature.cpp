#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include "lltomo/error.hpp"
#include "lltomo/numerics.hpp"

namespace lltomo {

namespace {

// QUADPACK 15-point Kronrod abscissae (nonnegative half) and weights; the
// 7-point Gauss rule uses the odd-indexed abscissae.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Rule15 {
  std::array<double, 15> x{};
  std::array<double, 15> wk{};
  std::array<double, 15> wg{};  // zero at Kronrod-only nodes
};

const Rule15& rule15() {
  static const Rule15 r = [] {
    Rule15 out;
    for (int i = 0; i < 7; ++i) {
      out.x[i] = -kXgk[i];
      out.x[14 - i] = kXgk[i];
      out.wk[i] = out.wk[14 - i] = kWgk[i];
      const double g = (i % 2 == 1) ? kWg[i / 2] : 0.0;
      out.wg[i] = out.wg[14 - i] = g;
    }
    out.x[7] = 0.0;
    out.wk[7] = kWgk[7];
    out.wg[7] = kWg[3];
    return out;
  }();
  return r;
}

struct Cell {
  Rect r;
  cplx value;
  double error;
  bool operator<(const Cell& o) const { return error < o.error; }
};

Cell apply_rule_2d(const std::function<cplx(double, double)>& f, const Rect& r) {
  const auto& q = rule15();
  const double cx = 0.5 * (r.x0 + r.x1), hx = 0.5 * (r.x1 - r.x0);
  const double cy = 0.5 * (r.y0 + r.y1), hy = 0.5 * (r.y1 - r.y0);
  cplx k{0.0}, g{0.0};
  for (int i = 0; i < 15; ++i) {
    const double x = cx + hx * q.x[i];
    cplx rk{0.0}, rg{0.0};
    for (int j = 0; j < 15; ++j) {
      const cplx v = f(x, cy + hy * q.x[j]);
      rk += q.wk[j] * v;
      rg += q.wg[j] * v;
    }
    k += q.wk[i] * rk;
    g += q.wg[i] * rg;
  }
  const double area = hx * hy;
  return {r, k * area, std::abs(k - g) * area};
}

Cell apply_rule_1d(const std::function<cplx(double)>& f, double a, double b) {
  const auto& q = rule15();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  cplx k{0.0}, g{0.0};
  for (int i = 0; i < 15; ++i) {
    const cplx v = f(c + h * q.x[i]);
    k += q.wk[i] * v;
    g += q.wg[i] * v;
  }
  return {{a, b, 0.0, 0.0}, k * h, std::abs(k - g) * h};
}

template <class Apply, class Split>
QuadResult<cplx> run_adaptive(Apply apply, Split split, const Rect& domain,
                              std::size_t evals_per_cell, int initial_splits,
                              const QuadratureBudget& budget) {
  budget.validate();
  // A uniform starting partition keeps off-centre peaks from being missed.
  std::vector<Rect> start{domain};
  for (int s = 0; s < initial_splits; ++s) {
    std::vector<Rect> next;
    for (const Rect& r : start) {
      auto [ra, rb] = split(r);
      next.push_back(ra);
      next.push_back(rb);
    }
    start = std::move(next);
  }
  std::priority_queue<Cell> heap;
  cplx total{0.0};
  double err = 0.0;
  std::size_t evals = 0;
  for (const Rect& r : start) {
    Cell c = apply(r);
    total += c.value;
    err += c.error;
    evals += evals_per_cell;
    heap.push(c);
  }
  while (err > std::max(budget.abs_tol, budget.rel_tol * std::abs(total))) {
    if (evals + 2 * evals_per_cell > budget.max_evals) {
      throw BudgetError("adaptive quadrature exhausted its evaluation budget", err);
    }
    Cell worst = heap.top();
    heap.pop();
    auto [ra, rb] = split(worst.r);
    Cell a = apply(ra), b = apply(rb);
    evals += 2 * evals_per_cell;
    total += a.value + b.value - worst.value;
    err += a.error + b.error - worst.error;
    heap.push(a);
    heap.push(b);
    // Recompute occasionally to shed accumulated cancellation in the running sums.
    if (heap.size() % 256 == 0) {
      auto copy = heap;
      total = 0.0;
      err = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        err += copy.top().error;
        copy.pop();
      }
    }
  }
  return {total, err, evals};
}

}  // namespace

void QuadratureBudget::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw DomainError("quadrature tolerances must be positive");
  }
  if (max_evals < 1000) {
    throw DomainError("quadrature budget needs at least 1000 evaluations");
  }
}

QuadResult<cplx> adaptive_quad_2d(const std::function<cplx(double, double)>& f,
                                  const Rect& domain, const QuadratureBudget& budget) {
  auto apply = [&](const Rect& r) { return apply_rule_2d(f, r); };
  auto split = [](const Rect& r) {
    if (r.x1 - r.x0 >= r.y1 - r.y0) {
      const double m = 0.5 * (r.x0 + r.x1);
      return std::pair{Rect{r.x0, m, r.y0, r.y1}, Rect{m, r.x1, r.y0, r.y1}};
    }
    const double m = 0.5 * (r.y0 + r.y1);
    return std::pair{Rect{r.x0, r.x1, r.y0, m}, Rect{r.x0, r.x1, m, r.y1}};
  };
  return run_adaptive(apply, split, domain, 225, 4, budget);
}

QuadResult<double> adaptive_quad_2d_real(const std::function<double(double, double)>& f,
                                    const Rect& domain, const QuadratureBudget& budget) {
  auto res = adaptive_quad_2d(
      std::function<cplx(double, double)>([&](double x, double y) { return cplx{f(x, y)}; }),
      domain, budget);
  return {res.value.real(), res.error, res.evals};
}

QuadResult<cplx> adaptive_quad_1d(const std::function<cplx(double)>& f, double a, double b,
                                  const QuadratureBudget& budget) {
  auto apply = [&](const Rect& r) { return apply_rule_1d(f, r.x0, r.x1); };
  auto split = [](const Rect& r) {
    const double m = 0.5 * (r.x0 + r.x1);
    return std::pair{Rect{r.x0, m, 0, 0}, Rect{m, r.x1, 0, 0}};
  };
  return run_adaptive(apply, split, Rect{a, b, 0.0, 0.0}, 15, 3, budget);
}

double gaussian_truncation(double decay, int degree, double tail_tol) {
  if (!(decay > 0.0) || !(tail_tol > 0.0)) {
    throw DomainError("gaussian_truncation needs positive decay and tolerance");
  }
  // ∫_L^∞ x^k e^{-a x^2} dx <= L^{k-1} e^{-a L^2} / (2a) once L^2 >= k/a.
  double L = std::sqrt(std::max(1.0, static_cast<double>(degree)) / decay);
  for (int it = 0; it < 200; ++it) {
    const double bound = std::pow(L, std::max(degree - 1, 0)) * std::exp(-decay * L * L) /
                         (2.0 * decay);
    if (bound < tail_tol) return L;
    L *= 1.05;
  }
  return L;
}

void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace lltomo

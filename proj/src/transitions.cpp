#include "lltomo/transitions.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

#include "lltomo/special_fn.hpp"

namespace lltomo {

namespace {

using std::numbers::pi;
constexpr double kClampSlack = 1e-9;

void check_index(FockIndex n, int cap, const char* what) {
  if (n.n1 < 0 || n.n2 < 0) throw DomainError(std::string(what) + ": negative Fock index");
  if (n.n1 > cap || n.n2 > cap) throw CapacityError(std::string(what) + ": index exceeds cap");
}

StateLabel label(FockIndex n, int cap = kDefaultIndexCap) { return StateLabel::fock(n.n1, n.n2, cap); }

// Moments E[X^k], k <= kmax, of the complex-shifted Gaussian obtained from
// e^{-X²/a + irX} / sqrt(πa) after removing its mass e^{-r²a/4}, as
// polynomials in r: m[k * (kmax + 1) + p] is the coefficient of r^p.
void shifted_moments(double a, int kmax, std::vector<cplx>& m) {
  const cplx mean{0.0, 0.5 * a};  // times r
  const double var = 0.5 * a;
  const auto w = static_cast<std::size_t>(kmax + 1);
  m.assign(w * w, cplx{0.0});
  m[0] = 1.0;
  for (std::size_t k = 0; k + 1 < w; ++k) {
    cplx* next = &m[(k + 1) * w];
    for (std::size_t p = 0; p <= k; ++p) next[p + 1] += mean * m[k * w + p];
    if (k > 0) {
      const double c = var * static_cast<double>(k);
      for (std::size_t p = 0; p < k; ++p) next[p] += c * m[(k - 1) * w + p];
    }
  }
}

// Allocation-free bivariate polynomial of degree <= N for the Hermite
// recurrence at small indices.
template <int N>
struct FixedPoly2 {
  static constexpr int W = N + 1;
  std::array<cplx, W * W> c{};
  int degree = 0;

  cplx coef(int i, int j) const { return i + j <= degree ? c[i * W + j] : cplx{0.0}; }
};

template <int N>
FixedPoly2<N> operator*(FixedPoly2<N> a, cplx s) {
  for (auto& v : a.c) v *= s;
  return a;
}

template <int N>
FixedPoly2<N> operator+(FixedPoly2<N> a, cplx s) {
  a.c[0] += s;
  return a;
}

template <int N>
FixedPoly2<N> operator-(FixedPoly2<N> a, const FixedPoly2<N>& b) {
  for (std::size_t k = 0; k < a.c.size(); ++k) a.c[k] -= b.c[k];
  a.degree = std::max(a.degree, b.degree);
  return a;
}

template <int N>
FixedPoly2<N> operator*(const FixedPoly2<N>& a, const FixedPoly2<N>& b) {
  FixedPoly2<N> out;
  out.degree = a.degree + b.degree;
  for (int i = 0; i <= a.degree; ++i)
    for (int j = 0; i + j <= a.degree; ++j) {
      const cplx x = a.c[i * FixedPoly2<N>::W + j];
      if (x == cplx{0.0}) continue;
      for (int k = 0; k <= b.degree; ++k)
        for (int l = 0; k + l <= b.degree; ++l) {
          out.c[(i + k) * FixedPoly2<N>::W + j + l] += x * b.c[k * FixedPoly2<N>::W + l];
        }
    }
  return out;
}

// Coefficients h(i, j) of H^S_n(v(X)) with v = (p1 X1 + q1 X2, p2 X1 + q2 X2).
std::function<cplx(int, int)> hermite_in_x(const Mat2c& S, cplx p1, cplx q1, cplx p2, cplx q2,
                                           FockIndex n) {
  constexpr int kSmall = 6;
  if (n.n1 + n.n2 <= kSmall) {
    FixedPoly2<kSmall> v1, v2;
    v1.degree = v2.degree = 1;
    v1.c[FixedPoly2<kSmall>::W] = p1;
    v1.c[1] = q1;
    v2.c[FixedPoly2<kSmall>::W] = p2;
    v2.c[1] = q2;
    const auto H = hermite_mv_linear<FixedPoly2<kSmall>>(S, v1, v2, n.n1, n.n2);
    return [H](int i, int j) { return H.coef(i, j); };
  }
  const Poly2 H = hermite_mv_linear<Poly2>(S, Poly2::linear(0.0, p1, q1),
                                           Poly2::linear(0.0, p2, q2), n.n1, n.n2);
  return [H](int i, int j) { return H.coef(i, j); };
}

// ∫_0^∞ r^k e^{-A r²/4} dr
double radial_moment(int k, double A) {
  const double h = 0.5 * (k + 1);
  return 0.5 * std::exp(std::lgamma(h) + h * std::log(4.0 / A));
}

std::size_t strata_rows(std::size_t n) {
  auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (k > 1 && n % k != 0) --k;
  return std::max<std::size_t>(k, 1);
}

// |ν η + μ ε|² = uᵀ M u for u = (μ, ν).
Eigen::Matrix2d frame_metric(const FieldContext& c) {
  const double off = (c.eps * std::conj(c.eta)).real();
  Eigen::Matrix2d M;
  M << std::norm(c.eps), off, off, std::norm(c.eta);
  return M;
}

// Angles θ = arg(L (cos φ, sin φ)) with L = M^{-1/2} and φ uniform have
// density √det M / (2π uᵀ M u), which matches the (r-integrated) angular
// profile of Gaussian states.
struct AngleWarp {
  Eigen::Matrix2d M, L;
  double sqrt_det;

  explicit AngleWarp(const Eigen::Matrix2d& m) : M(m) {
    sqrt_det = std::sqrt(M.determinant());
    const Eigen::Matrix2d root =
        (M + sqrt_det * Eigen::Matrix2d::Identity()) / std::sqrt(M.trace() + 2.0 * sqrt_det);
    L = root.inverse();
  }
  // Returns θ and dφ/dθ.
  std::pair<double, double> operator()(double phi) const {
    const Eigen::Vector2d v = L * Eigen::Vector2d(std::cos(phi), std::sin(phi));
    const double theta = std::atan2(v(1), v(0));
    const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
    return {theta, sqrt_det / u.dot(M * u)};
  }
};

std::vector<MCResult> run_tomographic(const FieldContext& ci, const FieldContext& cf,
                                      const std::vector<TransitionPair>& pairs,
                                      const MCConfig& cfg) {
  const std::size_t k1 = strata_rows(cfg.n_strata), k2 = cfg.n_strata / k1;
  const double cell1 = 2.0 * pi / static_cast<double>(k1);
  const double cell2 = 2.0 * pi / static_cast<double>(k2);
  const AngleWarp warp(frame_metric(ci) + frame_metric(cf));
  Sampler sampler;
  sampler.dim = 2;
  // Strata are cells in the uniform angles (φ1, φ2).
  sampler.draw = [=](std::size_t s, std::size_t, CounterRng& rng, std::span<double> x) {
    const auto [t1, j1] = warp(cell1 * (static_cast<double>(s / k2) + rng.uniform()));
    const auto [t2, j2] = warp(cell2 * (static_cast<double>(s % k2) + rng.uniform()));
    x[0] = t1;
    x[1] = t2;
    return j1 * j2 / (cell1 * cell2);
  };
  // Each distinct state's characteristic is computed once per sample.
  std::vector<FockIndex> init, fin;
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  auto slot = [](std::vector<FockIndex>& v, FockIndex n) {
    const auto it = std::find(v.begin(), v.end(), n);
    if (it != v.end()) return static_cast<std::size_t>(it - v.begin());
    v.push_back(n);
    return v.size() - 1;
  };
  for (const auto& p : pairs) slots.emplace_back(slot(init, p.initial), slot(fin, p.final));
  auto f = [&](std::span<const double> x, std::span<double> out) {
    thread_local std::vector<RadialForm> ci_forms, cf_forms;
    ci_forms.clear();
    cf_forms.clear();
    for (FockIndex n : init) ci_forms.push_back(fock_characteristic(ci, n, x[0], x[1]));
    for (FockIndex m : fin) cf_forms.push_back(fock_characteristic(cf, m, x[0], x[1]));
    for (std::size_t k = 0; k < slots.size(); ++k) {
      out[k] = angular_density(ci_forms[slots[k].first], cf_forms[slots[k].second]);
    }
  };
  return mc_estimate_multi(f, pairs.size(), sampler, cfg);
}

}  // namespace

std::string to_string(Route route) {
  switch (route) {
    case Route::overlap: return "overlap";
    case Route::jacobi: return "jacobi";
    case Route::tomographic: return "tomographic";
  }
  return "unknown";
}

Route route_from_string(const std::string& name) {
  if (name == "overlap") return Route::overlap;
  if (name == "jacobi") return Route::jacobi;
  if (name == "tomographic") return Route::tomographic;
  throw ValidationError("unknown route '" + name + "'");
}

void TransitionBudget::validate() const {
  quad.validate();
  mc.validate();
  if (!(envelope_tol > 0.0)) throw DomainError("envelope tolerance must be positive");
  if (!(stderr_abs > 0.0) || !(stderr_rel >= 0.0)) {
    throw DomainError("stderr targets must be positive");
  }
  if (index_cap < 0 || index_cap > kMaxIndexCap) {
    throw DomainError("index cap must lie in [0, 40]");
  }
  if (completeness_cap < index_cap || completeness_cap > kMaxIndexCap) {
    throw DomainError("completeness cap must lie in [index_cap, 40]");
  }
}

void TransitionSpec::validate() const {
  budget.validate();
  check_index(initial, budget.index_cap, "initial state");
  check_index(final, budget.index_cap, "final state");
}

double clamp_probability(double p) {
  if (p >= 0.0 && p <= 1.0) return p;
  if (p < 0.0 && p >= -kClampSlack) return 0.0;
  if (p > 1.0 && p <= 1.0 + kClampSlack) return 1.0;
  throw ValidationError("probability " + std::to_string(p) + " lies outside [0, 1]");
}

TransitionContext::TransitionContext(const FieldProfile& profile, double envelope_tol)
    : profile_(profile) {
  const EnvelopeTrajectory traj = solve_envelope(profile, envelope_tol);
  asym_ = extract_asymptotics(traj, profile);
  evolved_ = FieldContext::varying(traj.final_state(), traj.omega_ref());
  final_ = FieldContext::constant(profile.omega_final(), traj.omega_ref());
}

ProbabilityEstimate probability_overlap(const TransitionSpec& spec) {
  spec.validate();
  return probability_overlap(TransitionContext(spec.profile, spec.budget.envelope_tol),
                             spec.initial, spec.final, spec.budget.quad, spec.budget.index_cap);
}

ProbabilityEstimate probability_overlap(const TransitionContext& ctx, FockIndex initial,
                                        FockIndex final, const QuadratureBudget& budget,
                                        int cap) {
  check_index(initial, cap, "initial state");
  check_index(final, cap, "final state");
  const StateLabel li = label(initial, cap), lf = label(final, cap);
  const FieldContext &ce = ctx.evolved(), &cf = ctx.final_field();
  const double decay = 0.5 * (1.0 / std::norm(ce.eps) + 1.0 / std::norm(cf.eps));
  const int degree = initial.n1 + initial.n2 + final.n1 + final.n2 + 1;
  const double L = gaussian_truncation(decay, degree, 1e-16) + 1.0;
  const auto res = adaptive_quad_2d(
      [&](double r, double phi) {
        const double x = r * std::cos(phi), y = r * std::sin(phi);
        return r * std::conj(fock_wavefunction(lf, cf, x, y)) * fock_wavefunction(li, ce, x, y);
      },
      Rect{0.0, L, 0.0, 2.0 * pi}, budget);
  ProbabilityEstimate e;
  e.route = Route::overlap;
  e.value = clamp_probability(std::norm(res.value));
  e.samples = res.evals;
  return e;
}

ProbabilityEstimate probability_jacobi(FockIndex initial, FockIndex final, double R, int cap) {
  if (!(R >= 0.0) || !(R < 1.0)) throw DomainError("reflection coefficient must lie in [0, 1)");
  check_index(initial, cap, "initial state");
  check_index(final, cap, "final state");
  ProbabilityEstimate e;
  e.route = Route::jacobi;
  if (final.lz() != initial.lz()) return e;
  FockIndex n = initial, m = final;
  if (m.n1 < n.n1) std::swap(n, m);
  const int k = m.n1 - n.n1, l = n.n2 - n.n1;
  const double J = jacobi_poly(n.n1, k, l, 1.0 - 2.0 * R);
  const double log_pref =
      log_factorial(m.n2) + log_factorial(n.n1) - log_factorial(m.n1) - log_factorial(n.n2);
  const double p = std::exp(log_pref) * std::pow(R, k) * std::pow(1.0 - R, l + 1) * J * J;
  e.value = clamp_probability(p);
  return e;
}

cplx RadialForm::operator()(double r1, double r2) const {
  return std::exp(-0.25 * (a1 * r1 * r1 + a2 * r2 * r2)) * poly(r1, r2);
}

RadialForm fock_characteristic(const FieldContext& ctx, FockIndex n, double theta1,
                               double theta2) {
  const TomogramFrame f =
      tomogram_frame(ctx, std::cos(theta1), std::sin(theta1), std::cos(theta2), std::sin(theta2));
  RadialForm out;
  out.a1 = std::norm(f.z[0]);
  out.a2 = std::norm(f.z[1]);
  // H^S_n(v(X)) as a polynomial in (X1, X2), then |H|² = Σ G_e X^e.
  const auto H = hermite_in_x(f.S, f.h[0](0) / f.z[0], f.h[1](0) / f.z[1], f.h[0](1) / f.z[0],
                              f.h[1](1) / f.z[1], n);
  const int d = n.n1 + n.n2, D = 2 * d;
  const auto W = static_cast<std::size_t>(D + 1);
  thread_local std::vector<cplx> G, m1, m2;
  G.assign(W * W, cplx{0.0});
  for (int i = 0; i <= d; ++i)
    for (int j = 0; i + j <= d; ++j) {
      const cplx hij = H(i, j);
      if (hij == cplx{0.0}) continue;
      for (int k = 0; k <= d; ++k)
        for (int l = 0; k + l <= d; ++l) {
          G[static_cast<std::size_t>(i + k) * W + static_cast<std::size_t>(j + l)] +=
              hij * std::conj(H(k, l));
        }
    }
  shifted_moments(out.a1, D, m1);
  shifted_moments(out.a2, D, m2);
  const double norm = std::exp(-log_factorial(n.n1) - log_factorial(n.n2));
  out.poly = Poly2(D);
  for (std::size_t e1 = 0; e1 < W; ++e1)
    for (std::size_t e2 = 0; e1 + e2 < W; ++e2) {
      const cplx g = G[e1 * W + e2] * norm;
      if (g == cplx{0.0}) continue;
      for (std::size_t p = 0; p <= e1; ++p) {
        const cplx gp = g * m1[e1 * W + p];
        if (gp == cplx{0.0}) continue;
        for (std::size_t q = 0; q <= e2; ++q) {
          out.poly.coef_ref(static_cast<int>(p), static_cast<int>(q)) += gp * m2[e2 * W + q];
        }
      }
    }
  return out;
}

double angular_density(const RadialForm& chi_n, const RadialForm& chi_m) {
  const double A1 = chi_n.a1 + chi_m.a1, A2 = chi_n.a2 + chi_m.a2;
  const int dn = chi_n.poly.degree(), dm = chi_m.poly.degree();
  const int D = dn + dm;
  thread_local std::vector<double> I1, I2;
  I1.resize(static_cast<std::size_t>(D + 1));
  I2.resize(static_cast<std::size_t>(D + 1));
  for (int k = 0; k <= D; ++k) {
    I1[static_cast<std::size_t>(k)] = radial_moment(k + 1, A1);
    I2[static_cast<std::size_t>(k)] = radial_moment(k + 1, A2);
  }
  struct Term {
    int i, j;
    cplx c;
  };
  thread_local std::vector<Term> tn, tm;
  auto collect = [](const Poly2& p, std::vector<Term>& out) {
    out.clear();
    for (int i = 0; i <= p.degree(); ++i)
      for (int j = 0; i + j <= p.degree(); ++j) {
        const cplx c = p.coef(i, j);
        if (c != cplx{0.0}) out.push_back({i, j, c});
      }
  };
  collect(chi_n.poly, tn);
  collect(chi_m.poly, tm);
  // Re Σ c_ij conj(d_kl) I1[i+k] I2[j+l]
  double acc = 0.0;
  for (const Term& a : tn) {
    const double* r1 = I1.data() + a.i;
    const double* r2 = I2.data() + a.j;
    double re = 0.0, im = 0.0;
    for (const Term& b : tm) {
      const double w = r1[b.i] * r2[b.j];
      re += b.c.real() * w;
      im += b.c.imag() * w;
    }
    acc += a.c.real() * re + a.c.imag() * im;
  }
  return acc / (4.0 * pi * pi);
}

std::vector<ProbabilityEstimate> probability_tomographic(const FieldContext& initial_ctx,
                                                         const FieldContext& final_ctx,
                                                         const std::vector<TransitionPair>& pairs,
                                                         const TomographicOptions& options) {
  for (const auto& p : pairs) {
    check_index(p.initial, kDefaultIndexCap, "initial state");
    check_index(p.final, kDefaultIndexCap, "final state");
  }
  options.mc.validate();
  std::vector<ProbabilityEstimate> out;
  if (pairs.empty()) return out;
  const auto res = run_tomographic(initial_ctx, final_ctx, pairs, options.mc);
  double worst = 0.0;
  for (const MCResult& r : res) {
    ProbabilityEstimate e;
    e.route = Route::tomographic;
    e.value = r.value;
    e.std_err = r.std_err;
    e.samples = r.n_samples;
    out.push_back(e);
    const double target = std::max(options.stderr_abs, options.stderr_rel * std::abs(r.value));
    if (!(r.std_err <= target)) worst = std::max(worst, r.std_err);
  }
  if (worst > 0.0) throw BudgetError("tomographic estimate missed its stderr target", worst);
  return out;
}

ProbabilityEstimate probability_tomographic(const FieldContext& initial_ctx,
                                            const FieldContext& final_ctx, FockIndex initial,
                                            FockIndex final, const TomographicOptions& options) {
  return probability_tomographic(initial_ctx, final_ctx, {{initial, final}}, options).front();
}

ProbabilityEstimate probability_tomographic(const TransitionSpec& spec) {
  spec.validate();
  const TransitionContext ctx(spec.profile, spec.budget.envelope_tol);
  TomographicOptions opt;
  opt.mc = spec.budget.mc;
  opt.stderr_abs = spec.budget.stderr_abs;
  opt.stderr_rel = spec.budget.stderr_rel;
  return probability_tomographic(ctx.evolved(), ctx.final_field(), spec.initial, spec.final, opt);
}

ReflectionEstimate reflection_from_tomograms(const FieldProfile& profile,
                                             const TransitionBudget& budget) {
  TransitionSpec spec;
  spec.profile = profile;
  spec.budget = budget;
  const ProbabilityEstimate p = probability_tomographic(spec);
  return {1.0 - p.value, p.std_err, p.samples};
}

TailBound completeness_tail(FockIndex initial, double R, double tail_tol, int cap) {
  const int lz = initial.lz();
  const int start = std::max(0, -lz);
  auto P = [&](int m1) { return probability_jacobi(initial, {m1, m1 + lz}, R, cap).value; };
  TailBound tb;
  const int top = cap - std::max(lz, 0);  // keep m2 within the cap
  for (int K = std::max(start, initial.n1); K + 2 <= top; ++K) {
    const double p1 = P(K + 1), p2 = P(K + 2);
    const double ratio = p1 > 0.0 ? p2 / p1 : 0.0;
    const double rho = std::max(R, ratio);
    tb.m1_max = K;
    tb.bound = rho < 1.0 ? p1 / (1.0 - rho) : INFINITY;
    if (tb.bound < tail_tol && ratio <= P(K + 1) / std::max(P(K), 1e-300)) return tb;
  }
  return tb;
}

TransitionTable transition_table(const FieldProfile& profile, int n_max,
                                 const TransitionBudget& budget, const std::vector<Route>& routes,
                                 double tail_tol) {
  budget.validate();
  if (n_max < 0 || n_max > budget.index_cap) throw CapacityError("n_max exceeds the index cap");
  const TransitionContext ctx(profile, budget.envelope_tol);
  TransitionTable table;
  table.profile_hash = profile.hash();
  table.R = ctx.R();
  TomographicOptions topt;
  topt.mc = budget.mc;
  topt.stderr_abs = budget.stderr_abs;
  topt.stderr_rel = budget.stderr_rel;

  auto estimate = [&](Route route, FockIndex n, FockIndex m) {
    const int cap = budget.completeness_cap;
    switch (route) {
      case Route::overlap: return probability_overlap(ctx, n, m, budget.quad, cap);
      case Route::jacobi: return probability_jacobi(n, m, ctx.R(), cap);
      case Route::tomographic: break;
    }
    throw ValidationError("tomographic estimates are batched");
  };

  std::vector<FockIndex> states;
  for (int a = 0; a <= n_max; ++a)
    for (int b = 0; b <= n_max; ++b) states.push_back({a, b});
  std::vector<TransitionPair> pairs;
  for (const FockIndex& n : states)
    for (const FockIndex& m : states) pairs.push_back({n, m});
  std::vector<ProbabilityEstimate> tomo;
  if (std::find(routes.begin(), routes.end(), Route::tomographic) != routes.end()) {
    tomo = probability_tomographic(ctx.evolved(), ctx.final_field(), pairs, topt);
  }
  for (std::size_t k = 0; k < pairs.size(); ++k)
    for (Route route : routes) {
      const auto& [n, m] = pairs[k];
      table.entries.push_back(
          {n, m, route == Route::tomographic ? tomo[k] : estimate(route, n, m)});
    }

  for (const FockIndex& n : states) {
    const TailBound tb = completeness_tail(n, ctx.R(), tail_tol, budget.completeness_cap);
    for (Route route : routes) {
      if (route == Route::tomographic) continue;
      RowCompleteness row{n, route, 0.0, tb.m1_max, tb.bound};
      for (int m1 = std::max(0, -n.lz()); m1 <= tb.m1_max; ++m1) {
        row.sum += estimate(route, n, {m1, m1 + n.lz()}).value;
      }
      table.rows.push_back(row);
    }
  }
  return table;
}

nlohmann::json transition_record(const TransitionEntry& entry, const std::string& profile_hash) {
  return {{"schema", kTransitionSchema},
          {"initial", {entry.initial.n1, entry.initial.n2}},
          {"final", {entry.final.n1, entry.final.n2}},
          {"route", to_string(entry.estimate.route)},
          {"value", entry.estimate.value},
          {"stderr", entry.estimate.std_err},
          {"samples", entry.estimate.samples},
          {"profile_hash", profile_hash}};
}

}  // namespace lltomo

#include "lltomo/states.hpp"

#include <cmath>
#include <numbers>

namespace lltomo {

namespace {

constexpr double kSingularFrame = 1e-300;
constexpr cplx I{0.0, 1.0};

void require_coherent(const StateLabel& label) {
  if (!label.is_coherent()) throw DomainError("expected a coherent-state label");
}

void require_fock(const StateLabel& label) {
  if (label.is_coherent()) throw DomainError("expected a Fock-state label");
}

// Matrix of the αβ term shared by wave functions and tomograms.
Mat2c ab_matrix(const FieldContext& ctx) {
  const cplx c = I * std::conj(ctx.eps) / ctx.eps;
  Mat2c S;
  S << 0.0, c, c, 0.0;
  return S;
}

cplx ground_state(const FieldContext& ctx, double x, double y) {
  const double r2 = x * x + y * y;
  return std::exp(I * ctx.eta * r2 / (2.0 * ctx.eps)) / (std::sqrt(std::numbers::pi) * ctx.eps);
}

// Linear coefficients of (α, β) in the wave-function generating exponent.
Vec2c wave_linear(const FieldContext& ctx, double x, double y) {
  const cplx s{x, y};
  return Vec2c(I * std::conj(s) * std::polar(1.0, -ctx.phi) / ctx.eps,
               s * std::polar(1.0, ctx.phi) / ctx.eps);
}

}  // namespace

StateLabel StateLabel::coherent(cplx alpha, cplx beta) {
  if (!(std::abs(alpha) <= kCoherentRange) || !(std::abs(beta) <= kCoherentRange)) {
    throw DomainError("coherent parameters must satisfy |alpha|, |beta| <= 10");
  }
  StateLabel l;
  l.kind_ = Kind::coherent;
  l.alpha_ = alpha;
  l.beta_ = beta;
  return l;
}

StateLabel StateLabel::fock(int n1, int n2, int cap) {
  if (n1 < 0 || n2 < 0) throw DomainError("Fock indices must be non-negative");
  if (n1 > cap || n2 > cap) throw CapacityError("Fock index exceeds the configured cap");
  StateLabel l;
  l.kind_ = Kind::fock;
  l.n1_ = n1;
  l.n2_ = n2;
  return l;
}

void TomogramPoint::validate() const {
  for (double v : {X1, X2, mu1, nu1, mu2, nu2}) {
    if (!std::isfinite(v)) throw DomainError("tomogram point has a non-finite coordinate");
  }
  if ((mu1 == 0.0 && nu1 == 0.0) || (mu2 == 0.0 && nu2 == 0.0)) {
    throw DomainError("tomogram frame (mu, nu) must not vanish");
  }
}

FieldContext FieldContext::constant(double omega, double omega_ref) {
  if (!(omega > 0.0)) throw DomainError("field context: omega must be positive");
  if (omega_ref <= 0.0) omega_ref = omega;
  const double kappa = omega / omega_ref;
  FieldContext c;
  c.kind = Kind::constant;
  c.omega = omega;
  c.omega_ref = omega_ref;
  c.eps = 1.0 / std::sqrt(kappa);
  c.eta = I * std::sqrt(kappa);
  c.phi = 0.0;
  return c;
}

FieldContext FieldContext::varying(const EnvelopeState& state, double omega_ref) {
  if (!(omega_ref > 0.0)) throw DomainError("field context: omega_ref must be positive");
  if (!(std::abs(state.eps) > 0.0)) throw DomainError("field context: envelope vanishes");
  FieldContext c;
  c.kind = Kind::varying;
  c.omega_ref = omega_ref;
  c.eps = state.eps;
  c.eta = state.eps_dot / (0.5 * omega_ref);
  c.phi = 0.25 * (state.gamma_plus - state.gamma_minus);
  const cplx w = c.eps * std::conj(c.eta) - std::conj(c.eps) * c.eta;
  if (std::abs(w + 2.0 * I) > 1e-6) {
    throw DomainError("field context: envelope state does not match omega_ref");
  }
  c.omega = omega_ref;
  return c;
}

cplx fock_coefficient(cplx alpha, cplx beta, int n1, int n2) {
  const double damp = -0.5 * (std::norm(alpha) + std::norm(beta));
  const double norm = 0.5 * (log_factorial(n1) + log_factorial(n2));
  return std::exp(damp - norm) * std::pow(alpha, n1) * std::pow(beta, n2);
}

cplx coherent_wavefunction(const StateLabel& label, const FieldContext& ctx, double x,
                           double y) {
  require_coherent(label);
  const cplx a = label.alpha(), b = label.beta();
  const Vec2c v = wave_linear(ctx, x, y);
  const cplx expo = -0.5 * (std::norm(a) + std::norm(b)) + a * v(0) + b * v(1) -
                    I * a * b * std::conj(ctx.eps) / ctx.eps;
  return ground_state(ctx, x, y) * std::exp(expo);
}

cplx fock_wavefunction(const StateLabel& label, const FieldContext& ctx, double x, double y) {
  require_fock(label);
  const Vec2c v = wave_linear(ctx, x, y);
  const cplx h = hermite_mv_linear<cplx>(ab_matrix(ctx), v(0), v(1), label.n1(), label.n2());
  const double norm = std::exp(-0.5 * (log_factorial(label.n1()) + log_factorial(label.n2())));
  return ground_state(ctx, x, y) * h * norm;
}

cplx wavefunction(const StateLabel& label, const FieldContext& ctx, double x, double y) {
  return label.is_coherent() ? coherent_wavefunction(label, ctx, x, y)
                             : fock_wavefunction(label, ctx, x, y);
}

TomogramFrame tomogram_frame(const FieldContext& ctx, double mu1, double nu1, double mu2,
                             double nu2) {
  if ((mu1 == 0.0 && nu1 == 0.0) || (mu2 == 0.0 && nu2 == 0.0)) {
    throw DomainError("tomogram frame (mu, nu) must not vanish");
  }
  TomogramFrame f;
  const double mu[2] = {mu1, mu2}, nu[2] = {nu1, nu2};
  const cplx em = std::polar(1.0, -ctx.phi), ep = std::polar(1.0, ctx.phi);
  f.h[0] = Vec2c(I * em, ep);
  f.h[1] = Vec2c(em, I * ep);
  f.c = I * std::conj(ctx.eps) / ctx.eps;
  f.S = ab_matrix(ctx);
  for (int j = 0; j < 2; ++j) {
    f.z[j] = nu[j] * ctx.eta + mu[j] * ctx.eps;
    if (std::abs(f.z[j]) < kSingularFrame) {
      throw SingularFrameError("tomogram frame is singular; use the limiting formula");
    }
    f.q[j] = I * nu[j] / (ctx.eps * f.z[j]);
    f.S -= f.q[j] * (f.h[j] * f.h[j].transpose());
  }
  return f;
}

double TomogramFrame::gaussian(double X1, double X2) const {
  const double a1 = std::abs(z[0]), a2 = std::abs(z[1]);
  return std::exp(-X1 * X1 / (a1 * a1) - X2 * X2 / (a2 * a2)) / (std::numbers::pi * a1 * a2);
}

Vec2c TomogramFrame::linear(double X1, double X2) const {
  return X1 / z[0] * h[0] + X2 / z[1] * h[1];
}

cplx TomogramFrame::exponent(double X1, double X2, cplx alpha, cplx beta) const {
  const double X[2] = {X1, X2};
  cplx e = -c * alpha * beta;
  for (int j = 0; j < 2; ++j) {
    const cplx ha = h[j](0) * alpha + h[j](1) * beta;
    e += 0.5 * q[j] * ha * ha + X[j] * ha / z[j];
  }
  return e;
}

cplx coherent_tomogram_continued(const TomogramFrame& frame, double X1, double X2, cplx a1,
                                 cplx a2, cplx b1, cplx b2) {
  const cplx e = frame.exponent(X1, X2, a1, a2) +
                 std::conj(frame.exponent(X1, X2, std::conj(b1), std::conj(b2)));
  return frame.gaussian(X1, X2) * std::exp(e - a1 * b1 - a2 * b2);
}

double tomogram_coherent(const StateLabel& label, const FieldContext& ctx,
                         const TomogramPoint& pt) {
  require_coherent(label);
  pt.validate();
  const TomogramFrame f = tomogram_frame(ctx, pt.mu1, pt.nu1, pt.mu2, pt.nu2);
  const cplx a = label.alpha(), b = label.beta();
  // Exponents are combined before exponentiating so large |α|, |β| stay finite.
  const cplx e = f.exponent(pt.X1, pt.X2, a, b);
  return f.gaussian(pt.X1, pt.X2) * std::exp(2.0 * e.real() - std::norm(a) - std::norm(b));
}

double tomogram_fock(const StateLabel& label, const FieldContext& ctx, const TomogramPoint& pt) {
  require_fock(label);
  pt.validate();
  const TomogramFrame f = tomogram_frame(ctx, pt.mu1, pt.nu1, pt.mu2, pt.nu2);
  const Vec2c v = f.linear(pt.X1, pt.X2);
  const cplx h = hermite_mv_linear<cplx>(f.S, v(0), v(1), label.n1(), label.n2());
  return f.gaussian(pt.X1, pt.X2) * std::norm(h) *
         std::exp(-log_factorial(label.n1()) - log_factorial(label.n2()));
}

double tomogram(const StateLabel& label, const FieldContext& ctx, const TomogramPoint& pt) {
  return label.is_coherent() ? tomogram_coherent(label, ctx, pt) : tomogram_fock(label, ctx, pt);
}

}  // namespace lltomo

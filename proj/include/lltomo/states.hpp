#pragma once

#include <array>
#include <complex>

#include "lltomo/error.hpp"
#include "lltomo/field_envelope.hpp"
#include "lltomo/special_fn.hpp"

namespace lltomo {

inline constexpr double kCoherentRange = 10.0;

class StateLabel {
 public:
  enum class Kind { coherent, fock };

  static StateLabel coherent(cplx alpha, cplx beta);
  static StateLabel fock(int n1, int n2, int cap = kDefaultIndexCap);

  Kind kind() const { return kind_; }
  bool is_coherent() const { return kind_ == Kind::coherent; }
  cplx alpha() const { return alpha_; }
  cplx beta() const { return beta_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  // Angular momentum n2 - n1 of a Fock label.
  int lz() const { return n2_ - n1_; }

 private:
  StateLabel() = default;
  Kind kind_ = Kind::fock;
  cplx alpha_{0.0}, beta_{0.0};
  int n1_ = 0, n2_ = 0;
};

struct TomogramPoint {
  double X1 = 0.0, X2 = 0.0;
  double mu1 = 0.0, nu1 = 1.0;
  double mu2 = 0.0, nu2 = 1.0;

  // Throws DomainError when a (mu, nu) pair vanishes.
  void validate() const;
};

// Envelope data in units of the reference oscillator length 1/sqrt(Ω_ref),
// Ω_ref = ω_ref / 2. Invariant: ε η* − ε* η = −2i.
struct FieldContext {
  enum class Kind { constant, varying };

  // Stationary field ω; ω_ref <= 0 takes ω_ref = ω.
  static FieldContext constant(double omega, double omega_ref = 0.0);
  // Evolved state: η = ε̇ / Ω_ref, rotation angle (γ₊ − γ₋)/4 = ∫ ω/2.
  static FieldContext varying(const EnvelopeState& state, double omega_ref);

  Kind kind = Kind::constant;
  double omega = 1.0;      // current field, informational for varying contexts
  double omega_ref = 1.0;  // field that fixes the length unit
  cplx eps{1.0, 0.0};
  cplx eta{0.0, 1.0};
  double phi = 0.0;
};

// ψ_{αβ}(x, y): e^{−(|α|²+|β|²)/2} times the generating function of the
// Fock states.
cplx coherent_wavefunction(const StateLabel& label, const FieldContext& ctx, double x, double y);
cplx fock_wavefunction(const StateLabel& label, const FieldContext& ctx, double x, double y);
cplx wavefunction(const StateLabel& label, const FieldContext& ctx, double x, double y);

// Expansion coefficient of |α, β⟩ on the Fock state (n1, n2).
cplx fock_coefficient(cplx alpha, cplx beta, int n1, int n2);

// Per-frame data shared by the closed-form tomograms. The coherent tomogram is
//   w_{αβ}(X) = |G|² exp(2 Re E(α, β) − |α|² − |β|²),
//   E(a) = Σ_j [q_j (h_j·a)² / 2 + X_j (h_j·a) / z_j] − c αβ,
//   |G|² = Π_j exp(−X_j²/|z_j|²) / (π^{1/2} |z_j|),
// and the Fock tomograms are w_n = |G|² |H^S_{n1 n2}(v)|² / (n1! n2!) with
//   S = c σ_x − Σ_j q_j h_j h_jᵀ,  v = Σ_j X_j h_j / z_j.
struct TomogramFrame {
  std::array<cplx, 2> z;   // ν_j η + μ_j ε
  std::array<Vec2c, 2> h;  // X_j coupling directions in (α, β) space
  std::array<cplx, 2> q;   // i ν_j / (ε z_j)
  cplx c;                  // i ε* / ε
  Mat2c S;

  double gaussian(double X1, double X2) const;  // |G|²
  Vec2c linear(double X1, double X2) const;     // v
  cplx exponent(double X1, double X2, cplx alpha, cplx beta) const;  // E
};

TomogramFrame tomogram_frame(const FieldContext& ctx, double mu1, double nu1, double mu2,
                             double nu2);

// Coherent tomogram with (ᾱ, β̄) promoted to independent variables (b1, b2):
//   |G|² exp(E(a) + conj(E(conj b)) − a·b).
// Equals tomogram_coherent on b = conj(a). After multiplying by e^{a·b}, the
// Taylor coefficient of a1^n1 a2^n2 b1^n1 b2^n2 is w_n / (n1! n2!).
cplx coherent_tomogram_continued(const TomogramFrame& frame, double X1, double X2, cplx a1,
                                 cplx a2, cplx b1, cplx b2);

double tomogram_coherent(const StateLabel& label, const FieldContext& ctx,
                         const TomogramPoint& pt);
double tomogram_fock(const StateLabel& label, const FieldContext& ctx, const TomogramPoint& pt);
double tomogram(const StateLabel& label, const FieldContext& ctx, const TomogramPoint& pt);

}  // namespace lltomo

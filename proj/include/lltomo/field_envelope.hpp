#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lltomo/error.hpp"

namespace lltomo {

using cplx = std::complex<double>;

enum class ProfileKind { constant, step, smooth_ramp, tabulated };

// Relative deviation below which a profile counts as constant for asymptotic
// matching.
inline constexpr double kFlatnessTolerance = 1e-9;

// Time-dependent cyclotron frequency ω(t) = H(t), dimensionless units.
class FieldProfile {
 public:
  static FieldProfile constant(double omega0);
  static FieldProfile step(double omega0, double omega1, double t_jump);
  // ω(t) = ω0 + (ω1 - ω0) (1 + tanh((t - t_center) / width)) / 2
  static FieldProfile smooth_ramp(double omega0, double omega1, double t_center, double width);
  // Sorted (t, ω) samples; order 1 is linear, order 3 is monotone cubic
  // (PCHIP), both of which keep ω positive between positive samples.
  static FieldProfile tabulated(std::vector<std::pair<double, double>> samples, int order = 1);

  ProfileKind kind() const { return kind_; }
  double omega(double t) const;

  double omega_initial() const;
  double omega_final() const;
  bool is_constant() const;

  // [t_start, t_end]: outside this window the profile is flat to
  // kFlatnessTolerance. Zero-length for constant profiles.
  std::pair<double, double> matching_window() const;
  // Interior points where ω(t) is discontinuous.
  std::vector<double> breakpoints() const;

  FieldProfile time_reversed() const;

  nlohmann::json to_json() const;
  static FieldProfile from_json(const nlohmann::json& j);
  // 16 hex digits, FNV-1a over the canonical JSON form.
  std::string hash() const;

 private:
  FieldProfile() = default;
  void validate() const;

  ProfileKind kind_ = ProfileKind::constant;
  double omega0_ = 1.0, omega1_ = 1.0;
  double t0_ = 0.0;     // t_jump or t_center
  double width_ = 1.0;  // smooth ramp only
  std::vector<double> ts_, ws_, slopes_;
  int order_ = 1;
};

// Evaluates ω(t); tabulated profiles throw DomainError outside their samples.
double omega_at(const FieldProfile& profile, double t);

std::string to_string(ProfileKind kind);

struct EnvelopeState {
  double t = 0.0;
  cplx eps{1.0, 0.0};
  cplx eps_dot{0.0, 0.5};
  double gamma_plus = 0.0;   // ∫ [|ε|^-2 + ω] dτ from t_start
  double gamma_minus = 0.0;  // ∫ [|ε|^-2 - ω] dτ from t_start

  // W = ε ε̇* − ε* ε̇, equal to −i ω(t_start) along an exact trajectory.
  cplx wronskian() const { return eps * std::conj(eps_dot) - std::conj(eps) * eps_dot; }
};

// Solution of  ε̈ + ω(t)² ε / 4 = 0  with ε(t_start) = 1, ε̇(t_start) = iω(t_start)/2.
// Immutable once built.
class EnvelopeTrajectory {
 public:
  EnvelopeTrajectory(FieldProfile profile, double tol, std::vector<EnvelopeState> nodes,
                     std::vector<EnvelopeState> derivs);

  const FieldProfile& profile() const { return profile_; }
  double t_start() const { return nodes_.front().t; }
  double t_end() const { return nodes_.back().t; }
  double omega_ref() const { return profile_.omega(t_start()); }
  double tol() const { return tol_; }

  const std::vector<EnvelopeState>& nodes() const { return nodes_; }
  const EnvelopeState& final_state() const { return nodes_.back(); }

  // Cubic Hermite dense output between accepted steps.
  EnvelopeState interpolate(double t) const;
  // Accurate state at t: re-integrates from the nearest accepted step.
  EnvelopeState at(double t) const;

 private:
  FieldProfile profile_;
  double tol_;
  std::vector<EnvelopeState> nodes_;
  std::vector<EnvelopeState> derivs_;  // time derivatives at the nodes
};

// Adaptive Dormand-Prince 5(4) integration from the profile's t_start to
// t_end (t_end >= t_start), splitting at discontinuities.
EnvelopeTrajectory solve_envelope(const FieldProfile& profile, double t_end, double tol);

// Integrates to the end of the matching window (or t_start + 1 for constant
// profiles).
EnvelopeTrajectory solve_envelope(const FieldProfile& profile, double tol);

struct AsymptoticData {
  cplx c_plus;
  cplx c_minus;
  double R = 0.0;
  double omega_final = 1.0;
};

// Matches ε(t) = c₊ e^{iΩ t} + c₋ e^{−iΩ t}, Ω = ω_f / 2, at the trajectory's
// final time, which must lie in the flat tail of the profile.
AsymptoticData extract_asymptotics(const EnvelopeTrajectory& trajectory,
                                   const FieldProfile& profile);

// Residual of the Ermakov equation d²|ε|/dt² + ω²|ε|/4 − |W/2|²/|ε|³ at t,
// with the second derivative by central differences of step h.
double ermakov_residual(const EnvelopeTrajectory& trajectory, double t, double h = 1e-3);

}  // namespace lltomo

#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "lltomo/field_envelope.hpp"
#include "lltomo/numerics.hpp"
#include "lltomo/states.hpp"

namespace lltomo {

enum class Route { overlap, jacobi, tomographic };
std::string to_string(Route route);
Route route_from_string(const std::string& name);

struct FockIndex {
  int n1 = 0;
  int n2 = 0;
  int lz() const { return n2 - n1; }
  bool operator==(const FockIndex&) const = default;
};

struct TransitionBudget {
  QuadratureBudget quad{1e-10, 1e-10, 8'000'000};
  double envelope_tol = 1e-10;
  MCConfig mc{1, 1'000'000, 100, 0};
  // Target: stderr <= max(stderr_abs, stderr_rel * value).
  double stderr_abs = 1e-3;
  double stderr_rel = 0.01;
  int index_cap = kDefaultIndexCap;
  // Final states summed in completeness rows may exceed index_cap.
  int completeness_cap = kMaxIndexCap;

  void validate() const;
};

struct TransitionSpec {
  FockIndex initial;
  FockIndex final;
  FieldProfile profile = FieldProfile::constant(1.0);
  TransitionBudget budget;

  void validate() const;
};

struct ProbabilityEstimate {
  double value = 0.0;
  double std_err = 0.0;  // 0 for deterministic routes
  Route route = Route::overlap;
  std::size_t samples = 0;
};

// Deterministic probabilities within 1e-9 outside [0, 1] are clamped; larger
// violations throw ValidationError.
double clamp_probability(double p);

// Envelope solution and both field contexts for one profile. Initial Fock
// states are evolved to the end of the matching window; final states are the
// stationary states of the asymptotic field. Lengths use the initial field.
class TransitionContext {
 public:
  TransitionContext(const FieldProfile& profile, double envelope_tol);

  const FieldProfile& profile() const { return profile_; }
  const AsymptoticData& asymptotics() const { return asym_; }
  double R() const { return asym_.R; }
  const FieldContext& evolved() const { return evolved_; }
  const FieldContext& final_field() const { return final_; }

 private:
  FieldProfile profile_;
  AsymptoticData asym_;
  FieldContext evolved_, final_;
};

// |∫ ψ*_final ψ_evolved dx dy|² by adaptive cubature in polar coordinates.
ProbabilityEstimate probability_overlap(const TransitionSpec& spec);
ProbabilityEstimate probability_overlap(const TransitionContext& ctx, FockIndex initial,
                                        FockIndex final, const QuadratureBudget& budget,
                                        int cap = kDefaultIndexCap);

// Closed form in R and a Jacobi polynomial. Zero unless m2 - m1 = n2 - n1;
// m1 < n1 uses the symmetry P(n → m) = P(m → n).
ProbabilityEstimate probability_jacobi(FockIndex initial, FockIndex final, double R,
                                       int cap = kDefaultIndexCap);

// Tr(ρ_n ρ_m) from the closed-form tomograms. With (μ_j, ν_j) = r_j(cos θ_j,
// sin θ_j), the X integrals are Gaussian moments and the r integrals are
// closed-form, leaving an integral over (θ1, θ2) done by stratified Monte
// Carlo. Throws BudgetError when the stderr target is missed.
struct TomographicOptions {
  MCConfig mc{1, 1'000'000, 100, 0};
  double stderr_abs = 1e-3;
  double stderr_rel = 0.01;
};

ProbabilityEstimate probability_tomographic(const TransitionSpec& spec);
ProbabilityEstimate probability_tomographic(const FieldContext& initial_ctx,
                                            const FieldContext& final_ctx, FockIndex initial,
                                            FockIndex final, const TomographicOptions& options);

// Several transitions on one shared angular sample stream; each result equals
// the single-transition estimate with the same options.
struct TransitionPair {
  FockIndex initial, final;
};
std::vector<ProbabilityEstimate> probability_tomographic(const FieldContext& initial_ctx,
                                                         const FieldContext& final_ctx,
                                                         const std::vector<TransitionPair>& pairs,
                                                         const TomographicOptions& options);

// Characteristic function ∫ w(X; r1 θ̂1, r2 θ̂2) e^{i(X1+X2)} dX of a Fock
// tomogram, in the form e^{−(a1 r1² + a2 r2²)/4} poly(r1, r2).
struct RadialForm {
  Poly2 poly;
  double a1 = 1.0, a2 = 1.0;

  cplx operator()(double r1, double r2) const;
};
RadialForm fock_characteristic(const FieldContext& ctx, FockIndex n, double theta1,
                               double theta2);

// (1/4π²) ∫∫ r1 r2 χ_n conj(χ_m) dr1 dr2 at fixed angles.
double angular_density(const RadialForm& chi_n, const RadialForm& chi_m);

struct ReflectionEstimate {
  double value = 0.0;
  double std_err = 0.0;
  std::size_t samples = 0;
};

// R = 1 − P(00 → 00) via the tomographic route.
ReflectionEstimate reflection_from_tomograms(const FieldProfile& profile,
                                             const TransitionBudget& budget);

struct TransitionEntry {
  FockIndex initial, final;
  ProbabilityEstimate estimate;
};

struct RowCompleteness {
  FockIndex initial;
  Route route;
  double sum = 0.0;         // Σ over finals with m1 <= m1_max
  int m1_max = 0;
  double tail_bound = 0.0;  // bound on the omitted finals
};

struct TransitionTable {
  std::string profile_hash;
  double R = 0.0;
  std::vector<TransitionEntry> entries;  // all (n, m) with indices <= n_max
  std::vector<RowCompleteness> rows;
};

// Tail of Σ_m P(n → m) beyond final index m1 > m1_max along the conserved-L_z
// ladder. Uses the Jacobi probabilities: P_{K+1} / (1 − ρ) with ρ the larger
// of R and the last observed ratio, valid once the ratios decrease.
struct TailBound {
  int m1_max = 0;
  double bound = 0.0;
};
TailBound completeness_tail(FockIndex initial, double R, double tail_tol, int cap);

TransitionTable transition_table(const FieldProfile& profile, int n_max,
                                 const TransitionBudget& budget, const std::vector<Route>& routes,
                                 double tail_tol = 1e-4);

// One JSON-lines record per estimate.
inline constexpr const char* kTransitionSchema = "lltomo.transition/1";
nlohmann::json transition_record(const TransitionEntry& entry, const std::string& profile_hash);

}  // namespace lltomo

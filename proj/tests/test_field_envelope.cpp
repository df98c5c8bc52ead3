#include <cmath>

#include "doctest.h"
#include "lltomo/field_envelope.hpp"

using namespace lltomo;

TEST_CASE("omega_at") {
  CHECK(omega_at(FieldProfile::constant(1.0), 3.7) == 1.0);
  const auto step = FieldProfile::step(1, 4, 0);
  CHECK(omega_at(step, -1) == 1.0);
  CHECK(omega_at(step, 1) == 4.0);
  CHECK(omega_at(FieldProfile::smooth_ramp(1, 4, 0, 1), 0) == doctest::Approx(2.5));

  const auto tab = FieldProfile::tabulated({{0, 1}, {1, 2}, {2, 4}}, 1);
  CHECK(omega_at(tab, 0.5) == doctest::Approx(1.5));
  CHECK_THROWS_AS(omega_at(tab, 2.5), DomainError);
  CHECK_THROWS_AS(omega_at(tab, -0.1), DomainError);

  // Monotone cubic stays within the sample range on a monotone table.
  const auto cubic = FieldProfile::tabulated({{0, 1}, {1, 1.1}, {2, 4}, {3, 4}}, 3);
  for (double t = 0; t <= 3; t += 0.01) {
    CHECK(omega_at(cubic, t) >= 1.0 - 1e-15);
    CHECK(omega_at(cubic, t) <= 4.0 + 1e-15);
  }
  CHECK(omega_at(cubic, 1.0) == doctest::Approx(1.1));
}

TEST_CASE("profile validation and JSON") {
  CHECK_THROWS_AS(FieldProfile::constant(0.0), DomainError);
  CHECK_THROWS_AS(FieldProfile::step(1, -4, 0), DomainError);
  CHECK_THROWS_AS(FieldProfile::smooth_ramp(1, 2, 0, 0), DomainError);
  CHECK_THROWS_AS(FieldProfile::tabulated({{0, 1}, {0, 2}}), DomainError);
  CHECK_THROWS_AS(FieldProfile::tabulated({{0, 1}, {1, 2}}, 2), DomainError);

  const auto p = FieldProfile::from_json(
      nlohmann::json::parse(R"({"kind": "step", "omega0": 1.0, "omega1": 4.0, "t_jump": 0.0})"));
  CHECK(p.kind() == ProfileKind::step);
  CHECK(p.omega(1) == 4.0);
  const auto q = FieldProfile::from_json(p.to_json());
  CHECK(q.hash() == p.hash());
  CHECK(q.hash().size() == 16);
  CHECK(FieldProfile::step(1, 4.5, 0).hash() != p.hash());

  const auto tab = FieldProfile::from_json(
      nlohmann::json::parse(R"({"kind": "tabulated", "samples": [[0, 1], [1, 3]], "order": 3})"));
  CHECK(tab.omega(1) == 3.0);

  CHECK_THROWS_AS(FieldProfile::from_json(nlohmann::json::parse(R"({"kind": "step"})")),
                  ValidationError);
  CHECK_THROWS_AS(FieldProfile::from_json(nlohmann::json::parse(R"({"kind": "zigzag"})")),
                  ValidationError);
  CHECK_THROWS_AS(
      FieldProfile::from_json(nlohmann::json::parse(R"({"kind": "constant", "omega0": -1})")),
      ValidationError);
}

TEST_CASE("constant field envelope is a pure phase") {
  const auto p = FieldProfile::constant(1.0);
  const auto traj = solve_envelope(p, 20.0, 1e-10);
  for (double t : {0.0, 0.3, 1.7, 5.0, 12.25, 20.0}) {
    const auto s = traj.at(t);
    CHECK(std::abs(s.eps - std::polar(1.0, 0.5 * t)) < 1e-9);
    CHECK(s.gamma_plus == doctest::Approx(2 * t).epsilon(1e-9));
    CHECK(std::abs(s.gamma_minus) < 1e-9);
    CHECK(std::abs(s.wronskian() - cplx{0, -1}) < 1e-9);
  }
  const auto a = extract_asymptotics(traj, p);
  CHECK(a.R == 0.0);
  CHECK(a.c_minus == cplx{0.0});
}

TEST_CASE("step profile matches piecewise solution") {
  const auto p = FieldProfile::step(1, 4, 0);
  const auto traj = solve_envelope(p, 1.0, 1e-10);
  const double t0 = traj.t_start();
  CHECK(t0 < 0.0);
  // ε(0⁻) = e^{-i t0/2}, ε̇(0⁻) = (i/2) ε(0⁻); afterwards Ω = 2.
  const cplx e0 = std::polar(1.0, -0.5 * t0);
  auto exact = [&](double t) {
    if (t <= 0) return std::polar(1.0, 0.5 * (t - t0));
    return e0 * (std::cos(2 * t) + cplx{0, 0.25} * std::sin(2 * t));
  };
  CHECK(std::abs(traj.final_state().eps - exact(1.0)) < 1e-9);
  for (double t : {t0 + 0.5, -0.01, 0.0, 0.01, 0.4, 0.9})
    CHECK(std::abs(traj.at(t).eps - exact(t)) < 1e-9);

  const auto a = extract_asymptotics(traj, p);
  CHECK(a.R == doctest::Approx(0.36).epsilon(1e-9));
  // |c+|² − |c-|² = ω(t_start)/ω_f from the Wronskian.
  CHECK(std::norm(a.c_plus) - std::norm(a.c_minus) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("Wronskian conservation") {
  const double tol = 1e-8;
  for (const auto& p :
       {FieldProfile::constant(2.0), FieldProfile::step(1, 4, 0), FieldProfile::step(3, 0.5, 2),
        FieldProfile::smooth_ramp(1, 4, 0, 1), FieldProfile::smooth_ramp(2, 0.7, 1, 0.3),
        FieldProfile::tabulated({{0, 1}, {1, 3}, {2, 2}, {4, 2.5}}, 3)}) {
    const auto traj = solve_envelope(p, tol);
    const cplx w0 = traj.nodes().front().wronskian();
    CHECK(std::abs(w0 - cplx{0, -p.omega(traj.t_start())}) < 1e-15);
    double worst = 0;
    for (const auto& s : traj.nodes()) worst = std::max(worst, std::abs(s.wronskian() - w0));
    CHECK(worst < 10 * tol);
    for (const auto& s : traj.nodes()) CHECK(std::abs(s.eps) > 0.0);
  }
}

TEST_CASE("reflection coefficient properties") {
  const std::vector<FieldProfile> profiles = {
      FieldProfile::step(1, 4, 0), FieldProfile::step(2, 1, 0.5),
      FieldProfile::smooth_ramp(1, 4, 0, 0.3), FieldProfile::smooth_ramp(1, 4, 0, 1.0),
      FieldProfile::smooth_ramp(3, 1.5, -1, 0.6)};
  for (const auto& p : profiles) {
    const double coarse = extract_asymptotics(solve_envelope(p, 1e-8), p).R;
    const double fine = extract_asymptotics(solve_envelope(p, 1e-9), p).R;
    CHECK(coarse >= 0.0);
    CHECK(coarse < 1.0);
    CHECK(std::abs(coarse - fine) < 1e-8);

    const auto rev = p.time_reversed();
    const double back = extract_asymptotics(solve_envelope(rev, 1e-10), rev).R;
    CHECK(std::abs(back - fine) < 1e-6);
  }
}

TEST_CASE("adiabatic ramps do not reflect") {
  double prev = 1.0;
  for (double width : {0.05, 0.2, 0.5, 1.0, 2.0}) {
    const auto p = FieldProfile::smooth_ramp(1, 4, 0, width);
    const double R = extract_asymptotics(solve_envelope(p, 1e-10), p).R;
    CHECK(R < prev);
    prev = R;
  }
  for (double width : {50.0, 100.0}) {
    const auto p = FieldProfile::smooth_ramp(1, 4, 0, width);
    CHECK(extract_asymptotics(solve_envelope(p, 1e-9), p).R < 1e-4);
  }
}

TEST_CASE("dense output and Ermakov cross-check") {
  const auto p = FieldProfile::smooth_ramp(1, 4, 0, 0.5);
  const auto traj = solve_envelope(p, 1e-10);
  for (double t = traj.t_start() + 0.1; t < traj.t_end() - 0.1; t += 0.37) {
    const auto exact = traj.at(t);
    const auto approx = traj.interpolate(t);
    CHECK(std::abs(exact.eps - approx.eps) < 1e-6);
    CHECK(std::abs(ermakov_residual(traj, t)) < 1e-4);
  }
  CHECK_THROWS_AS(traj.at(traj.t_end() + 1), DomainError);
}

TEST_CASE("asymptotics require a flat tail") {
  const auto p = FieldProfile::smooth_ramp(1, 4, 0, 1);
  const auto short_traj = solve_envelope(p, 0.0, 1e-8);
  CHECK_THROWS_AS(extract_asymptotics(short_traj, p), DomainError);
}

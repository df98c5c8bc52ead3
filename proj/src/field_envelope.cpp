#include "lltomo/field_envelope.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>

namespace lltomo {

namespace {

using Vec6 = std::array<double, 6>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

Vec6 rhs(const FieldProfile& p, double t, const Vec6& y) {
  const double w = p.omega(t);
  const double omega_half_sq = 0.25 * w * w;
  const double inv_mod2 = 1.0 / (y[0] * y[0] + y[1] * y[1]);
  return {y[2], y[3], -omega_half_sq * y[0], -omega_half_sq * y[1], inv_mod2 + w, inv_mod2 - w};
}

Vec6 axpy(const Vec6& y, double h, std::initializer_list<std::pair<double, const Vec6*>> ks) {
  Vec6 out = y;
  for (const auto& [a, k] : ks)
    for (int i = 0; i < 6; ++i) out[i] += h * a * (*k)[i];
  return out;
}

EnvelopeState to_state(double t, const Vec6& y) {
  return {t, {y[0], y[1]}, {y[2], y[3]}, y[4], y[5]};
}

Vec6 from_state(const EnvelopeState& s) {
  return {s.eps.real(), s.eps.imag(), s.eps_dot.real(), s.eps_dot.imag(), s.gamma_plus,
          s.gamma_minus};
}

// Integrates the smooth piece [t0, t1]; on_step is called after every
// accepted step with (t, y, f(t, y)).
void integrate_segment(const FieldProfile& p, double t0, double t1, Vec6& y, double tol,
                       const std::function<void(double, const Vec6&, const Vec6&)>& on_step) {
  if (t1 <= t0) return;
  // Local tolerance sits two decades under the requested global tolerance.
  const double local_tol = 1e-2 * tol;
  double t = t0;
  Vec6 k1 = rhs(p, t, y);
  const double w0 = std::max(p.omega(t0), 1e-12);
  double h = std::min(t1 - t0, 0.1 / w0);
  while (t < t1) {
    if (t + h > t1) h = t1 - t;
    const Vec6 y2 = axpy(y, h, {{a21, &k1}});
    const Vec6 k2 = rhs(p, t + c2 * h, y2);
    const Vec6 y3 = axpy(y, h, {{a31, &k1}, {a32, &k2}});
    const Vec6 k3 = rhs(p, t + c3 * h, y3);
    const Vec6 y4 = axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
    const Vec6 k4 = rhs(p, t + c4 * h, y4);
    const Vec6 y5 = axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
    const Vec6 k5 = rhs(p, t + c5 * h, y5);
    const Vec6 y6 = axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
    const Vec6 k6 = rhs(p, t + h, y6);
    const Vec6 yn = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const Vec6 k7 = rhs(p, t + h, yn);

    // Error control on the envelope components only; the phase integrals are
    // pure quadratures driven by them.
    double err = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                             e7 * k7[i]);
      const double sc = local_tol * (1.0 + std::max(std::abs(y[i]), std::abs(yn[i])));
      err = std::max(err, std::abs(ei) / sc);
    }
    if (err <= 1.0) {
      t = (t + h >= t1) ? t1 : t + h;
      y = yn;
      k1 = k7;
      on_step(t, y, k1);
    }
    const double factor = (err == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    if (err > 1.0 && h * factor < 1e-14 * std::max(1.0, std::abs(t))) {
      throw IntegrationError("envelope integration step size underflow", t);
    }
    h *= factor;
  }
}

double pchip_end_slope(double h0, double h1, double d0, double d1) {
  double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (s * d0 <= 0.0) return 0.0;
  if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3.0 * d0)) return 3.0 * d0;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// FieldProfile

FieldProfile FieldProfile::constant(double omega0) {
  FieldProfile p;
  p.kind_ = ProfileKind::constant;
  p.omega0_ = p.omega1_ = omega0;
  p.validate();
  return p;
}

FieldProfile FieldProfile::step(double omega0, double omega1, double t_jump) {
  FieldProfile p;
  p.kind_ = ProfileKind::step;
  p.omega0_ = omega0;
  p.omega1_ = omega1;
  p.t0_ = t_jump;
  p.validate();
  return p;
}

FieldProfile FieldProfile::smooth_ramp(double omega0, double omega1, double t_center,
                                       double width) {
  FieldProfile p;
  p.kind_ = ProfileKind::smooth_ramp;
  p.omega0_ = omega0;
  p.omega1_ = omega1;
  p.t0_ = t_center;
  p.width_ = width;
  p.validate();
  return p;
}

FieldProfile FieldProfile::tabulated(std::vector<std::pair<double, double>> samples,
                                     int order) {
  FieldProfile p;
  p.kind_ = ProfileKind::tabulated;
  p.order_ = order;
  for (const auto& [t, w] : samples) {
    p.ts_.push_back(t);
    p.ws_.push_back(w);
  }
  p.validate();
  const std::size_t n = p.ts_.size();
  p.omega0_ = p.ws_.front();
  p.omega1_ = p.ws_.back();
  if (order == 3) {
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = p.ts_[i + 1] - p.ts_[i];
      d[i] = (p.ws_[i + 1] - p.ws_[i]) / h[i];
    }
    p.slopes_.assign(n, 0.0);
    if (n == 2) {
      p.slopes_[0] = p.slopes_[1] = d[0];
    } else {
      for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0) continue;
        const double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
        p.slopes_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
      p.slopes_[0] = pchip_end_slope(h[0], h[1], d[0], d[1]);
      p.slopes_[n - 1] = pchip_end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    }
  }
  return p;
}

void FieldProfile::validate() const {
  auto positive = [](double w, const char* name) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw DomainError(std::string("field profile: ") + name + " must be positive");
    }
  };
  switch (kind_) {
    case ProfileKind::constant:
      positive(omega0_, "omega0");
      break;
    case ProfileKind::step:
      positive(omega0_, "omega0");
      positive(omega1_, "omega1");
      break;
    case ProfileKind::smooth_ramp:
      positive(omega0_, "omega0");
      positive(omega1_, "omega1");
      positive(width_, "width");
      break;
    case ProfileKind::tabulated:
      if (order_ != 1 && order_ != 3) {
        throw DomainError("field profile: tabulated order must be 1 or 3");
      }
      if (ts_.size() < 2) throw DomainError("field profile: need at least two samples");
      for (std::size_t i = 0; i < ts_.size(); ++i) {
        positive(ws_[i], "sample omega");
        if (i > 0 && !(ts_[i] > ts_[i - 1])) {
          throw DomainError("field profile: sample times must be strictly increasing");
        }
      }
      break;
  }
}

double FieldProfile::omega(double t) const {
  switch (kind_) {
    case ProfileKind::constant:
      return omega0_;
    case ProfileKind::step:
      return t < t0_ ? omega0_ : omega1_;
    case ProfileKind::smooth_ramp:
      return omega0_ + (omega1_ - omega0_) * 0.5 * (1.0 + std::tanh((t - t0_) / width_));
    case ProfileKind::tabulated: {
      if (t < ts_.front() || t > ts_.back()) {
        throw DomainError("omega_at: t outside the tabulated profile's domain");
      }
      auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
      std::size_t i = (it == ts_.begin()) ? 0 : static_cast<std::size_t>(it - ts_.begin()) - 1;
      if (i + 1 >= ts_.size()) return ws_.back();
      const double h = ts_[i + 1] - ts_[i];
      const double s = (t - ts_[i]) / h;
      if (order_ == 1) return ws_[i] + s * (ws_[i + 1] - ws_[i]);
      const double s2 = s * s, s3 = s2 * s;
      return (2 * s3 - 3 * s2 + 1) * ws_[i] + (s3 - 2 * s2 + s) * h * slopes_[i] +
             (-2 * s3 + 3 * s2) * ws_[i + 1] + (s3 - s2) * h * slopes_[i + 1];
    }
  }
  return omega0_;
}

double FieldProfile::omega_initial() const { return omega0_; }
double FieldProfile::omega_final() const { return omega1_; }

bool FieldProfile::is_constant() const {
  if (kind_ == ProfileKind::tabulated) {
    return std::all_of(ws_.begin(), ws_.end(), [&](double w) { return w == ws_.front(); });
  }
  return omega0_ == omega1_;
}

std::pair<double, double> FieldProfile::matching_window() const {
  switch (kind_) {
    case ProfileKind::constant:
      return {0.0, 0.0};
    case ProfileKind::step:
      if (is_constant()) return {t0_, t0_};
      return {t0_ - 1.0, t0_ + 1.0};
    case ProfileKind::smooth_ramp: {
      if (is_constant()) return {t0_, t0_};
      // |ω(t) − ω_end| ≈ |Δω| e^{−2|u|}; push |u| one unit past the flatness bound.
      const double dw = std::abs(omega1_ - omega0_);
      const double u_start = 0.5 * std::log(dw / (omega0_ * kFlatnessTolerance)) + 1.0;
      const double u_end = 0.5 * std::log(dw / (omega1_ * kFlatnessTolerance)) + 1.0;
      return {t0_ - width_ * std::max(u_start, 0.0), t0_ + width_ * std::max(u_end, 0.0)};
    }
    case ProfileKind::tabulated:
      return {ts_.front(), ts_.back()};
  }
  return {0.0, 0.0};
}

std::vector<double> FieldProfile::breakpoints() const {
  if (kind_ == ProfileKind::step && !is_constant()) return {t0_};
  return {};
}

FieldProfile FieldProfile::time_reversed() const {
  switch (kind_) {
    case ProfileKind::constant:
      return *this;
    case ProfileKind::step:
      return step(omega1_, omega0_, -t0_);
    case ProfileKind::smooth_ramp:
      return smooth_ramp(omega1_, omega0_, -t0_, width_);
    case ProfileKind::tabulated: {
      std::vector<std::pair<double, double>> rev;
      for (std::size_t i = ts_.size(); i-- > 0;) rev.emplace_back(-ts_[i], ws_[i]);
      return tabulated(std::move(rev), order_);
    }
  }
  return *this;
}

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::constant:
      return "constant";
    case ProfileKind::step:
      return "step";
    case ProfileKind::smooth_ramp:
      return "smooth-ramp";
    case ProfileKind::tabulated:
      return "tabulated";
  }
  return "unknown";
}

nlohmann::json FieldProfile::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  switch (kind_) {
    case ProfileKind::constant:
      j["omega0"] = omega0_;
      break;
    case ProfileKind::step:
      j["omega0"] = omega0_;
      j["omega1"] = omega1_;
      j["t_jump"] = t0_;
      break;
    case ProfileKind::smooth_ramp:
      j["omega0"] = omega0_;
      j["omega1"] = omega1_;
      j["t_center"] = t0_;
      j["width"] = width_;
      break;
    case ProfileKind::tabulated: {
      nlohmann::json samples = nlohmann::json::array();
      for (std::size_t i = 0; i < ts_.size(); ++i) samples.push_back({ts_[i], ws_[i]});
      j["samples"] = samples;
      j["order"] = order_;
      break;
    }
  }
  return j;
}

FieldProfile FieldProfile::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("field profile must be a JSON object");
  auto number = [&](const char* key) -> double {
    if (!j.contains(key)) {
      throw ValidationError(std::string("field profile: missing field '") + key + "'");
    }
    if (!j.at(key).is_number()) {
      throw ValidationError(std::string("field profile: field '") + key + "' must be a number");
    }
    return j.at(key).get<double>();
  };
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw ValidationError("field profile: missing field 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "constant") return constant(number("omega0"));
    if (kind == "step") return step(number("omega0"), number("omega1"), number("t_jump"));
    if (kind == "smooth-ramp" || kind == "smooth_ramp") {
      return smooth_ramp(number("omega0"), number("omega1"), number("t_center"),
                         number("width"));
    }
    if (kind == "tabulated") {
      if (!j.contains("samples") || !j.at("samples").is_array()) {
        throw ValidationError("field profile: missing field 'samples'");
      }
      std::vector<std::pair<double, double>> samples;
      for (const auto& s : j.at("samples")) {
        if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number()) {
          throw ValidationError("field profile: field 'samples' must hold [t, omega] pairs");
        }
        samples.emplace_back(s[0].get<double>(), s[1].get<double>());
      }
      const int order = j.contains("order") ? j.at("order").get<int>() : 1;
      return tabulated(std::move(samples), order);
    }
  } catch (const DomainError& e) {
    throw ValidationError(e.what());
  }
  throw ValidationError("field profile: unknown kind '" + kind + "'");
}

std::string FieldProfile::hash() const {
  const std::string text = to_json().dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double omega_at(const FieldProfile& profile, double t) { return profile.omega(t); }

// ---------------------------------------------------------------------------
// Envelope

EnvelopeTrajectory::EnvelopeTrajectory(FieldProfile profile, double tol,
                                       std::vector<EnvelopeState> nodes,
                                       std::vector<EnvelopeState> derivs)
    : profile_(std::move(profile)),
      tol_(tol),
      nodes_(std::move(nodes)),
      derivs_(std::move(derivs)) {}

EnvelopeState EnvelopeTrajectory::interpolate(double t) const {
  if (t < t_start() || t > t_end()) {
    throw DomainError("envelope: interpolation time outside the trajectory");
  }
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t,
                             [](const EnvelopeState& s, double v) { return s.t < v; });
  if (it == nodes_.begin()) return nodes_.front();
  const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  const EnvelopeState &a = nodes_[i], &b = nodes_[i + 1];
  const EnvelopeState &da = derivs_[i], &db = derivs_[i + 1];
  const double h = b.t - a.t;
  const double s = (t - a.t) / h, s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2,
               h11 = s3 - s2;
  auto mix = [&](auto ya, auto dya, auto yb, auto dyb) {
    return h00 * ya + h10 * h * dya + h01 * yb + h11 * h * dyb;
  };
  EnvelopeState out;
  out.t = t;
  out.eps = mix(a.eps, da.eps, b.eps, db.eps);
  out.eps_dot = mix(a.eps_dot, da.eps_dot, b.eps_dot, db.eps_dot);
  out.gamma_plus = mix(a.gamma_plus, da.gamma_plus, b.gamma_plus, db.gamma_plus);
  out.gamma_minus = mix(a.gamma_minus, da.gamma_minus, b.gamma_minus, db.gamma_minus);
  return out;
}

EnvelopeState EnvelopeTrajectory::at(double t) const {
  if (t < t_start() || t > t_end()) {
    throw DomainError("envelope: query time outside the trajectory");
  }
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t,
                             [](double v, const EnvelopeState& s) { return v < s.t; });
  const EnvelopeState& base = *(it - 1);
  if (base.t == t) return base;
  Vec6 y = from_state(base);
  double t0 = base.t;
  std::vector<double> cuts;
  for (double b : profile_.breakpoints())
    if (b > t0 && b < t) cuts.push_back(b);
  cuts.push_back(t);
  for (double c : cuts) {
    integrate_segment(profile_, t0, c, y, tol_, [](double, const Vec6&, const Vec6&) {});
    t0 = c;
  }
  return to_state(t, y);
}

EnvelopeTrajectory solve_envelope(const FieldProfile& profile, double t_end, double tol) {
  if (!(tol > 0.0)) throw DomainError("solve_envelope: tol must be positive");
  const double t_start = profile.matching_window().first;
  if (t_end < t_start) throw DomainError("solve_envelope: t_end precedes t_start");
  const double w0 = profile.omega(t_start);
  Vec6 y = {1.0, 0.0, 0.0, 0.5 * w0, 0.0, 0.0};

  std::vector<EnvelopeState> nodes, derivs;
  auto record = [&](double t, const Vec6& yy, const Vec6& f) {
    nodes.push_back(to_state(t, yy));
    derivs.push_back(to_state(t, f));
  };
  record(t_start, y, rhs(profile, t_start, y));

  std::vector<double> cuts;
  for (double b : profile.breakpoints())
    if (b > t_start && b < t_end) cuts.push_back(b);
  cuts.push_back(t_end);
  double t0 = t_start;
  for (double c : cuts) {
    integrate_segment(profile, t0, c, y, tol, record);
    // Right-sided derivative after a jump.
    derivs.back() = to_state(c, rhs(profile, c, y));
    t0 = c;
  }
  return EnvelopeTrajectory(profile, tol, std::move(nodes), std::move(derivs));
}

EnvelopeTrajectory solve_envelope(const FieldProfile& profile, double tol) {
  auto [t_start, t_end] = profile.matching_window();
  if (t_end == t_start && profile.kind() != ProfileKind::tabulated) t_end = t_start;
  return solve_envelope(profile, t_end, tol);
}

AsymptoticData extract_asymptotics(const EnvelopeTrajectory& trajectory,
                                   const FieldProfile& profile) {
  const EnvelopeState& s = trajectory.final_state();
  const double t = s.t;
  const double wf = profile.omega(t);
  if (t < profile.matching_window().second) {
    throw DomainError("extract_asymptotics: trajectory ends before the profile is flat");
  }
  if (profile.kind() != ProfileKind::tabulated) {
    for (double dt : {0.0, 1.0, 10.0, 100.0}) {
      if (std::abs(profile.omega(t + dt) - wf) > kFlatnessTolerance * wf) {
        throw DomainError("extract_asymptotics: profile is not constant after t_end");
      }
    }
  }
  const double big_omega = 0.5 * wf;
  AsymptoticData out;
  out.omega_final = wf;
  const cplx rot = std::polar(1.0, -big_omega * t);
  if (profile.is_constant()) {
    out.c_plus = s.eps * rot;
    out.c_minus = 0.0;
    out.R = 0.0;
    return out;
  }
  const cplx ratio = s.eps_dot / cplx{0.0, big_omega};
  out.c_plus = 0.5 * (s.eps + ratio) * rot;
  out.c_minus = 0.5 * (s.eps - ratio) * std::conj(rot);
  const double p2 = std::norm(out.c_plus);
  if (std::sqrt(p2) < trajectory.tol()) {
    throw DegenerateAsymptoticsError("extract_asymptotics: |c+| vanishes, R would be >= 1");
  }
  out.R = std::norm(out.c_minus) / p2;
  if (!(out.R < 1.0)) {
    throw DegenerateAsymptoticsError("extract_asymptotics: R >= 1");
  }
  return out;
}

double ermakov_residual(const EnvelopeTrajectory& trajectory, double t, double h) {
  const double a = std::abs(trajectory.at(t - h).eps);
  const double b = std::abs(trajectory.at(t).eps);
  const double c = std::abs(trajectory.at(t + h).eps);
  const double second = (a - 2.0 * b + c) / (h * h);
  const double w = trajectory.profile().omega(t);
  const double half_w = 0.5 * std::abs(trajectory.nodes().front().wronskian());
  return second + 0.25 * w * w * b - half_w * half_w / (b * b * b);
}

}  // namespace lltomo

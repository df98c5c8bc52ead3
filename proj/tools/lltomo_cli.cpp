// lltomo command-line front end.
//
// Exit codes: 0 success, 2 usage, 3 consistency failure, 4 numerical budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lltomo/field_envelope.hpp"
#include "lltomo/numerics.hpp"
#include "lltomo/radon.hpp"
#include "lltomo/states.hpp"
#include "lltomo/transitions.hpp"

#ifndef LLTOMO_VERSION
#define LLTOMO_VERSION "dev"
#endif

using namespace lltomo;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitConsistency = 3;
constexpr int kExitBudget = 4;
constexpr const char* kManifestSchema = "lltomo.manifest/1";
constexpr const char* kCompletenessSchema = "lltomo.completeness/1";
constexpr const char* kDiagnosticSchema = "lltomo.diagnostic/1";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& field) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size() || !std::isfinite(v)) {
    throw UsageError(field + ": '" + s + "' is not a finite number");
  }
  return v;
}

std::vector<double> parse_list(const std::string& s, const std::string& field) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_double(item, field));
  if (out.empty()) throw UsageError(field + ": empty list");
  return out;
}

std::pair<double, double> parse_pair(const std::string& s, const std::string& field) {
  const auto v = parse_list(s, field);
  if (v.size() != 2) throw UsageError(field + ": expected two comma-separated numbers");
  return {v[0], v[1]};
}

// Accepts "1e5" style counts.
std::size_t parse_count(const std::string& s, const std::string& field) {
  const double v = parse_double(s, field);
  if (v < 1.0 || v != std::floor(v) || v > 1e15) {
    throw UsageError(field + ": '" + s + "' is not a positive integer");
  }
  return static_cast<std::size_t>(v);
}

// "0.5", "-1.2i", "0.3+0.4i", "i".
cplx parse_complex(const std::string& s, const std::string& field) {
  if (s.empty() || s.back() != 'i') return {parse_double(s, field), 0.0};
  const std::string body = s.substr(0, s.size() - 1);
  std::size_t split_at = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split_at = k;
      break;
    }
  }
  auto imag = [&](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return parse_double(t, field);
  };
  if (split_at == std::string::npos) return {0.0, imag(body)};
  return {parse_double(body.substr(0, split_at), field), imag(body.substr(split_at))};
}

StateLabel parse_state(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    throw UsageError("--state: expected fock:n1,n2 or coherent:alpha,beta");
  }
  const std::string kind = s.substr(0, colon);
  const auto parts = split(s.substr(colon + 1), ',');
  if (parts.size() != 2) throw UsageError("--state: expected two comma-separated parameters");
  if (kind == "fock") {
    int n[2];
    for (int j = 0; j < 2; ++j) {
      const double v = parse_double(parts[j], "--state");
      if (v < 0 || v != std::floor(v)) throw UsageError("--state: Fock indices must be non-negative integers");
      n[j] = static_cast<int>(v);
    }
    return StateLabel::fock(n[0], n[1]);
  }
  if (kind == "coherent") {
    return StateLabel::coherent(parse_complex(parts[0], "--state"), parse_complex(parts[1], "--state"));
  }
  throw UsageError("--state: unknown kind '" + kind + "'");
}

json state_json(const StateLabel& label) {
  if (label.is_coherent()) {
    return {{"kind", "coherent"},
            {"alpha", {label.alpha().real(), label.alpha().imag()}},
            {"beta", {label.beta().real(), label.beta().imag()}}};
  }
  return {{"kind", "fock"}, {"n", {label.n1(), label.n2()}}};
}

FieldProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--profile: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("--profile: '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    return FieldProfile::from_json(j);
  } catch (const Error& e) {
    throw UsageError(std::string("--profile: ") + e.what());
  }
}

struct FieldChoice {
  FieldContext ctx;
  std::optional<std::string> profile_hash;
  json description;
};

// "constant:<omega>" or a profile file ("profile:<path>" or "<path>"). A
// profile yields the evolved context at the end of its matching window.
FieldChoice parse_field(const std::string& s, double envelope_tol) {
  if (s.rfind("constant:", 0) == 0) {
    const double w = parse_double(s.substr(9), "--field");
    if (!(w > 0.0)) throw UsageError("--field: frequency must be positive");
    return {FieldContext::constant(w), std::nullopt, {{"kind", "constant"}, {"omega", w}}};
  }
  const std::string path = s.rfind("profile:", 0) == 0 ? s.substr(8) : s;
  const FieldProfile profile = load_profile(path);
  const TransitionContext tc(profile, envelope_tol);
  return {tc.evolved(), profile.hash(), {{"kind", "profile"}, {"profile", profile.to_json()}}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path_ != "-") {
      file_.open(path_, std::ios::binary);
      if (!file_) throw UsageError("--out: cannot write '" + path_ + "'");
    }
  }
  std::ostream& stream() { return path_ == "-" ? std::cout : file_; }
  bool is_file() const { return path_ != "-"; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream file_;
};

struct RunInfo {
  std::vector<std::string> argv;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

void write_manifest(const RunInfo& run, const std::string& out_path, json body) {
  body["schema"] = kManifestSchema;
  body["argv"] = run.argv;
  body["tool_version"] = LLTOMO_VERSION;
  body["output"] = out_path;
  body["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - run.start).count();
  std::ofstream m(out_path + ".manifest.json");
  if (!m) throw UsageError("--out: cannot write manifest for '" + out_path + "'");
  m << body.dump(2) << '\n';
}

std::size_t resolved_threads(std::size_t requested) {
  return requested == 0 ? default_thread_count() : requested;
}

// ---------------------------------------------------------------- tomogram

struct TomogramArgs {
  std::string state, field, mu = "0,0", nu = "1,1", out = "tomogram.csv";
  std::size_t grid = 64;
  double extent = 0.0;
  double envelope_tol = 1e-10;
};

int cmd_tomogram(const TomogramArgs& a, const RunInfo& run) {
  const StateLabel label = parse_state(a.state);
  const FieldChoice field = parse_field(a.field, a.envelope_tol);
  const auto [mu1, mu2] = parse_pair(a.mu, "--mu");
  const auto [nu1, nu2] = parse_pair(a.nu, "--nu");
  if ((mu1 == 0.0 && nu1 == 0.0) || (mu2 == 0.0 && nu2 == 0.0)) {
    throw UsageError("--mu/--nu: each (mu_j, nu_j) pair must be nonzero");
  }
  if (a.grid < 2) throw UsageError("--grid: need at least 2 points per axis");

  double L = a.extent;
  if (L <= 0.0) {
    const TomogramFrame f = tomogram_frame(field.ctx, mu1, nu1, mu2, nu2);
    const double zmax = std::max(std::abs(f.z[0]), std::abs(f.z[1]));
    const double spread = label.is_coherent()
                              ? 2.0 * (std::abs(label.alpha()) + std::abs(label.beta()))
                              : 2.0 * std::sqrt(label.n1() + label.n2());
    L = zmax * (6.0 + spread);
  }
  const double dX = 2.0 * L / static_cast<double>(a.grid);

  Output out(a.out);
  auto& os = out.stream();
  os << "X1,X2,mu1,nu1,mu2,nu2,w\n";
  const std::string frame = fmt(mu1) + "," + fmt(nu1) + "," + fmt(mu2) + "," + fmt(nu2);
  double sum = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < a.grid; ++i) {
    const double X1 = -L + static_cast<double>(i) * dX;
    for (std::size_t j = 0; j < a.grid; ++j) {
      const double X2 = -L + static_cast<double>(j) * dX;
      const double w = tomogram(label, field.ctx, TomogramPoint{X1, X2, mu1, nu1, mu2, nu2});
      sum += w;
      peak = std::max(peak, w);
      os << fmt(X1) << ',' << fmt(X2) << ',' << frame << ',' << fmt(w) << '\n';
    }
  }
  os.flush();
  if (out.is_file()) {
    write_manifest(run, out.path(),
                   {{"command", "tomogram"},
                    {"state", state_json(label)},
                    {"field", field.description},
                    {"profile_hash", field.profile_hash ? json(*field.profile_hash) : json(nullptr)},
                    {"frame", {{"mu", {mu1, mu2}}, {"nu", {nu1, nu2}}}},
                    {"grid", {{"points", a.grid}, {"x_min", -L}, {"dx", dX}}},
                    {"budgets", {{"envelope_tol", a.envelope_tol}}},
                    {"seed", nullptr},
                    {"normalization", sum * dX * dX},
                    {"peak", peak}});
  }
  return kExitOk;
}

// -------------------------------------------------------------- transition

struct TransitionArgs {
  std::string profile, routes = "overlap,jacobi", samples = "1e6", out = "-";
  int nmax = 2;
  std::uint64_t seed = 1;
  std::size_t strata = 100, threads = 0;
  double quad_tol = 1e-10, envelope_tol = 1e-10, stderr_abs = 1e-3, stderr_rel = 0.01;
  double agree = 1e-6, sigma = 4.0, tail_tol = 1e-4;
};

std::vector<Route> parse_routes(const std::string& s) {
  std::vector<Route> routes;
  for (const auto& name : split(s, ',')) {
    try {
      const Route r = route_from_string(name);
      if (std::find(routes.begin(), routes.end(), r) == routes.end()) routes.push_back(r);
    } catch (const ValidationError&) {
      throw UsageError("--routes: unknown route '" + name + "'");
    }
  }
  if (routes.empty()) throw UsageError("--routes: no route given");
  return routes;
}

json index_json(FockIndex n) { return {n.n1, n.n2}; }

int cmd_transition(const TransitionArgs& a, const RunInfo& run) {
  const FieldProfile profile = load_profile(a.profile);
  const std::vector<Route> routes = parse_routes(a.routes);
  TransitionBudget budget;
  budget.quad = {a.quad_tol, a.quad_tol, budget.quad.max_evals};
  budget.envelope_tol = a.envelope_tol;
  budget.mc = {a.seed, parse_count(a.samples, "--samples"), a.strata, a.threads};
  budget.stderr_abs = a.stderr_abs;
  budget.stderr_rel = a.stderr_rel;
  try {
    budget.validate();
  } catch (const DomainError& e) {
    throw UsageError(std::string("budget: ") + e.what());
  }
  if (a.nmax < 0) throw UsageError("--nmax: must be non-negative");

  const TransitionTable table = transition_table(profile, a.nmax, budget, routes, a.tail_tol);

  std::vector<json> diagnostics;
  // Entries are grouped per (initial, final) in route order.
  const std::size_t nr = routes.size();
  for (std::size_t k = 0; k < table.entries.size(); k += nr) {
    for (std::size_t p = 0; p < nr; ++p)
      for (std::size_t q = p + 1; q < nr; ++q) {
        const auto& A = table.entries[k + p];
        const auto& B = table.entries[k + q];
        const ProbabilityEstimate &ea = A.estimate, &eb = B.estimate;
        const double diff = std::abs(ea.value - eb.value);
        const double sd = std::hypot(ea.std_err, eb.std_err);
        const double tol = sd > 0.0 ? a.sigma * std::max(sd, 1e-12) : a.agree;
        if (diff > tol) {
          diagnostics.push_back({{"schema", kDiagnosticSchema},
                                 {"check", "route_agreement"},
                                 {"initial", index_json(A.initial)},
                                 {"final", index_json(A.final)},
                                 {"routes", {to_string(ea.route), to_string(eb.route)}},
                                 {"values", {ea.value, eb.value}},
                                 {"difference", diff},
                                 {"tolerance", tol},
                                 {"profile_hash", table.profile_hash}});
        }
      }
  }
  for (const auto& row : table.rows) {
    const double deficit = 1.0 - row.sum;
    if (deficit < -a.agree || deficit > row.tail_bound + a.agree) {
      diagnostics.push_back({{"schema", kDiagnosticSchema},
                             {"check", "completeness"},
                             {"initial", index_json(row.initial)},
                             {"route", to_string(row.route)},
                             {"sum", row.sum},
                             {"tail_bound", row.tail_bound},
                             {"profile_hash", table.profile_hash}});
    }
  }

  Output out(a.out);
  auto& os = out.stream();
  for (const auto& e : table.entries) os << transition_record(e, table.profile_hash).dump() << '\n';
  for (const auto& row : table.rows) {
    os << json{{"schema", kCompletenessSchema},
               {"initial", index_json(row.initial)},
               {"route", to_string(row.route)},
               {"sum", row.sum},
               {"m1_max", row.m1_max},
               {"tail_bound", row.tail_bound},
               {"profile_hash", table.profile_hash}}
              .dump()
       << '\n';
  }
  for (const auto& d : diagnostics) os << d.dump() << '\n';
  os.flush();
  if (out.is_file()) {
    write_manifest(run, out.path(),
                   {{"command", "transition"},
                    {"profile", profile.to_json()},
                    {"profile_hash", table.profile_hash},
                    {"states", {{"n_max", a.nmax}}},
                    {"routes", split(a.routes, ',')},
                    {"R", table.R},
                    {"budgets",
                     {{"quad_tol", a.quad_tol},
                      {"envelope_tol", a.envelope_tol},
                      {"samples", budget.mc.n_samples},
                      {"strata", a.strata},
                      {"stderr_abs", a.stderr_abs},
                      {"stderr_rel", a.stderr_rel},
                      {"tail_tol", a.tail_tol}}},
                    {"seed", a.seed},
                    {"threads", resolved_threads(a.threads)},
                    {"diagnostics", diagnostics.size()}});
  }
  if (!diagnostics.empty()) {
    std::cerr << "transition: " << diagnostics.size() << " consistency check(s) failed\n";
    return kExitConsistency;
  }
  return kExitOk;
}

// -------------------------------------------------------------- reflection

struct ReflectionArgs {
  std::string kind = "step", omega1 = "1,2,4", width = "1", routes = "envelope,tomographic";
  std::string samples = "1e5", out = "-";
  double omega0 = 1.0, t0 = 0.0, envelope_tol = 1e-10;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

int cmd_reflection(const ReflectionArgs& a, const RunInfo& run) {
  if (a.kind != "step" && a.kind != "ramp") throw UsageError("--kind: expected step or ramp");
  const auto omega1 = parse_list(a.omega1, "--omega1");
  const auto widths = a.kind == "ramp" ? parse_list(a.width, "--width") : std::vector<double>{0.0};
  bool envelope = false, tomo = false;
  for (const auto& r : split(a.routes, ',')) {
    if (r == "envelope") envelope = true;
    else if (r == "tomographic") tomo = true;
    else throw UsageError("--routes: unknown route '" + r + "'");
  }
  TransitionBudget budget;
  budget.envelope_tol = a.envelope_tol;
  budget.mc = {a.seed, parse_count(a.samples, "--samples"), 100, a.threads};

  Output out(a.out);
  auto& os = out.stream();
  os << "kind,omega0,omega1,width,R_envelope,R_tomographic,stderr_tomographic\n";
  std::vector<std::string> hashes;
  for (double w1 : omega1)
    for (double width : widths) {
      FieldProfile profile = FieldProfile::constant(a.omega0);
      try {
        profile = a.kind == "step" ? FieldProfile::step(a.omega0, w1, a.t0)
                                   : FieldProfile::smooth_ramp(a.omega0, w1, a.t0, width);
      } catch (const Error& e) {
        throw UsageError(std::string("profile parameters: ") + e.what());
      }
      hashes.push_back(profile.hash());
      os << a.kind << ',' << fmt(a.omega0) << ',' << fmt(w1) << ','
         << (a.kind == "ramp" ? fmt(width) : "") << ',';
      if (envelope) os << fmt(TransitionContext(profile, a.envelope_tol).R());
      os << ',';
      if (tomo) {
        const ReflectionEstimate r = reflection_from_tomograms(profile, budget);
        os << fmt(r.value) << ',' << fmt(r.std_err);
      } else {
        os << ',';
      }
      os << '\n';
    }
  os.flush();
  if (out.is_file()) {
    write_manifest(run, out.path(),
                   {{"command", "reflection"},
                    {"kind", a.kind},
                    {"omega0", a.omega0},
                    {"omega1", omega1},
                    {"width", widths},
                    {"t0", a.t0},
                    {"profile_hash", hashes},
                    {"budgets", {{"envelope_tol", a.envelope_tol}, {"samples", budget.mc.n_samples}}},
                    {"seed", a.seed},
                    {"threads", resolved_threads(a.threads)}});
  }
  return kExitOk;
}

// ---------------------------------------------------------------- validate

struct Check {
  std::string name;
  double measured;
  double tolerance;
};

std::vector<Check> run_validation_suite() {
  using std::numbers::pi;
  std::vector<Check> checks;
  const QuadratureBudget quad{1e-10, 1e-10, 8'000'000};

  {  // normalization of a closed-form Fock tomogram in a varying field
    const TransitionContext tc(FieldProfile::step(1, 4, 0), 1e-10);
    const auto label = StateLabel::fock(1, 2);
    const double mu1 = 0.4, nu1 = 1.1, mu2 = -0.7, nu2 = 0.5;
    const TomogramFrame f = tomogram_frame(tc.evolved(), mu1, nu1, mu2, nu2);
    const double L = 14.0 * std::max(std::abs(f.z[0]), std::abs(f.z[1]));
    const auto r = adaptive_quad_2d_real(
        [&](double X1, double X2) {
          return tomogram(label, tc.evolved(), {X1, X2, mu1, nu1, mu2, nu2});
        },
        Rect{-L, L, -L, L}, quad);
    checks.push_back({"normalization", std::abs(r.value - 1.0), 1e-6});
  }
  {  // homogeneity w(λX, λμ, λν) = w / λ² per degree of freedom pair
    const auto ctx = FieldContext::constant(1.0);
    const auto label = StateLabel::coherent({0.5, -0.2}, {0.1, 0.8});
    const TomogramPoint p{0.3, -0.4, 0.6, 0.9, -0.2, 1.3};
    const double l1 = 1.7, l2 = -0.6;
    const double a = tomogram(label, ctx, p);
    const double b = tomogram(
        label, ctx, {l1 * p.X1, l2 * p.X2, l1 * p.mu1, l1 * p.nu1, l2 * p.mu2, l2 * p.nu2});
    checks.push_back({"homogeneity", std::abs(b * std::abs(l1 * l2) - a) / a, 1e-10});
  }
  {  // Wronskian conservation
    double drift = 0.0;
    for (const auto& profile : {FieldProfile::step(1, 4, 0), FieldProfile::smooth_ramp(1, 4, 0, 5)}) {
      const auto traj = solve_envelope(profile, 1e-10);
      const cplx w0 = traj.nodes().front().wronskian();
      for (const auto& s : traj.nodes()) drift = std::max(drift, std::abs(s.wronskian() - w0));
    }
    checks.push_back({"wronskian", drift, 1e-9});
  }
  const TransitionContext step(FieldProfile::step(1, 4, 0), 1e-10);
  {  // ground-state law
    const double p = probability_overlap(step, {0, 0}, {0, 0}, quad).value;
    checks.push_back({"ground_state_law", std::abs(p - (1.0 - step.R())), 1e-6});
  }
  {  // overlap vs Jacobi
    double worst = 0.0;
    for (int a = 0; a <= 1; ++a)
      for (int b = 0; b <= 1; ++b)
        for (int c = 0; c <= 2; ++c) {
          const FockIndex n{a, b}, m{c, c + b - a};
          if (m.n2 < 0) continue;
          worst = std::max(worst, std::abs(probability_overlap(step, n, m, quad).value -
                                           probability_jacobi(n, m, step.R()).value));
        }
    checks.push_back({"route_agreement_overlap_jacobi", worst, 1e-6});
  }
  {  // tomographic vs overlap, in units of the reported stderr
    TomographicOptions opt;
    opt.mc.n_samples = 200'000;
    double worst = 0.0;
    for (FockIndex n : {FockIndex{0, 0}, FockIndex{1, 1}}) {
      const auto t = probability_tomographic(step.evolved(), step.final_field(), n, n, opt);
      const double o = probability_overlap(step, n, n, quad).value;
      worst = std::max(worst, std::abs(t.value - o) / std::max(t.std_err, 1e-12));
    }
    checks.push_back({"route_agreement_tomographic_sigmas", worst, 2.0});
  }
  {  // unitarity of the (1,1) row
    const FockIndex n{1, 1};
    const TailBound tb = completeness_tail(n, step.R(), 1e-4, kMaxIndexCap);
    double sum = 0.0;
    for (int m1 = 0; m1 <= tb.m1_max; ++m1) {
      sum += probability_overlap(step, n, {m1, m1}, quad, kMaxIndexCap).value;
    }
    checks.push_back({"unitarity", std::abs(1.0 - sum), 1e-4});
  }
  {  // closed form vs numerical transform
    const auto ctx = FieldContext::constant(1.0);
    const auto label = StateLabel::fock(0, 1);
    const Grid1D g{-10, 10, 128};
    const Radon2D r(WavefunctionGrid::sample(
        [&](double x, double y) { return wavefunction(label, ctx, x, y); }, g, g));
    double worst = 0.0;
    for (const TomogramPoint& p : {TomogramPoint{0.2, -0.5, 0.1, 1.0, -0.05, 0.9},
                                   TomogramPoint{-0.8, 0.3, 0.0, 1.2, 0.1, -1.1}}) {
      worst = std::max(worst,
                       std::abs(r(p.X1, p.X2, p.mu1, p.nu1, p.mu2, p.nu2) - tomogram(label, ctx, p)));
    }
    checks.push_back({"closed_form_vs_transform", worst, 1e-8});
  }
  return checks;
}

int cmd_validate() {
  int failures = 0;
  for (const Check& c : run_validation_suite()) {
    const bool ok = c.measured <= c.tolerance;
    failures += ok ? 0 : 1;
    std::printf("%s %-34s measured=%.3e tol=%.1e\n", ok ? "PASS" : "FAIL", c.name.c_str(),
                c.measured, c.tolerance);
  }
  return failures == 0 ? kExitOk : kExitConsistency;
}

// ------------------------------------------------------------------ driver

int run(std::vector<std::string> argv);

int cmd_replay(const std::string& manifest_path, const std::string& out_override) {
  std::ifstream in(manifest_path);
  if (!in) throw UsageError("replay: cannot open '" + manifest_path + "'");
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("replay: invalid manifest: " + std::string(e.what()));
  }
  if (m.value("schema", "") != kManifestSchema || !m.contains("argv")) {
    throw UsageError("replay: not an lltomo manifest");
  }
  auto argv = m["argv"].get<std::vector<std::string>>();
  if (!out_override.empty()) {
    bool replaced = false;
    for (std::size_t k = 0; k + 1 < argv.size(); ++k) {
      if (argv[k] == "--out") {
        argv[k + 1] = out_override;
        replaced = true;
      }
    }
    if (!replaced) {
      argv.push_back("--out");
      argv.push_back(out_override);
    }
  }
  return run(argv);
}

int run(std::vector<std::string> argv) {
  CLI::App app{"Symplectic tomograms and Landau-level transition probabilities"};
  app.set_version_flag("--version", LLTOMO_VERSION);
  app.require_subcommand(1);

  TomogramArgs ta;
  auto* tom = app.add_subcommand("tomogram", "Closed-form tomogram on an X1 x X2 grid (CSV)");
  tom->add_option("--state", ta.state, "fock:n1,n2 or coherent:alpha,beta")->required();
  tom->add_option("--field", ta.field, "constant:<omega> or a profile JSON file")->required();
  tom->add_option("--mu", ta.mu, "mu1,mu2")->capture_default_str();
  tom->add_option("--nu", ta.nu, "nu1,nu2")->capture_default_str();
  tom->add_option("--grid", ta.grid, "points per axis")->capture_default_str();
  tom->add_option("--extent", ta.extent, "half-width L of the X grid (0 = automatic)");
  tom->add_option("--envelope-tol", ta.envelope_tol)->capture_default_str();
  tom->add_option("--out", ta.out, "output CSV ('-' for stdout)")->capture_default_str();

  TransitionArgs tr;
  auto* trn = app.add_subcommand("transition", "Transition table as JSON lines");
  trn->add_option("--profile", tr.profile, "field profile JSON file")->required();
  trn->add_option("--nmax", tr.nmax)->capture_default_str();
  trn->add_option("--routes", tr.routes, "overlap,jacobi,tomographic")->capture_default_str();
  trn->add_option("--samples", tr.samples, "Monte Carlo samples per estimate")->capture_default_str();
  trn->add_option("--seed", tr.seed)->capture_default_str();
  trn->add_option("--strata", tr.strata)->capture_default_str();
  trn->add_option("--threads", tr.threads, "0 = LLTOMO_THREADS or hardware")->capture_default_str();
  trn->add_option("--quad-tol", tr.quad_tol)->capture_default_str();
  trn->add_option("--envelope-tol", tr.envelope_tol)->capture_default_str();
  trn->add_option("--stderr-abs", tr.stderr_abs)->capture_default_str();
  trn->add_option("--stderr-rel", tr.stderr_rel)->capture_default_str();
  trn->add_option("--agree", tr.agree, "deterministic route tolerance")->capture_default_str();
  trn->add_option("--sigma", tr.sigma, "Monte Carlo alarm in combined stderrs")->capture_default_str();
  trn->add_option("--tail-tol", tr.tail_tol)->capture_default_str();
  trn->add_option("--out", tr.out, "output JSON lines ('-' for stdout)")->capture_default_str();

  ReflectionArgs rf;
  auto* ref = app.add_subcommand("reflection", "Reflection coefficient sweep (CSV)");
  ref->add_option("--kind", rf.kind, "step or ramp")->capture_default_str();
  ref->add_option("--omega0", rf.omega0)->capture_default_str();
  ref->add_option("--omega1", rf.omega1, "comma-separated list")->capture_default_str();
  ref->add_option("--width", rf.width, "comma-separated list (ramp)")->capture_default_str();
  ref->add_option("--t0", rf.t0, "jump time or ramp centre")->capture_default_str();
  ref->add_option("--routes", rf.routes, "envelope,tomographic")->capture_default_str();
  ref->add_option("--samples", rf.samples)->capture_default_str();
  ref->add_option("--seed", rf.seed)->capture_default_str();
  ref->add_option("--threads", rf.threads)->capture_default_str();
  ref->add_option("--envelope-tol", rf.envelope_tol)->capture_default_str();
  ref->add_option("--out", rf.out)->capture_default_str();

  auto* val = app.add_subcommand("validate", "Run the invariant suite");

  std::string manifest, replay_out;
  auto* rep = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  rep->add_option("manifest", manifest)->required();
  rep->add_option("--out", replay_out, "override the output path");

  std::vector<const char*> cargv;
  std::vector<std::string> full{"lltomo"};
  full.insert(full.end(), argv.begin(), argv.end());
  for (const auto& s : full) cargv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  const RunInfo info{argv};
  try {
    if (*tom) return cmd_tomogram(ta, info);
    if (*trn) return cmd_transition(tr, info);
    if (*ref) return cmd_reflection(rf, info);
    if (*val) return cmd_validate();
    if (*rep) return cmd_replay(manifest, replay_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BudgetError& e) {
    std::cerr << "budget: " << e.what() << " (achieved " << e.achieved() << ")\n";
    return kExitBudget;
  } catch (const ResolutionError& e) {
    std::cerr << "budget: " << e.what() << " (need " << e.required_points() << " points)\n";
    return kExitBudget;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitBudget;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  return run(std::vector<std::string>(argv + 1, argv + argc));
}

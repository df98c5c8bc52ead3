#include "lltomo/radon.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "lltomo/special_fn.hpp"

namespace lltomo {

namespace {

using std::numbers::pi;
bool is_pow2(std::size_t n) { return n >= 8 && (n & (n - 1)) == 0; }

std::size_t next_pow2(double v) {
  std::size_t n = 8;
  while (static_cast<double>(n) < v) n *= 2;
  return n;
}

// FFTW planning is not reentrant.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

void fft_inplace(std::vector<cplx>& data, int rank, const int* dims, int sign) {
  fftw_complex* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft(rank, dims, p, p, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(plan);
}

void check_edges_1d(const std::vector<cplx>& s) {
  double peak = 0.0;
  for (const auto& v : s) peak = std::max(peak, std::abs(v));
  const double edge = std::max(std::abs(s.front()), std::abs(s.back()));
  if (!(peak > 0.0) || edge >= kEdgeFraction * peak) {
    throw ValidationError("wave-function grid does not cover the state's support");
  }
}

// Exact evaluation of the trigonometric polynomial T(θ) = Σ_{m<M} c_m e^{-iθm}
// from its M equispaced samples T_p = T(2πp/M) (Dirichlet kernel):
//   T(θ) = A(θ) Σ_p b_p / d_p(θ),  b_p = T_p e^{-iπp/M},
// with real denominators d_p, so the twisted samples b_p are precomputed.
class DirichletInterp {
 public:
  explicit DirichletInterp(std::size_t M) : M_(M), c_(2 * M), s_(2 * M) {
    for (std::size_t k = 0; k < 2 * M; ++k) {
      const double j = static_cast<double>(k) - static_cast<double>(M);
      c_[k] = std::cos(pi * j / static_cast<double>(M));
      s_[k] = std::sin(pi * j / static_cast<double>(M));
    }
  }

  static cplx twist(std::size_t p, std::size_t M) {
    return std::polar(1.0, -pi * static_cast<double>(p) / static_cast<double>(M));
  }

  struct Kernel {
    std::size_t hit;  // node index when θ sits on a node, else M
    cplx A;
  };

  // Fills inv[p] = 1 / d_p(θ).
  Kernel weights(double theta, std::vector<double>& inv) const {
    const double Md = static_cast<double>(M_);
    const double p0r = std::round(theta * Md / (2.0 * pi));
    const double d0 = theta - 2.0 * pi * p0r / Md;
    long long p0 = static_cast<long long>(p0r) % static_cast<long long>(M_);
    if (p0 < 0) p0 += static_cast<long long>(M_);
    if (std::abs(Md * d0 * 0.5) < 1e-15) return {static_cast<std::size_t>(p0), cplx{1.0}};
    const cplx A = std::polar(1.0, -d0 * (Md - 1.0) * 0.5) * std::sin(Md * d0 * 0.5) / Md *
                   std::polar(1.0, pi * static_cast<double>(p0) / Md);
    const double sh = std::sin(0.5 * d0), ch = std::cos(0.5 * d0);
    inv.resize(M_);
    const double* c = c_.data() + M_ + p0;
    const double* s = s_.data() + M_ + p0;
    for (std::size_t p = 0; p < M_; ++p) {
      const std::ptrdiff_t j = -static_cast<std::ptrdiff_t>(p);
      inv[p] = 1.0 / (sh * c[j] + ch * s[j]);
    }
    return {M_, A};
  }

 private:
  std::size_t M_;
  std::vector<double> c_, s_;
};

const DirichletInterp& interp_for(std::size_t M) {
  thread_local std::map<std::size_t, DirichletInterp> cache;
  return cache.try_emplace(M, M).first->second;
}

cplx dot_real(const cplx* b, const double* w, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += b[i].real() * w[i];
    im += b[i].imag() * w[i];
  }
  return {re, im};
}

struct Chirp {
  double mu, nu;
};

void check_resolution(const Grid1D& g, const Chirp& c, const char* what) {
  if (c.nu == 0.0) throw ResolutionError(std::string(what) + ": nu must be nonzero", 0);
  const double per_cell = std::abs(c.mu) * g.extent() * g.dx() / std::abs(c.nu);
  if (per_cell >= pi / 4.0) {
    const double need = 4.0 * std::abs(c.mu) * g.extent() * (g.x_max - g.x_min) /
                        (pi * std::abs(c.nu));
    throw ResolutionError(std::string(what) + ": grid does not resolve the chirp",
                          next_pow2(need * 1.0001));
  }
}

void check_band(const Grid1D& g, double k, const char* what) {
  if (std::abs(k) * g.dx() >= pi) {
    const double need = std::abs(k) * (g.x_max - g.x_min) / pi;
    throw ResolutionError(std::string(what) + ": X / nu lies outside the grid's band",
                          next_pow2(need * 1.0001));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Grids

double Grid1D::extent() const { return std::max(std::abs(x_min), std::abs(x_max)); }

void Grid1D::validate() const {
  if (!is_pow2(n)) throw ValidationError("grid size must be a power of two >= 8");
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw ValidationError("grid bounds must satisfy x_min < x_max");
  }
}

WavefunctionGrid1D::WavefunctionGrid1D(Grid1D grid, std::vector<cplx> samples)
    : grid_(grid), samples_(std::move(samples)) {
  grid_.validate();
  if (samples_.size() != grid_.n) throw ValidationError("sample count does not match the grid");
  check_edges_1d(samples_);
}

WavefunctionGrid1D WavefunctionGrid1D::sample(const std::function<cplx(double)>& psi,
                                              Grid1D grid) {
  grid.validate();
  std::vector<cplx> s(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) s[i] = psi(grid.x(i));
  return WavefunctionGrid1D(grid, std::move(s));
}

WavefunctionGrid1D WavefunctionGrid1D::upsampled(std::size_t n) const {
  const std::size_t m = grid_.n;
  if (n < m || !is_pow2(n)) throw ValidationError("upsampling target must be a larger power of two");
  std::vector<cplx> spec = samples_;
  int dm = static_cast<int>(m);
  fft_inplace(spec, 1, &dm, FFTW_FORWARD);
  std::vector<cplx> big(n, cplx{0.0});
  const std::size_t half = m / 2;
  for (std::size_t k = 0; k < half; ++k) big[k] = spec[k];
  for (std::size_t k = half + 1; k < m; ++k) big[n - m + k] = spec[k];
  // The Nyquist bin is split between ±m/2.
  big[half] = 0.5 * spec[half];
  big[n - half] = 0.5 * spec[half];
  int dn = static_cast<int>(n);
  fft_inplace(big, 1, &dn, FFTW_BACKWARD);
  for (auto& v : big) v /= static_cast<double>(m);
  Grid1D g = grid_;
  g.n = n;
  return WavefunctionGrid1D(g, std::move(big));
}

WavefunctionGrid1D WavefunctionGrid1D::momentum(const Grid1D& pgrid) const {
  pgrid.validate();
  std::vector<cplx> out(pgrid.n);
  const double scale = grid_.dx() / std::sqrt(2.0 * pi);
  for (std::size_t j = 0; j < pgrid.n; ++j) {
    const double p = pgrid.x(j);
    cplx acc{0.0};
    for (std::size_t m = 0; m < grid_.n; ++m) acc += samples_[m] * std::polar(1.0, -p * grid_.x(m));
    out[j] = acc * scale;
  }
  return WavefunctionGrid1D(pgrid, std::move(out));
}

WavefunctionGrid::WavefunctionGrid(Grid1D gx, Grid1D gy, std::vector<cplx> samples,
                                   std::function<cplx(double, double)> exact)
    : gx_(gx), gy_(gy), samples_(std::move(samples)), exact_(std::move(exact)) {
  gx_.validate();
  gy_.validate();
  if (samples_.size() != gx_.n * gy_.n) {
    throw ValidationError("sample count does not match the grid");
  }
  double peak = 0.0, edge = 0.0;
  for (std::size_t ix = 0; ix < gx_.n; ++ix) {
    for (std::size_t iy = 0; iy < gy_.n; ++iy) {
      const double a = std::abs(at(ix, iy));
      peak = std::max(peak, a);
      if (ix == 0 || iy == 0 || ix + 1 == gx_.n || iy + 1 == gy_.n) edge = std::max(edge, a);
    }
  }
  if (!(peak > 0.0) || edge >= kEdgeFraction * peak) {
    throw ValidationError("wave-function grid does not cover the state's support");
  }
}

WavefunctionGrid WavefunctionGrid::sample(const std::function<cplx(double, double)>& psi,
                                          Grid1D gx, Grid1D gy) {
  gx.validate();
  gy.validate();
  std::vector<cplx> s(gx.n * gy.n);
  for (std::size_t ix = 0; ix < gx.n; ++ix)
    for (std::size_t iy = 0; iy < gy.n; ++iy) s[ix * gy.n + iy] = psi(gx.x(ix), gy.x(iy));
  return WavefunctionGrid(gx, gy, std::move(s), psi);
}

cplx WavefunctionGrid::operator()(double x, double y) const {
  if (exact_) return exact_(x, y);
  const auto idx = [](const Grid1D& g, double v) {
    const double r = std::round((v - g.x_min) / g.dx());
    return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(g.n - 1)));
  };
  return at(idx(gx_, x), idx(gy_, y));
}

WavefunctionGrid WavefunctionGrid::momentum(int axis) const {
  using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Grid1D& g = axis == 0 ? gx_ : gy_;
  Mat E(g.n, g.n);
  const double scale = g.dx() / std::sqrt(2.0 * pi);
  for (std::size_t j = 0; j < g.n; ++j)
    for (std::size_t m = 0; m < g.n; ++m) E(j, m) = std::polar(scale, -g.x(j) * g.x(m));
  Eigen::Map<const Mat> psi(samples_.data(), gx_.n, gy_.n);
  Mat out = axis == 0 ? Mat(E * psi) : Mat(psi * E.transpose());
  std::vector<cplx> s(out.data(), out.data() + out.size());
  return WavefunctionGrid(gx_, gy_, std::move(s));
}

void WavefunctionGrid::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open '" + path + "' for writing");
  os << "# x y re_psi im_psi\n";
  os.precision(17);
  for (std::size_t ix = 0; ix < gx_.n; ++ix)
    for (std::size_t iy = 0; iy < gy_.n; ++iy) {
      const cplx v = at(ix, iy);
      os << gx_.x(ix) << ' ' << gy_.x(iy) << ' ' << v.real() << ' ' << v.imag() << '\n';
    }
}

WavefunctionGrid WavefunctionGrid::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open '" + path + "'");
  std::vector<double> xs, ys;
  std::vector<cplx> vals;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double x, y, re, im;
    if (!(ss >> x >> y >> re >> im)) throw ValidationError("malformed line in '" + path + "'");
    xs.push_back(x);
    ys.push_back(y);
    vals.emplace_back(re, im);
  }
  if (vals.empty()) throw ValidationError("no samples in '" + path + "'");
  std::vector<double> ux = xs, uy = ys;
  std::sort(ux.begin(), ux.end());
  ux.erase(std::unique(ux.begin(), ux.end()), ux.end());
  std::sort(uy.begin(), uy.end());
  uy.erase(std::unique(uy.begin(), uy.end()), uy.end());
  if (ux.size() * uy.size() != vals.size() || ux.size() < 2 || uy.size() < 2) {
    throw ValidationError("samples in '" + path + "' do not form a full grid");
  }
  auto geometry = [](const std::vector<double>& u) {
    const double d = (u.back() - u.front()) / static_cast<double>(u.size() - 1);
    return Grid1D{u.front(), u.front() + d * static_cast<double>(u.size()), u.size()};
  };
  const Grid1D gx = geometry(ux), gy = geometry(uy);
  std::vector<cplx> s(vals.size());
  for (std::size_t k = 0; k < vals.size(); ++k) {
    const auto ix = static_cast<std::size_t>(std::lower_bound(ux.begin(), ux.end(), xs[k]) - ux.begin());
    const auto iy = static_cast<std::size_t>(std::lower_bound(uy.begin(), uy.end(), ys[k]) - uy.begin());
    s[ix * gy.n + iy] = vals[k];
  }
  return WavefunctionGrid(gx, gy, std::move(s));
}

// ---------------------------------------------------------------------------
// Frame transforms

FrameTransform1D::FrameTransform1D(const WavefunctionGrid1D& psi, double mu, double nu)
    : mu_(mu), nu_(nu) {
  const Grid1D& g = psi.grid();
  check_resolution(g, {mu, nu}, "1d tomogram");
  n_ = g.n;
  y0_ = g.x_min;
  dx_ = g.dx();
  scale_ = dx_ * dx_ / (2.0 * pi * std::abs(nu));
  spectrum_.assign(2 * n_, cplx{0.0});
  for (std::size_t m = 0; m < n_; ++m) {
    const double y = g.x(m);
    spectrum_[m] = psi.samples()[m] * std::polar(1.0, mu * y * y / (2.0 * nu));
  }
  const int M = static_cast<int>(2 * n_);
  fft_inplace(spectrum_, 1, &M, FFTW_FORWARD);
  for (std::size_t p = 0; p < 2 * n_; ++p) spectrum_[p] *= DirichletInterp::twist(p, 2 * n_);
}

double FrameTransform1D::operator()(double X) const {
  const double k = X / nu_;
  check_band(Grid1D{y0_, y0_ + dx_ * static_cast<double>(n_), n_}, k, "1d tomogram");
  const std::size_t M = 2 * n_;
  thread_local std::vector<double> w;
  const auto K = interp_for(M).weights(k * dx_, w);
  // Only |T| is needed, so unit phases are dropped.
  const cplx T = K.hit < M ? spectrum_[K.hit] : K.A * dot_real(spectrum_.data(), w.data(), M);
  return std::norm(T) * scale_;
}

FrameTransform2D::FrameTransform2D(const WavefunctionGrid& psi, double mu1, double nu1,
                                   double mu2, double nu2)
    : nu1_(nu1), nu2_(nu2) {
  const Grid1D &gx = psi.gx(), &gy = psi.gy();
  check_resolution(gx, {mu1, nu1}, "2d tomogram");
  check_resolution(gy, {mu2, nu2}, "2d tomogram");
  nx_ = gx.n;
  ny_ = gy.n;
  x0_ = gx.x_min;
  y0_ = gy.x_min;
  dx_ = gx.dx();
  dy_ = gy.dx();
  scale_ = std::pow(dx_ * dy_, 2) / (4.0 * pi * pi * std::abs(nu1 * nu2));
  const std::size_t M1 = 2 * nx_, M2 = 2 * ny_;
  spectrum_.assign(M1 * M2, cplx{0.0});
  std::vector<cplx> cy(ny_);
  for (std::size_t iy = 0; iy < ny_; ++iy) {
    const double y = gy.x(iy);
    cy[iy] = std::polar(1.0, mu2 * y * y / (2.0 * nu2));
  }
  for (std::size_t ix = 0; ix < nx_; ++ix) {
    const double x = gx.x(ix);
    const cplx cx = std::polar(1.0, mu1 * x * x / (2.0 * nu1));
    for (std::size_t iy = 0; iy < ny_; ++iy) spectrum_[ix * M2 + iy] = psi.at(ix, iy) * cx * cy[iy];
  }
  const int dims[2] = {static_cast<int>(M1), static_cast<int>(M2)};
  fft_inplace(spectrum_, 2, dims, FFTW_FORWARD);
  std::vector<cplx> t2(M2);
  for (std::size_t q = 0; q < M2; ++q) t2[q] = DirichletInterp::twist(q, M2);
  for (std::size_t p = 0; p < M1; ++p) {
    const cplx t1 = DirichletInterp::twist(p, M1);
    for (std::size_t q = 0; q < M2; ++q) spectrum_[p * M2 + q] *= t1 * t2[q];
  }
}

double FrameTransform2D::operator()(double X1, double X2) const {
  const double k1 = X1 / nu1_, k2 = X2 / nu2_;
  check_band(Grid1D{x0_, x0_ + dx_ * static_cast<double>(nx_), nx_}, k1, "2d tomogram");
  check_band(Grid1D{y0_, y0_ + dy_ * static_cast<double>(ny_), ny_}, k2, "2d tomogram");
  const std::size_t M1 = 2 * nx_, M2 = 2 * ny_;
  thread_local std::vector<double> w1, w2;
  const auto K1 = interp_for(M1).weights(k1 * dx_, w1);
  const auto K2 = interp_for(M2).weights(k2 * dy_, w2);
  auto row = [&](std::size_t p) {
    const cplx* r = spectrum_.data() + p * M2;
    return K2.hit < M2 ? r[K2.hit] : dot_real(r, w2.data(), M2);
  };
  cplx T{0.0};
  if (K1.hit < M1) {
    T = row(K1.hit);
  } else {
    double re = 0.0, im = 0.0;
    for (std::size_t p = 0; p < M1; ++p) {
      const cplx v = row(p);
      re += v.real() * w1[p];
      im += v.imag() * w1[p];
    }
    T = cplx{re, im};
  }
  return std::norm(K1.A * K2.A * T) * scale_;
}

Radon2D::Radon2D(WavefunctionGrid psi) {
  WavefunctionGrid m0 = psi.momentum(0);
  WavefunctionGrid m1 = psi.momentum(1);
  WavefunctionGrid m01 = m0.momentum(1);
  reps_ = {std::move(psi), std::move(m0), std::move(m1), std::move(m01)};
}

FrameTransform2D Radon2D::frame(double mu1, double nu1, double mu2, double nu2) const {
  // Axis j in momentum representation: X_j = ν_j Q' − μ_j P'.
  const bool s1 = std::abs(mu1) > std::abs(nu1);
  const bool s2 = std::abs(mu2) > std::abs(nu2);
  const std::size_t idx = (s1 ? 1 : 0) + (s2 ? 2 : 0);
  return FrameTransform2D(reps_[idx], s1 ? nu1 : mu1, s1 ? -mu1 : nu1, s2 ? nu2 : mu2,
                          s2 ? -mu2 : nu2);
}

double Radon2D::operator()(double X1, double X2, double mu1, double nu1, double mu2,
                           double nu2) const {
  return frame(mu1, nu1, mu2, nu2)(X1, X2);
}

Radon1D::Radon1D(WavefunctionGrid1D psi)
    : pos_(psi), mom_(psi.momentum(psi.grid())) {}

FrameTransform1D Radon1D::frame(double mu, double nu) const {
  if (std::abs(mu) > std::abs(nu)) return FrameTransform1D(mom_, nu, -mu);
  return FrameTransform1D(pos_, mu, nu);
}

double Radon1D::operator()(double X, double mu, double nu) const { return frame(mu, nu)(X); }

double tomogram_from_wavefunction_2d(const WavefunctionGrid& psi, double X1, double X2,
                                     double mu1, double nu1, double mu2, double nu2) {
  return FrameTransform2D(psi, mu1, nu1, mu2, nu2)(X1, X2);
}

double tomogram_from_wavefunction_1d(const WavefunctionGrid1D& psi, double X, double mu,
                                     double nu) {
  return FrameTransform1D(psi, mu, nu)(X);
}

// ---------------------------------------------------------------------------
// 1D oscillator

cplx oscillator_wavefunction_1d(int n, double x) {
  const double norm = std::exp(-0.5 * log_factorial(n)) / std::pow(pi, 0.25);
  return norm * hermite_he(n, std::sqrt(2.0) * x) * std::exp(-0.5 * x * x);
}

double oscillator_tomogram_1d(int n, double X, double mu, double nu) {
  const double s2 = mu * mu + nu * nu;
  if (!(s2 > 0.0)) throw DomainError("oscillator tomogram: (mu, nu) must not vanish");
  const double s = std::sqrt(s2);
  const double he = hermite_he(n, std::sqrt(2.0) * X / s);
  return std::exp(-X * X / s2 - log_factorial(n)) / (std::sqrt(pi) * s) * he * he;
}

// ---------------------------------------------------------------------------
// Density grids

double DensityGrid::trace() const { return rho.diagonal().real().sum() * grid.dx(); }

void DensityGrid::validate() const {
  grid.validate();
  if (rho.rows() != static_cast<Eigen::Index>(grid.n) || rho.cols() != rho.rows()) {
    throw ValidationError("density matrix does not match its grid");
  }
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-8) throw ValidationError("density matrix is not Hermitian");
  if (std::abs(trace() - 1.0) > 1e-6) throw ValidationError("density matrix trace is not 1");
  if (rho.diagonal().real().minCoeff() < -1e-8) {
    throw ValidationError("density matrix has a negative diagonal entry");
  }
}

DensityGrid DensityGrid::from_states(const Grid1D& grid, const std::vector<double>& weights,
                                     const std::vector<std::function<cplx(double)>>& states) {
  grid.validate();
  if (weights.size() != states.size()) throw ValidationError("one weight per state required");
  DensityGrid d{grid, Eigen::MatrixXcd::Zero(grid.n, grid.n)};
  for (std::size_t k = 0; k < states.size(); ++k) {
    Eigen::VectorXcd v(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) v(i) = states[k](grid.x(i));
    d.rho += weights[k] * v * v.adjoint();
  }
  return d;
}

DensityTomogram1D::DensityTomogram1D(const DensityGrid& rho, std::size_t fine_points) {
  const double dx = rho.grid.dx();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.rho * dx);
  const Eigen::VectorXd lam = es.eigenvalues();
  const double top = lam.maxCoeff();
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam(k) <= 1e-12 * top) continue;
    std::vector<cplx> s(rho.grid.n);
    for (std::size_t i = 0; i < rho.grid.n; ++i) s[i] = es.eigenvectors()(i, k) / std::sqrt(dx);
    weights_.push_back(lam(k));
    components_.emplace_back(WavefunctionGrid1D(rho.grid, std::move(s)).upsampled(fine_points));
  }
}

void DensityTomogram1D::operator()(double mu, double nu, std::span<const double> X,
                                   std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const FrameTransform1D f = components_[c].frame(mu, nu);
    for (std::size_t i = 0; i < X.size(); ++i) out[i] += weights_[c] * f(X[i]);
  }
}

double DensityTomogram1D::operator()(double X, double mu, double nu) const {
  double out = 0.0;
  (*this)(mu, nu, std::span<const double>(&X, 1), std::span<double>(&out, 1));
  return out;
}

DensityGrid density_from_tomogram_1d(const TomogramFn& w, const Grid1D& grid,
                                     const InversionOptions& opt) {
  return density_from_tomogram_1d(
      [&](double mu, double nu, std::span<const double> X, std::span<double> out) {
        for (std::size_t i = 0; i < X.size(); ++i) out[i] = w(X[i], mu, nu);
      },
      grid, opt);
}

DensityGrid density_from_tomogram_1d(const TomogramBatch& w, const Grid1D& grid,
                                     const InversionOptions& opt) {
  grid.validate();
  if (opt.n_u < 3 || opt.n_mu < 3) throw DomainError("inversion needs at least 3 nodes per axis");
  const std::size_t n = grid.n;
  const double dx = grid.dx();
  const double du = 2.0 * opt.u_max / static_cast<double>(opt.n_u - 1);
  const double dmu = 2.0 * opt.mu_max / static_cast<double>(opt.n_mu - 1);
  std::vector<double> u(opt.n_u), X(opt.n_u), vals(opt.n_u);
  for (std::size_t i = 0; i < opt.n_u; ++i) u[i] = -opt.u_max + du * static_cast<double>(i);

  // Trapezoid weights (endpoints are in the Gaussian tail anyway).
  auto tw = [](std::size_t i, std::size_t m) { return (i == 0 || i + 1 == m) ? 0.5 : 1.0; };

  // χ(μ, ν) = ∫ w(X, μ, ν) e^{iX} dX = s ∫ w(s u, μ, ν) e^{i s u} du.
  auto chi = [&](double mu, double nu, double* mass) {
    const double s = std::hypot(mu, nu);
    for (std::size_t i = 0; i < opt.n_u; ++i) X[i] = s * u[i];
    w(mu, nu, X, vals);
    cplx acc{0.0};
    double m = 0.0;
    for (std::size_t i = 0; i < opt.n_u; ++i) {
      const double f = tw(i, opt.n_u) * vals[i] * s * du;
      acc += f * std::polar(1.0, X[i]);
      m += f;
    }
    if (mass) *mass = m;
    return acc;
  };

  // Input checks: normalization on a few frames, homogeneity on a few points.
  for (auto [mu, nu] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {0.6, 0.8}, {-1.3, 0.4}}) {
    double mass = 0.0;
    chi(mu, nu, &mass);
    if (std::abs(mass - 1.0) > opt.normalization_tol) {
      throw ValidationError("tomogram is not normalized (mass " + std::to_string(mass) + ")");
    }
  }
  for (auto [Xs, mu, nu] : {std::tuple{0.3, 0.6, 0.8}, {-0.7, 1.1, -0.2}}) {
    double a = 0.0, b = 0.0;
    const double x1 = Xs, x2 = 2.0 * Xs;
    w(mu, nu, std::span<const double>(&x1, 1), std::span<double>(&a, 1));
    w(2.0 * mu, 2.0 * nu, std::span<const double>(&x2, 1), std::span<double>(&b, 1));
    if (std::abs(2.0 * b - a) > 1e-6 * std::max(a, 1e-3)) {
      throw ValidationError("tomogram is not homogeneous");
    }
  }

  DensityGrid out{grid, Eigen::MatrixXcd::Zero(n, n)};
  const long long nn = static_cast<long long>(n);
  // ρ(x_i, x_j) = (1/2π) ∫ χ(μ, x_i − x_j) e^{−iμ(x_i + x_j)/2} dμ; the ν < 0
  // half follows from Hermiticity.
  for (long long d = 0; d < nn; ++d) {
    const double nu = static_cast<double>(d) * dx;
    std::vector<cplx> chis(opt.n_mu);
    std::vector<double> mus(opt.n_mu);
    for (std::size_t k = 0; k < opt.n_mu; ++k) {
      mus[k] = -opt.mu_max + dmu * static_cast<double>(k);
      chis[k] = (mus[k] == 0.0 && nu == 0.0) ? cplx{1.0} : chi(mus[k], nu, nullptr);
    }
    for (long long j = 0; j + d < nn; ++j) {
      const long long i = j + d;
      const double xbar = 0.5 * (grid.x(static_cast<std::size_t>(i)) + grid.x(static_cast<std::size_t>(j)));
      cplx acc{0.0};
      for (std::size_t k = 0; k < opt.n_mu; ++k) {
        acc += tw(k, opt.n_mu) * chis[k] * std::polar(1.0, -mus[k] * xbar);
      }
      acc *= dmu / (2.0 * pi);
      out.rho(i, j) = acc;
      out.rho(j, i) = std::conj(acc);
    }
  }
  // Diagonal entries are real by construction up to rounding.
  for (std::size_t i = 0; i < n; ++i) out.rho(i, i) = out.rho(i, i).real();
  return out;
}

}  // namespace lltomo

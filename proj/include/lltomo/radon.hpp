#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lltomo/error.hpp"

namespace lltomo {

using cplx = std::complex<double>;

// Uniform periodic-style grid: x_i = x_min + i (x_max - x_min) / n, i < n.
struct Grid1D {
  double x_min = -8.0;
  double x_max = 8.0;
  std::size_t n = 256;

  double dx() const { return (x_max - x_min) / static_cast<double>(n); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
  double extent() const;  // max |x| over the interval
  void validate() const;  // n a power of two >= 8, x_max > x_min
};

// Edge amplitude must stay below this fraction of the peak.
inline constexpr double kEdgeFraction = 1e-8;

class WavefunctionGrid1D {
 public:
  WavefunctionGrid1D(Grid1D grid, std::vector<cplx> samples);
  static WavefunctionGrid1D sample(const std::function<cplx(double)>& psi, Grid1D grid);

  const Grid1D& grid() const { return grid_; }
  const std::vector<cplx>& samples() const { return samples_; }

  // Band-limited resampling onto a finer grid over the same interval.
  WavefunctionGrid1D upsampled(std::size_t n) const;
  // φ(p) = (2π)^{-1/2} ∫ ψ(y) e^{-ipy} dy on `pgrid`.
  WavefunctionGrid1D momentum(const Grid1D& pgrid) const;

 private:
  Grid1D grid_;
  std::vector<cplx> samples_;
};

// samples[ix * ny + iy] = ψ(x_ix, y_iy).
class WavefunctionGrid {
 public:
  WavefunctionGrid(Grid1D gx, Grid1D gy, std::vector<cplx> samples,
                   std::function<cplx(double, double)> exact = {});
  static WavefunctionGrid sample(const std::function<cplx(double, double)>& psi, Grid1D gx,
                                 Grid1D gy);

  const Grid1D& gx() const { return gx_; }
  const Grid1D& gy() const { return gy_; }
  const std::vector<cplx>& samples() const { return samples_; }
  cplx at(std::size_t ix, std::size_t iy) const { return samples_[ix * gy_.n + iy]; }
  // Exact callable when one was supplied, else the nearest sample.
  cplx operator()(double x, double y) const;

  // Momentum representation along axis 0 or 1, on the same grid geometry.
  WavefunctionGrid momentum(int axis) const;

  // Columnar text: "x y re im" per line, '#' comments.
  void save(const std::string& path) const;
  static WavefunctionGrid load(const std::string& path);

 private:
  Grid1D gx_, gy_;
  std::vector<cplx> samples_;
  std::function<cplx(double, double)> exact_;
};

// 1D symplectic tomogram w(X, μ, ν) = |∫ψ(y) e^{iμy²/2ν − iXy/ν} dy|² / (2π|ν|)
// for one frame; the chirped transform is computed once and evaluated at any X.
class FrameTransform1D {
 public:
  FrameTransform1D(const WavefunctionGrid1D& psi, double mu, double nu);
  double operator()(double X) const;

 private:
  double mu_, nu_, y0_, dx_, scale_;
  std::size_t n_;
  std::vector<cplx> spectrum_;  // zero-padded FFT of the chirped samples
};

// 2D analogue on a product frame.
class FrameTransform2D {
 public:
  FrameTransform2D(const WavefunctionGrid& psi, double mu1, double nu1, double mu2, double nu2);
  double operator()(double X1, double X2) const;

 private:
  double nu1_, nu2_, x0_, y0_, dx_, dy_, scale_;
  std::size_t nx_, ny_;
  std::vector<cplx> spectrum_;
};

// Holds a wave function in position and all mixed momentum representations;
// frames with |μ_j| > |ν_j| are evaluated in the representation where axis j
// is momentum, which keeps the chirp resolvable.
class Radon2D {
 public:
  explicit Radon2D(WavefunctionGrid psi);
  FrameTransform2D frame(double mu1, double nu1, double mu2, double nu2) const;
  double operator()(double X1, double X2, double mu1, double nu1, double mu2, double nu2) const;

 private:
  std::vector<WavefunctionGrid> reps_;  // index = swap1 + 2 * swap2
};

class Radon1D {
 public:
  explicit Radon1D(WavefunctionGrid1D psi);
  FrameTransform1D frame(double mu, double nu) const;
  double operator()(double X, double mu, double nu) const;

 private:
  WavefunctionGrid1D pos_, mom_;
};

// One-shot helpers (no momentum switching): the grid must resolve the chirp.
double tomogram_from_wavefunction_2d(const WavefunctionGrid& psi, double X1, double X2,
                                     double mu1, double nu1, double mu2, double nu2);
double tomogram_from_wavefunction_1d(const WavefunctionGrid1D& psi, double X, double mu,
                                     double nu);

// Closed-form 1D oscillator (unit frequency) Fock tomogram.
double oscillator_tomogram_1d(int n, double X, double mu, double nu);
cplx oscillator_wavefunction_1d(int n, double x);

// ρ(x_i, x_j) on a 1D grid; trace means Σ ρ(x_i, x_i) dx.
struct DensityGrid {
  Grid1D grid;
  Eigen::MatrixXcd rho;

  double trace() const;
  // Hermitian to 1e-8, trace 1 to 1e-6, diagonal >= -1e-8.
  void validate() const;
  static DensityGrid from_states(const Grid1D& grid, const std::vector<double>& weights,
                                 const std::vector<std::function<cplx(double)>>& states);
};

// Batch tomogram evaluation: fills out[i] = w(X[i], μ, ν).
using TomogramBatch =
    std::function<void(double mu, double nu, std::span<const double> X, std::span<double> out)>;
using TomogramFn = std::function<double(double X, double mu, double nu)>;

struct InversionOptions {
  double u_max = 12.0;   // X / sqrt(μ²+ν²) integration half-width
  std::size_t n_u = 241;
  double mu_max = 14.0;
  std::size_t n_mu = 141;
  double normalization_tol = 1e-6;
};

DensityGrid density_from_tomogram_1d(const TomogramBatch& w, const Grid1D& grid,
                                     const InversionOptions& opt = {});
DensityGrid density_from_tomogram_1d(const TomogramFn& w, const Grid1D& grid,
                                     const InversionOptions& opt = {});

// Forward map ρ → w: a mixture of the eigenvectors of ρ, each band-limited
// upsampled to `fine_points` and transformed numerically.
class DensityTomogram1D {
 public:
  explicit DensityTomogram1D(const DensityGrid& rho, std::size_t fine_points = 512);
  void operator()(double mu, double nu, std::span<const double> X, std::span<double> out) const;
  double operator()(double X, double mu, double nu) const;

 private:
  std::vector<double> weights_;
  std::vector<Radon1D> components_;
};

}  // namespace lltomo

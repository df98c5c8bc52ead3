#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "lltomo/error.hpp"
#include "lltomo/numerics.hpp"

namespace lltomo {

// ---------------------------------------------------------------------------
// Poly2

Poly2::Poly2(int degree)
    : degree_(degree), c_(static_cast<std::size_t>((degree + 1) * (degree + 1)), cplx{0.0}) {}

Poly2 Poly2::constant(cplx c) {
  Poly2 p(0);
  p.c_[0] = c;
  return p;
}

Poly2 Poly2::linear(cplx c0, cplx c1, cplx c2) {
  Poly2 p(1);
  p.coef_ref(0, 0) = c0;
  p.coef_ref(1, 0) = c1;
  p.coef_ref(0, 1) = c2;
  return p;
}

cplx Poly2::coef(int i, int j) const {
  if (i < 0 || j < 0 || i + j > degree_) return cplx{0.0};
  return c_[index(i, j)];
}

cplx& Poly2::coef_ref(int i, int j) { return c_[index(i, j)]; }

cplx Poly2::operator()(cplx z1, cplx z2) const {
  // Horner in z2 inside Horner in z1.
  cplx acc{0.0};
  for (int i = degree_; i >= 0; --i) {
    cplx inner{0.0};
    for (int j = degree_ - i; j >= 0; --j) inner = inner * z2 + c_[index(i, j)];
    acc = acc * z1 + inner;
  }
  return acc;
}

Poly2& Poly2::operator+=(const Poly2& o) {
  if (o.degree_ > degree_) {
    Poly2 grown(o.degree_);
    for (int i = 0; i <= degree_; ++i)
      for (int j = 0; i + j <= degree_; ++j) grown.coef_ref(i, j) = coef(i, j);
    *this = std::move(grown);
  }
  for (int i = 0; i <= o.degree_; ++i)
    for (int j = 0; i + j <= o.degree_; ++j) c_[index(i, j)] += o.c_[o.index(i, j)];
  return *this;
}

Poly2& Poly2::operator-=(const Poly2& o) {
  Poly2 neg = o;
  neg *= cplx{-1.0};
  return *this += neg;
}

Poly2& Poly2::operator*=(cplx s) {
  for (auto& c : c_) c *= s;
  return *this;
}

Poly2 operator*(const Poly2& a, const Poly2& b) {
  Poly2 out(a.degree_ + b.degree_);
  for (int i = 0; i <= a.degree_; ++i) {
    for (int j = 0; i + j <= a.degree_; ++j) {
      const cplx ca = a.c_[a.index(i, j)];
      if (ca == cplx{0.0}) continue;
      for (int k = 0; k <= b.degree_; ++k) {
        for (int l = 0; k + l <= b.degree_; ++l) {
          out.c_[out.index(i + k, j + l)] += ca * b.c_[b.index(k, l)];
        }
      }
    }
  }
  return out;
}

Poly2 Poly2::conj_coeffs() const {
  Poly2 out = *this;
  for (auto& c : out.c_) c = std::conj(c);
  return out;
}

Polynomial Poly2::terms() const {
  Polynomial out;
  for (int i = 0; i <= degree_; ++i) {
    for (int j = 0; i + j <= degree_; ++j) {
      const cplx c = c_[index(i, j)];
      if (c == cplx{0.0}) continue;
      Monomial m;
      m.exps = {static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j), 0, 0};
      m.coef = c;
      out.push_back(m);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian moments

namespace {

using MatC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using MatR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;

// sqrt(det Q) on the branch continuous from the real part of Q, whose
// determinant is positive.
cplx sqrt_det_continued(const MatC& Q) {
  const MatR re = Q.real();
  const MatR im = Q.imag();
  constexpr int steps = 64;
  double arg = 0.0;
  cplx prev = re.determinant();
  for (int s = 1; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    MatC qt = re.cast<cplx>() + cplx{0.0, t} * im.cast<cplx>();
    const cplx d = qt.determinant();
    arg += std::arg(d / prev);
    prev = d;
  }
  return std::sqrt(std::abs(prev)) * std::polar(1.0, 0.5 * arg);
}

}  // namespace

GaussianMoments::GaussianMoments(std::span<const cplx> Q, std::span<const cplx> u,
                                 std::size_t dim, int max_degree)
    : dim_(dim), max_degree_(max_degree) {
  if (dim == 0 || dim > 4) throw DomainError("gaussian moments support 1 to 4 dimensions");
  if (Q.size() != dim * dim || u.size() != dim) {
    throw DomainError("gaussian moments: Q must be dim x dim and u of length dim");
  }
  MatC q(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      q(i, j) = 0.5 * (Q[i * dim + j] + Q[j * dim + i]);
  Eigen::LLT<MatR> llt(q.real());
  if (llt.info() != Eigen::Success) {
    throw DomainError("gaussian moments: real part of Q is not positive definite");
  }
  const MatC qinv = q.inverse();
  Eigen::Matrix<cplx, Eigen::Dynamic, 1> uv(dim);
  for (std::size_t i = 0; i < dim; ++i) uv(i) = u[i];
  const Eigen::Matrix<cplx, Eigen::Dynamic, 1> z0 = 0.5 * (qinv * uv);
  const MatC C = 0.5 * qinv;

  const cplx m0 = std::pow(std::numbers::pi, 0.5 * static_cast<double>(dim)) /
                  sqrt_det_continued(q) *
                  std::exp(0.25 * (uv.transpose() * qinv * uv)(0, 0));

  std::size_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) total *= static_cast<std::size_t>(max_degree + 1);
  table_.assign(total, cplx{0.0});
  filled_.assign(total, false);

  std::array<int, 4> zero{};
  table_[flat(std::span<const int>(zero.data(), dim))] = m0;
  filled_[0] = true;

  // Fill by increasing total degree; each m is reached from m - e_i with the
  // first nonzero component i.
  std::vector<std::array<int, 4>> layer{zero};
  for (int deg = 0; deg < max_degree; ++deg) {
    std::vector<std::array<int, 4>> next;
    for (const auto& m : layer) {
      for (std::size_t i = 0; i < dim; ++i) {
        // Only extend along i if all components before i are zero, so each
        // multi-index is generated once.
        bool ok = true;
        for (std::size_t k = 0; k < i; ++k) ok = ok && m[k] == 0;
        if (!ok) continue;
        std::array<int, 4> mp = m;
        mp[i] += 1;
        cplx val = z0(i) * table_[flat(std::span<const int>(m.data(), dim))];
        for (std::size_t j = 0; j < dim; ++j) {
          if (m[j] == 0) continue;
          std::array<int, 4> mm = m;
          mm[j] -= 1;
          val += C(i, j) * static_cast<double>(m[j]) *
                 table_[flat(std::span<const int>(mm.data(), dim))];
        }
        const std::size_t idx = flat(std::span<const int>(mp.data(), dim));
        table_[idx] = val;
        filled_[idx] = true;
        next.push_back(mp);
      }
    }
    layer = std::move(next);
  }
}

std::size_t GaussianMoments::flat(std::span<const int> m) const {
  std::size_t idx = 0, stride = 1;
  for (std::size_t i = 0; i < dim_; ++i) {
    idx += static_cast<std::size_t>(m[i]) * stride;
    stride *= static_cast<std::size_t>(max_degree_ + 1);
  }
  return idx;
}

cplx GaussianMoments::operator()(std::span<const int> m) const {
  int deg = 0;
  for (std::size_t i = 0; i < dim_; ++i) deg += m[i];
  if (deg > max_degree_) throw DomainError("moment order exceeds the precomputed degree");
  return table_[flat(m)];
}

cplx GaussianMoments::integrate(const Polynomial& poly) const {
  cplx acc{0.0};
  std::array<int, 4> m{};
  for (const auto& term : poly) {
    for (std::size_t i = 0; i < 4; ++i) {
      if (i >= dim_ && term.exps[i] != 0) {
        throw DomainError("polynomial uses more variables than the Gaussian");
      }
      m[i] = term.exps[i];
    }
    acc += term.coef * (*this)(std::span<const int>(m.data(), dim_));
  }
  return acc;
}

cplx gaussian_poly_moment(std::span<const cplx> Q, std::span<const cplx> u,
                          const Polynomial& poly, std::size_t dim) {
  int deg = 0;
  for (const auto& t : poly) {
    int d = 0;
    for (auto e : t.exps) d += e;
    deg = std::max(deg, d);
  }
  return GaussianMoments(Q, u, dim, deg).integrate(poly);
}

}  // namespace lltomo

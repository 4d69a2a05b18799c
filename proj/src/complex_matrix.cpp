#include "mmv/complex_matrix.hpp"

#include <cmath>
#include <string>

#include "mmv/errors.hpp"

namespace mmv {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), re_(rows * cols, 0.0), im_(rows * cols, 0.0) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols,
                             std::vector<double> re, std::vector<double> im)
    : rows_(rows), cols_(cols), re_(std::move(re)), im_(std::move(im)) {
  if (re_.size() != rows * cols || im_.size() != rows * cols) {
    throw ContractViolation("ComplexMatrix: plane size does not match " +
                            std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!all_finite()) throw ContractViolation("ComplexMatrix: non-finite entry");
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out.re(i, i) = 1.0;
  return out;
}

std::vector<cplx> ComplexMatrix::row(std::size_t r) const {
  std::vector<cplx> out(cols_);
  for (std::size_t c = 0; c < cols_; ++c) out[c] = (*this)(r, c);
  return out;
}

void ComplexMatrix::set_row(std::size_t r, std::span<const cplx> values) {
  detail::require(values.size() == cols_, "set_row: length mismatch");
  for (std::size_t c = 0; c < cols_; ++c) set(r, c, values[c]);
}

std::vector<cplx> ComplexMatrix::col(std::size_t c) const {
  std::vector<cplx> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

double ComplexMatrix::squared_norm() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < re_.size(); ++i) s += re_[i] * re_[i] + im_[i] * im_[i];
  return s;
}

double ComplexMatrix::norm() const noexcept { return std::sqrt(squared_norm()); }

bool ComplexMatrix::all_finite() const noexcept {
  for (std::size_t i = 0; i < re_.size(); ++i) {
    if (!std::isfinite(re_[i]) || !std::isfinite(im_[i])) return false;
  }
  return true;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  detail::require(rows_ == other.rows_ && cols_ == other.cols_,
                  "ComplexMatrix +=: shape mismatch");
  for (std::size_t i = 0; i < re_.size(); ++i) {
    re_[i] += other.re_[i];
    im_[i] += other.im_[i];
  }
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  detail::require(rows_ == other.rows_ && cols_ == other.cols_,
                  "ComplexMatrix -=: shape mismatch");
  for (std::size_t i = 0; i < re_.size(); ++i) {
    re_[i] -= other.re_[i];
    im_[i] -= other.im_[i];
  }
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(double s) noexcept {
  for (auto& v : re_) v *= s;
  for (auto& v : im_) v *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(double s, ComplexMatrix a) { return a *= s; }

ComplexMatrix complex_matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ContractViolation("complex_matmul: inner dimensions " +
                            std::to_string(a.cols()) + " and " +
                            std::to_string(b.rows()) + " differ");
  }
  const std::size_t L = a.rows(), K = a.cols(), M = b.cols();
  ComplexMatrix out(L, M);
  auto are = a.re_plane(), aim = a.im_plane();
  auto bre = b.re_plane(), bim = b.im_plane();
  auto ore = out.re_plane(), oim = out.im_plane();
  for (std::size_t l = 0; l < L; ++l) {
    double* orow_re = &ore[l * M];
    double* orow_im = &oim[l * M];
    for (std::size_t k = 0; k < K; ++k) {
      const double xr = are[l * K + k], xi = aim[l * K + k];
      if (xr == 0.0 && xi == 0.0) continue;
      const double* brow_re = &bre[k * M];
      const double* brow_im = &bim[k * M];
      for (std::size_t m = 0; m < M; ++m) {
        orow_re[m] += xr * brow_re[m] - xi * brow_im[m];
        orow_im[m] += xi * brow_re[m] + xr * brow_im[m];
      }
    }
  }
  return out;
}

ComplexMatrix adjoint_matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ContractViolation("adjoint_matmul: row counts " +
                            std::to_string(a.rows()) + " and " +
                            std::to_string(b.rows()) + " differ");
  }
  const std::size_t L = a.rows(), N = a.cols(), M = b.cols();
  ComplexMatrix out(N, M);
  auto are = a.re_plane(), aim = a.im_plane();
  auto bre = b.re_plane(), bim = b.im_plane();
  auto ore = out.re_plane(), oim = out.im_plane();
  // out(n, m) = Σ_l conj(a(l, n)) b(l, m)
  for (std::size_t l = 0; l < L; ++l) {
    const double* brow_re = &bre[l * M];
    const double* brow_im = &bim[l * M];
    for (std::size_t n = 0; n < N; ++n) {
      const double xr = are[l * N + n], xi = -aim[l * N + n];
      double* orow_re = &ore[n * M];
      double* orow_im = &oim[n * M];
      for (std::size_t m = 0; m < M; ++m) {
        orow_re[m] += xr * brow_re[m] - xi * brow_im[m];
        orow_im[m] += xi * brow_re[m] + xr * brow_im[m];
      }
    }
  }
  return out;
}

ComplexMatrix matmul_adjoint(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.cols()) {
    throw ContractViolation("matmul_adjoint: column counts " +
                            std::to_string(a.cols()) + " and " +
                            std::to_string(b.cols()) + " differ");
  }
  const std::size_t R = a.rows(), C = b.rows(), K = a.cols();
  ComplexMatrix out(R, C);
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < C; ++j) {
      double sr = 0.0, si = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        const double ar = a.re(i, k), ai = a.im(i, k);
        const double br = b.re(j, k), bi = -b.im(j, k);
        sr += ar * br - ai * bi;
        si += ai * br + ar * bi;
      }
      out.re(i, j) = sr;
      out.im(i, j) = si;
    }
  }
  return out;
}

ComplexMatrix adjoint(const ComplexMatrix& a) {
  ComplexMatrix out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      out.re(c, r) = a.re(r, c);
      out.im(c, r) = -a.im(r, c);
    }
  }
  return out;
}

double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  detail::require(a.rows() == b.rows() && a.cols() == b.cols(),
                  "frobenius_distance: shape mismatch");
  double s = 0.0;
  auto ar = a.re_plane(), ai = a.im_plane(), br = b.re_plane(), bi = b.im_plane();
  for (std::size_t i = 0; i < ar.size(); ++i) {
    const double dr = ar[i] - br[i], di = ai[i] - bi[i];
    s += dr * dr + di * di;
  }
  return std::sqrt(s);
}

std::vector<double> column_squared_norms(const ComplexMatrix& a) {
  std::vector<double> out(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      out[c] += a.re(r, c) * a.re(r, c) + a.im(r, c) * a.im(r, c);
    }
  }
  return out;
}

}  // namespace mmv

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mmv {

using cplx = std::complex<double>;

/// Dense complex matrix stored as two row-major real planes.
///
/// The split layout mirrors the real-valued form of the measurement
/// equations and is what the `.cmat` interchange format serializes.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  /// Takes ownership of the planes; throws ContractViolation on a size
  /// mismatch or any non-finite entry.
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<double> re,
                std::vector<double> im);

  static ComplexMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return rows_ * cols_; }
  bool empty() const noexcept { return size() == 0; }

  double& re(std::size_t r, std::size_t c) { return re_[r * cols_ + c]; }
  double& im(std::size_t r, std::size_t c) { return im_[r * cols_ + c]; }
  double re(std::size_t r, std::size_t c) const { return re_[r * cols_ + c]; }
  double im(std::size_t r, std::size_t c) const { return im_[r * cols_ + c]; }

  cplx operator()(std::size_t r, std::size_t c) const {
    return {re(r, c), im(r, c)};
  }
  void set(std::size_t r, std::size_t c, cplx v) {
    re(r, c) = v.real();
    im(r, c) = v.imag();
  }

  std::span<double> re_plane() noexcept { return re_; }
  std::span<double> im_plane() noexcept { return im_; }
  std::span<const double> re_plane() const noexcept { return re_; }
  std::span<const double> im_plane() const noexcept { return im_; }

  std::vector<cplx> row(std::size_t r) const;
  void set_row(std::size_t r, std::span<const cplx> values);
  std::vector<cplx> col(std::size_t c) const;

  double squared_norm() const noexcept;
  double norm() const noexcept;
  bool all_finite() const noexcept;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(double s) noexcept;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> re_;
  std::vector<double> im_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(double s, ComplexMatrix a);

/// Split-form product: re = ReA·ReB − ImA·ImB, im = ImA·ReB + ReA·ImB.
ComplexMatrix complex_matmul(const ComplexMatrix& a, const ComplexMatrix& b);

/// Aᴴ·B without materializing the adjoint.
ComplexMatrix adjoint_matmul(const ComplexMatrix& a, const ComplexMatrix& b);

/// A·Bᴴ without materializing the adjoint.
ComplexMatrix matmul_adjoint(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix adjoint(const ComplexMatrix& a);

/// ‖A − B‖_F.
double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b);

/// Squared Euclidean norm of each column.
std::vector<double> column_squared_norms(const ComplexMatrix& a);

}  // namespace mmv

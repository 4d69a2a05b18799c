#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mmv/complex_matrix.hpp"

namespace mmv {

/// Real-stacked covariance sketch: b = [Re vec(Σ̂); Im vec(Σ̂)] and
/// Phi = [Re(A*⊙A); Im(A*⊙A)], so that b ≈ Phi·r with r(n) = ‖X_{n,:}‖²/M.
/// vec() stacks columns; column n of the lift is conj(a_n) ⊗ a_n = vec(a_n a_nᴴ).
struct CovarianceSystem {
  std::vector<double> b;    // 2L²
  std::vector<double> phi;  // 2L² × N, row-major
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t m = 0;

  std::size_t rows() const { return 2 * l * l; }
  double phi_at(std::size_t row, std::size_t col) const { return phi[row * n + col]; }
  /// Complex lift entry (A*⊙A)(row, col) for row < L².
  cplx lift(std::size_t row, std::size_t col) const {
    return {phi_at(row, col), phi_at(l * l + row, col)};
  }
};

/// With `noise_sigma2` set, σ²·vec(I) is subtracted from b.
CovarianceSystem build_system(const ComplexMatrix& y, const ComplexMatrix& a,
                              std::optional<double> noise_sigma2 = std::nullopt);

/// Φ·r in stacked form.
std::vector<double> apply_phi(const CovarianceSystem& sys, const std::vector<double>& r);

/// r(n) = ‖X_{n,:}‖²/M.
std::vector<double> signal_powers(const ComplexMatrix& x);

struct CovarianceResiduals {
  ComplexMatrix e1;  // (AXXᴴAᴴ − A·diag(‖X_n‖²)·Aᴴ)/M, the cross-device terms
  ComplexMatrix e2;  // (AXZᴴ + ZXᴴAᴴ + ZZᴴ)/M
};

CovarianceResiduals residual_terms(const ComplexMatrix& a, const ComplexMatrix& x,
                                   const ComplexMatrix& z);

struct NnLassoConfig {
  double lambda = 0.0;
  std::size_t max_sweeps = 200;
  /// Bound on the KKT residual, relative to max(1, ‖Φᵀb‖∞).
  double kkt_tol = 1e-6;
  /// Throw NnLassoError instead of returning an unconverged result at the cap.
  bool throw_on_cap = true;
};

class NnLassoError : public std::runtime_error {
 public:
  NnLassoError(std::size_t sweeps, double kkt);
  double kkt_residual() const noexcept { return kkt_; }
  std::size_t sweeps() const noexcept { return sweeps_; }

 private:
  std::size_t sweeps_;
  double kkt_;
};

struct NnLassoResult {
  std::vector<double> r;
  std::size_t sweeps = 0;
  double kkt_residual = 0.0;  // absolute
  bool converged = false;
};

/// Coordinate descent for min ½‖Phi r − b‖² + λ‖r‖₁ s.t. r ⪰ 0.
NnLassoResult solve_nn_lasso(const CovarianceSystem& sys, const NnLassoConfig& config);

/// Absolute KKT residual of `r` for the nonnegative LASSO.
double nn_lasso_kkt(const CovarianceSystem& sys, const std::vector<double>& r, double lambda);

double nn_lasso_objective(const CovarianceSystem& sys, const std::vector<double>& r,
                          double lambda);

}  // namespace mmv

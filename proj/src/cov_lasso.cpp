#include "mmv/cov_lasso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmv/errors.hpp"
#include "mmv/map.hpp"

namespace mmv {

namespace {

struct Normal {
  std::vector<double> gram;  // ΦᵀΦ, N×N
  std::vector<double> rhs;   // Φᵀb
};

Normal normal_equations(const CovarianceSystem& sys) {
  const std::size_t N = sys.n, R = sys.rows();
  Normal out{std::vector<double>(N * N, 0.0), std::vector<double>(N, 0.0)};
  for (std::size_t row = 0; row < R; ++row) {
    const double* p = &sys.phi[row * N];
    const double bv = sys.b[row];
    for (std::size_t i = 0; i < N; ++i) {
      if (p[i] == 0.0) continue;
      out.rhs[i] += p[i] * bv;
      double* g = &out.gram[i * N];
      for (std::size_t j = 0; j < N; ++j) g[j] += p[i] * p[j];
    }
  }
  return out;
}

double kkt_from_gradient(const std::vector<double>& grad, const std::vector<double>& r,
                         double lambda) {
  double worst = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double gi = grad[i] + lambda;
    worst = std::max(worst, r[i] > 0.0 ? std::abs(gi) : std::max(0.0, -gi));
  }
  return worst;
}

}  // namespace

NnLassoError::NnLassoError(std::size_t sweeps, double kkt)
    : std::runtime_error("nonnegative LASSO did not converge in " + std::to_string(sweeps) +
                         " sweeps (KKT residual " + std::to_string(kkt) + ")"),
      sweeps_(sweeps),
      kkt_(kkt) {}

CovarianceSystem build_system(const ComplexMatrix& y, const ComplexMatrix& a,
                              std::optional<double> noise_sigma2) {
  detail::require(y.rows() == a.rows(), "build_system: Y and A row counts differ");
  const std::size_t L = a.rows(), N = a.cols(), L2 = L * L;
  CovarianceSystem sys;
  sys.n = N;
  sys.l = L;
  sys.m = y.cols();
  sys.b.assign(2 * L2, 0.0);
  sys.phi.assign(2 * L2 * N, 0.0);
  const ComplexMatrix cov = empirical_covariance(y);
  for (std::size_t j = 0; j < L; ++j) {
    for (std::size_t i = 0; i < L; ++i) {
      const std::size_t row = j * L + i;
      double re = cov.re(i, j);
      if (noise_sigma2 && i == j) re -= *noise_sigma2;
      sys.b[row] = re;
      sys.b[L2 + row] = cov.im(i, j);
      for (std::size_t n = 0; n < N; ++n) {
        const cplx v = std::conj(a(j, n)) * a(i, n);
        sys.phi[row * N + n] = v.real();
        sys.phi[(L2 + row) * N + n] = v.imag();
      }
    }
  }
  return sys;
}

std::vector<double> apply_phi(const CovarianceSystem& sys, const std::vector<double>& r) {
  detail::require(r.size() == sys.n, "apply_phi: r length != N");
  std::vector<double> out(sys.rows(), 0.0);
  for (std::size_t row = 0; row < sys.rows(); ++row) {
    double acc = 0.0;
    for (std::size_t n = 0; n < sys.n; ++n) acc += sys.phi[row * sys.n + n] * r[n];
    out[row] = acc;
  }
  return out;
}

std::vector<double> signal_powers(const ComplexMatrix& x) {
  std::vector<double> r(x.rows(), 0.0);
  for (std::size_t n = 0; n < x.rows(); ++n) {
    for (std::size_t m = 0; m < x.cols(); ++m) r[n] += std::norm(x(n, m));
    r[n] /= static_cast<double>(x.cols());
  }
  return r;
}

CovarianceResiduals residual_terms(const ComplexMatrix& a, const ComplexMatrix& x,
                                   const ComplexMatrix& z) {
  detail::require(a.cols() == x.rows() && a.rows() == z.rows() && x.cols() == z.cols(),
                  "residual_terms: shape mismatch");
  const double inv_m = 1.0 / static_cast<double>(x.cols());
  const ComplexMatrix ax = complex_matmul(a, x);
  CovarianceResiduals out;
  out.e1 = matmul_adjoint(ax, ax);
  out.e1 *= inv_m;
  ComplexMatrix diag_part = model_covariance(signal_powers(x), a, 0.0);
  out.e1 -= diag_part;

  out.e2 = matmul_adjoint(ax, z);
  out.e2 += matmul_adjoint(z, ax);
  out.e2 += matmul_adjoint(z, z);
  out.e2 *= inv_m;
  return out;
}

double nn_lasso_objective(const CovarianceSystem& sys, const std::vector<double>& r,
                          double lambda) {
  const auto fit = apply_phi(sys, r);
  double s = 0.0;
  for (std::size_t i = 0; i < fit.size(); ++i) s += (fit[i] - sys.b[i]) * (fit[i] - sys.b[i]);
  double l1 = 0.0;
  for (double v : r) l1 += std::abs(v);
  return 0.5 * s + lambda * l1;
}

double nn_lasso_kkt(const CovarianceSystem& sys, const std::vector<double>& r, double lambda) {
  const auto fit = apply_phi(sys, r);
  std::vector<double> grad(sys.n, 0.0);
  for (std::size_t row = 0; row < sys.rows(); ++row) {
    const double res = fit[row] - sys.b[row];
    for (std::size_t n = 0; n < sys.n; ++n) grad[n] += sys.phi[row * sys.n + n] * res;
  }
  return kkt_from_gradient(grad, r, lambda);
}

NnLassoResult solve_nn_lasso(const CovarianceSystem& sys, const NnLassoConfig& config) {
  detail::require(config.lambda >= 0.0, "solve_nn_lasso: lambda must be nonnegative");
  detail::require(config.max_sweeps >= 1, "solve_nn_lasso: max_sweeps must be at least 1");
  const std::size_t N = sys.n;
  const Normal ne = normal_equations(sys);
  for (std::size_t i = 0; i < N; ++i) {
    detail::require(ne.gram[i * N + i] > 0.0, "solve_nn_lasso: zero column in Phi");
  }
  double scale = 1.0;
  for (double v : ne.rhs) scale = std::max(scale, std::abs(v));
  const double tol = config.kkt_tol * scale;

  NnLassoResult out;
  out.r.assign(N, 0.0);
  // grad = Gr − Φᵀb
  std::vector<double> grad(N);
  for (std::size_t i = 0; i < N; ++i) grad[i] = -ne.rhs[i];
  out.kkt_residual = kkt_from_gradient(grad, out.r, config.lambda);
  if (out.kkt_residual <= tol) {
    out.converged = true;
    return out;
  }
  while (out.sweeps < config.max_sweeps) {
    for (std::size_t i = 0; i < N; ++i) {
      const double gii = ne.gram[i * N + i];
      const double next = std::max(0.0, out.r[i] - (grad[i] + config.lambda) / gii);
      const double delta = next - out.r[i];
      if (delta == 0.0) continue;
      out.r[i] = next;
      const double* gcol = &ne.gram[i * N];  // symmetric: row i == column i
      for (std::size_t j = 0; j < N; ++j) grad[j] += gcol[j] * delta;
    }
    ++out.sweeps;
    out.kkt_residual = kkt_from_gradient(grad, out.r, config.lambda);
    if (out.kkt_residual <= tol) {
      out.converged = true;
      return out;
    }
  }
  if (config.throw_on_cap) throw NnLassoError(out.sweeps, out.kkt_residual);
  return out;
}

}  // namespace mmv

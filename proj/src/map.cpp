#include "mmv/map.hpp"

#include <algorithm>
#include <cmath>

#include "eigen_bridge.hpp"
#include "mmv/errors.hpp"

namespace mmv {

namespace {

double prior_slope(const MapConfig& cfg, std::size_t n, std::size_t antennas) {
  if (cfg.variant == MapVariant::kMl) return 0.0;
  const double e = cfg.eps[n];
  return std::log(e / (1.0 - e)) / static_cast<double>(antennas);
}

// out = S·a for Hermitian S (L×L), a = column n of A.
void hermitian_times_column(const ComplexMatrix& s, const ComplexMatrix& a, std::size_t n,
                            std::vector<cplx>& out) {
  const std::size_t L = s.rows();
  out.assign(L, cplx{});
  for (std::size_t i = 0; i < L; ++i) {
    double sr = 0.0, si = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
      const double mr = s.re(i, j), mi = s.im(i, j);
      const double ar = a.re(j, n), ai = a.im(j, n);
      sr += mr * ar - mi * ai;
      si += mr * ai + mi * ar;
    }
    out[i] = {sr, si};
  }
}

// wᴴ·H·w for Hermitian H; imaginary part vanishes analytically.
double hermitian_form(const ComplexMatrix& h, const std::vector<cplx>& w) {
  const std::size_t L = h.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    cplx hw{};
    for (std::size_t j = 0; j < L; ++j) hw += h(i, j) * w[j];
    acc += (std::conj(w[i]) * hw).real();
  }
  return acc;
}

}  // namespace

MapConfig MapConfig::ml(double sigma2) {
  MapConfig cfg;
  cfg.variant = MapVariant::kMl;
  cfg.sigma2 = sigma2;
  return cfg;
}

MapConfig MapConfig::map(std::vector<double> eps, double sigma2) {
  MapConfig cfg;
  cfg.eps = std::move(eps);
  cfg.sigma2 = sigma2;
  return cfg;
}

void MapConfig::validate(std::size_t n) const {
  detail::require(sigma2 > 0.0, "MapConfig: sigma2 must be positive");
  detail::require(k_max >= 1, "MapConfig: k_max must be at least 1");
  if (variant == MapVariant::kMap) {
    detail::require(eps.size() == n, "MapConfig: eps length must equal N");
    for (double e : eps) {
      detail::require(e > 0.0 && e < 1.0, "MapConfig: eps(n) must lie in (0, 1)");
      detail::require(std::abs(e - 0.5) >= 1e-6,
                      "MapConfig: eps(n) = 1/2 is singular for the MAP step; use the ML variant");
    }
  }
}

ComplexMatrix empirical_covariance(const ComplexMatrix& y) {
  detail::require(y.cols() >= 1, "empirical_covariance: Y needs at least one column");
  const std::size_t L = y.rows(), M = y.cols();
  ComplexMatrix out(L, L);
  const double inv_m = 1.0 / static_cast<double>(M);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = i; j < L; ++j) {
      double re = 0.0, im = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        re += y.re(i, m) * y.re(j, m) + y.im(i, m) * y.im(j, m);
        im += y.im(i, m) * y.re(j, m) - y.re(i, m) * y.im(j, m);
      }
      out.re(i, j) = re * inv_m;
      out.im(i, j) = im * inv_m;
      out.re(j, i) = re * inv_m;
      out.im(j, i) = -im * inv_m;
    }
    out.im(i, i) = 0.0;
  }
  return out;
}

ComplexMatrix model_covariance(const std::vector<double>& alpha, const ComplexMatrix& a,
                               double sigma2) {
  const std::size_t L = a.rows();
  detail::require(alpha.size() == a.cols(), "model_covariance: alpha length != N");
  ComplexMatrix out = ComplexMatrix::identity(L);
  out *= sigma2;
  for (std::size_t n = 0; n < a.cols(); ++n) {
    if (alpha[n] == 0.0) continue;
    for (std::size_t i = 0; i < L; ++i) {
      const cplx ai = a(i, n);
      for (std::size_t j = 0; j < L; ++j) {
        const cplx v = alpha[n] * ai * std::conj(a(j, n));
        out.re(i, j) += v.real();
        out.im(i, j) += v.imag();
      }
    }
  }
  return out;
}

MapState init_map_state(const ComplexMatrix& y, const ComplexMatrix& a, const MapConfig& config) {
  config.validate(a.cols());
  detail::require(y.rows() == a.rows(), "solve_map: Y and A row counts differ");
  MapState s;
  s.alpha.assign(a.cols(), 0.0);
  s.sinv = ComplexMatrix::identity(a.rows());
  s.sinv *= 1.0 / config.sigma2;
  s.sigma = ComplexMatrix::identity(a.rows());
  s.sigma *= config.sigma2;
  s.sigma_hat = empirical_covariance(y);
  s.antennas = y.cols();
  return s;
}

double coordinate_increment(double s, double q, double c) {
  const double disc = s * s - 4.0 * c * q;
  double u;
  if (disc <= 0.0) {
    u = s / (2.0 * c);
  } else {
    u = 2.0 * q / (s + std::sqrt(disc));
  }
  return (u - 1.0) / s;
}

double coordinate_increment_quotient(double s, double q, double c) {
  const double b = s * s - 2.0 * c * s;
  const double delta = std::max(b * b + 4.0 * c * s * s * (s - q - c), 0.0);
  return (b - std::sqrt(delta)) / (2.0 * c * s * s);
}

double coordinate_increment_ml(double s, double q) { return (q - s) / (s * s); }

CoordinateStep coordinate_step(MapState& st, std::size_t n, const ComplexMatrix& a,
                               const MapConfig& cfg) {
  detail::require(n < a.cols(), "coordinate_step: index out of range");
  const std::size_t L = a.rows();
  std::vector<cplx> w;
  hermitian_times_column(st.sinv, a, n, w);
  double s = 0.0;
  for (std::size_t i = 0; i < L; ++i) s += (std::conj(a(i, n)) * w[i]).real();
  const double q = hermitian_form(st.sigma_hat, w);

  CoordinateStep step;
  step.s = s;
  step.q = q;
  double d;
  if (cfg.variant == MapVariant::kMl) {
    d = coordinate_increment_ml(s, q);
  } else {
    const double c = prior_slope(cfg, n, st.antennas);
    if (s * s - 4.0 * c * q < 0.0) ++st.clamped_discriminants;
    d = coordinate_increment(s, q, c);
  }
  d = std::max(d, -st.alpha[n]);
  const double denom = 1.0 + d * s;
  if (!std::isfinite(d) || denom <= 0.0) {
    ++st.rejected_steps;
    d = 0.0;
  }
  step.d = d;
  if (d != 0.0) {
    st.alpha[n] += d;
    const double k = d / denom;
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t j = 0; j < L; ++j) {
        const cplx upd = k * w[i] * std::conj(w[j]);
        st.sinv.re(i, j) -= upd.real();
        st.sinv.im(i, j) -= upd.imag();
        const cplx grow = d * a(i, n) * std::conj(a(j, n));
        st.sigma.re(i, j) += grow.real();
        st.sigma.im(i, j) += grow.imag();
      }
    }
  }
  step.alpha = st.alpha[n];
  ++st.steps;
  if (cfg.refresh_interval > 0 && st.steps % cfg.refresh_interval == 0 &&
      inverse_drift(st) > cfg.drift_tol) {
    rebuild_inverse(st, a, cfg.sigma2);
  }
  return step;
}

double f_map(const std::vector<double>& alpha, const ComplexMatrix& a,
             const ComplexMatrix& sigma_hat, std::size_t antennas, const MapConfig& config) {
  for (double v : alpha) detail::require(v >= 0.0, "f_map: alpha must be nonnegative");
  const Eigen::MatrixXcd sigma = detail::to_eigen(model_covariance(alpha, a, config.sigma2));
  Eigen::LLT<Eigen::MatrixXcd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw ContractViolation("f_map: model covariance is not positive definite");
  }
  double logdet = 0.0;
  const Eigen::MatrixXcd lower = llt.matrixL();
  for (Eigen::Index i = 0; i < lower.rows(); ++i) logdet += 2.0 * std::log(lower(i, i).real());
  const double trace = llt.solve(detail::to_eigen(sigma_hat)).trace().real();
  double prior = 0.0;
  if (config.variant == MapVariant::kMap) {
    for (std::size_t n = 0; n < alpha.size(); ++n) {
      prior += alpha[n] * std::log(config.eps[n]) + (1.0 - alpha[n]) * std::log(1.0 - config.eps[n]);
    }
    prior /= static_cast<double>(antennas);
  }
  return logdet + trace - prior;
}

double inverse_drift(const MapState& st) {
  ComplexMatrix prod = complex_matmul(st.sinv, st.sigma);
  prod -= ComplexMatrix::identity(prod.rows());
  return prod.norm();
}

void rebuild_inverse(MapState& st, const ComplexMatrix& a, double sigma2) {
  st.sigma = model_covariance(st.alpha, a, sigma2);
  const Eigen::MatrixXcd sigma = detail::to_eigen(st.sigma);
  Eigen::LLT<Eigen::MatrixXcd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw ContractViolation("rebuild_inverse: model covariance is not positive definite");
  }
  Eigen::MatrixXcd inv = llt.solve(Eigen::MatrixXcd::Identity(sigma.rows(), sigma.cols()));
  inv = 0.5 * (inv + inv.adjoint()).eval();
  st.sinv = detail::from_eigen(inv);
  ++st.rebuilds;
}

MapResult solve_map(const ComplexMatrix& y, const ComplexMatrix& a, const MapConfig& config,
                    bool track_objective) {
  MapState st = init_map_state(y, a, config);
  MapResult result;
  while (st.k < config.k_max) {
    double largest = 0.0;
    for (std::size_t n = 0; n < a.cols(); ++n) {
      const CoordinateStep step = coordinate_step(st, n, a, config);
      largest = std::max(largest, std::abs(step.d));
    }
    ++st.k;
    if (track_objective) {
      result.objective_trace.push_back(f_map(st.alpha, a, st.sigma_hat, st.antennas, config));
    }
    if (largest < config.tol) {
      result.converged = true;
      break;
    }
  }
  result.alpha = st.alpha;
  result.sweeps = st.k;
  result.clamped_discriminants = st.clamped_discriminants;
  result.rejected_steps = st.rejected_steps;
  result.rebuilds = st.rebuilds;
  return result;
}

ComplexMatrix mmse_given_support(const ComplexMatrix& y, const ComplexMatrix& a,
                                 const Support& alpha_hat, double sigma2) {
  detail::require(alpha_hat.size() == a.cols(), "mmse_given_support: alpha length != N");
  detail::require(sigma2 > 0.0, "mmse_given_support: sigma2 must be positive");
  detail::require(y.rows() == a.rows(), "mmse_given_support: Y and A row counts differ");
  ComplexMatrix out(a.cols(), y.cols());
  std::vector<double> gamma(a.cols());
  bool any = false;
  for (std::size_t n = 0; n < a.cols(); ++n) {
    detail::require(alpha_hat[n] <= 1, "mmse_given_support: alpha must be binary");
    gamma[n] = alpha_hat[n];
    any = any || alpha_hat[n];
  }
  if (!any) return out;
  const Eigen::MatrixXcd sigma = detail::to_eigen(model_covariance(gamma, a, sigma2));
  Eigen::LLT<Eigen::MatrixXcd> llt(sigma);
  const Eigen::MatrixXcd w = llt.solve(detail::to_eigen(y));  // Σ⁻¹Y
  const ComplexMatrix w_split = detail::from_eigen(w);
  const ComplexMatrix aw = adjoint_matmul(a, w_split);
  for (std::size_t n = 0; n < a.cols(); ++n) {
    if (!alpha_hat[n]) continue;
    for (std::size_t m = 0; m < y.cols(); ++m) out.set(n, m, aw(n, m));
  }
  return out;
}

}  // namespace mmv

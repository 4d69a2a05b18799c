#include "mmv/amp.hpp"

#include <algorithm>
#include <cmath>

#include "mmv/errors.hpp"

namespace mmv {

namespace {

constexpr double kLogTMin = -690.7755278982137;  // log(1e-300)
constexpr double kLogTMax = 690.7755278982137;

double clamp_tau(double tau, double floor) { return std::max(tau, floor); }

}  // namespace

AmpConfig AmpConfig::uniform(std::size_t n, double eps) {
  AmpConfig cfg;
  cfg.eps.assign(n, eps);
  return cfg;
}

void AmpConfig::validate(std::size_t n) const {
  detail::require(eps.size() == n, "AmpConfig: eps length must equal N");
  for (double e : eps) detail::require(e > 0.0 && e < 1.0, "AmpConfig: eps(n) must lie in (0, 1)");
  detail::require(k_max >= 1, "AmpConfig: k_max must be at least 1");
  detail::require(tau_floor > 0.0, "AmpConfig: tau_floor must be positive");
  detail::require(damping >= 0.0 && damping < 1.0, "AmpConfig: damping must lie in [0, 1)");
}

double log_likelihood_ratio(double pseudo_norm2, double tau, double eps, std::size_t m) {
  const double tau2 = tau * tau;
  return std::log((1.0 - eps) / eps) +
         static_cast<double>(m) * std::log1p(1.0 / tau2) -
         pseudo_norm2 / (tau2 * (tau2 + 1.0));
}

double likelihood_ratio(double pseudo_norm2, double tau, double eps, std::size_t m) {
  return std::exp(std::clamp(log_likelihood_ratio(pseudo_norm2, tau, eps, m), kLogTMin, kLogTMax));
}

std::vector<cplx> mmse_denoise_row(std::span<const cplx> pseudo, double tau, double eps) {
  detail::require(tau > 0.0, "mmse_denoise_row: tau must be positive");
  detail::require(eps > 0.0 && eps < 1.0, "mmse_denoise_row: eps must lie in (0, 1)");
  double norm2 = 0.0;
  for (auto v : pseudo) norm2 += std::norm(v);
  const double t = likelihood_ratio(norm2, tau, eps, pseudo.size());
  const double gain = 1.0 / ((tau * tau + 1.0) * (1.0 + t));
  std::vector<cplx> out(pseudo.size());
  for (std::size_t m = 0; m < pseudo.size(); ++m) out[m] = gain * pseudo[m];
  return out;
}

ComplexMatrix pseudo_observations(const AmpState& state, const ComplexMatrix& a) {
  ComplexMatrix v = adjoint_matmul(a, state.r);
  v += state.x;
  return v;
}

ComplexMatrix onsager_matrix(const ComplexMatrix& pseudo, double tau,
                             std::span<const double> t_lr, OnsagerForm form) {
  const std::size_t N = pseudo.rows(), M = pseudo.cols();
  detail::require(t_lr.size() == N, "onsager_matrix: t(n) length must equal N");
  const double tau2 = tau * tau;
  const double c = 1.0 / (tau2 + 1.0);
  ComplexMatrix s(M, M);
  if (form == OnsagerForm::kAsPrinted) {
    double coef = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const double t = t_lr[n];
      double v2 = 0.0;
      for (std::size_t m = 0; m < M; ++m) v2 += std::norm(pseudo(n, m));
      const double inv = 1.0 / (1.0 + t);
      coef += c * inv + t * inv * inv * v2 / ((tau2 + 1.0) * (tau2 + 1.0) * tau2 * tau2);
    }
    for (std::size_t m = 0; m < M; ++m) s.re(m, m) = coef;
    return s;
  }
  double diag = 0.0;
  const double rank_scale = 1.0 / ((tau2 + 1.0) * (tau2 + 1.0) * tau2);
  for (std::size_t n = 0; n < N; ++n) {
    const double inv = 1.0 / (1.0 + t_lr[n]);
    diag += c * inv;
    const double w = t_lr[n] * inv * inv * rank_scale;
    if (w == 0.0) continue;
    // w · conj(v)ᵀ v : entry (i, j) = w · conj(v_i) · v_j
    for (std::size_t i = 0; i < M; ++i) {
      const double vr_i = pseudo.re(n, i), vi_i = -pseudo.im(n, i);
      for (std::size_t j = 0; j < M; ++j) {
        const double vr_j = pseudo.re(n, j), vi_j = pseudo.im(n, j);
        s.re(i, j) += w * (vr_i * vr_j - vi_i * vi_j);
        s.im(i, j) += w * (vr_i * vi_j + vi_i * vr_j);
      }
    }
  }
  for (std::size_t m = 0; m < M; ++m) s.re(m, m) += diag;
  s *= 1.0 / static_cast<double>(N);
  return s;
}

ComplexMatrix onsager_residual(const AmpState& state, const ComplexMatrix& y,
                               const ComplexMatrix& a, const ComplexMatrix& x_next,
                               const ComplexMatrix& s) {
  const double ratio = static_cast<double>(a.cols()) / static_cast<double>(a.rows());
  ComplexMatrix r = y;
  r -= complex_matmul(a, x_next);
  r += ratio * complex_matmul(state.r, s);
  if (!r.all_finite()) throw DivergenceError("AMP", state.k + 1);
  return r;
}

AmpState init_amp_state(const ComplexMatrix& y, std::size_t n, const AmpConfig& config) {
  AmpState s;
  s.x = ComplexMatrix(n, y.cols());
  s.r = y;
  s.t_lr.assign(n, 1.0);
  const double lm = static_cast<double>(y.rows() * y.cols());
  s.tau = clamp_tau(std::sqrt(1.0 / lm) * y.norm(), config.tau_floor);
  return s;
}

AmpIterate amp_iterate(AmpState& s, const ComplexMatrix& y, const ComplexMatrix& a,
                       const AmpConfig& cfg) {
  const std::size_t N = a.cols(), M = y.cols();
  const double lm = static_cast<double>(a.rows() * M);
  s.tau = clamp_tau(std::sqrt(1.0 / lm) * s.r.norm(), cfg.tau_floor);

  const ComplexMatrix v = pseudo_observations(s, a);
  ComplexMatrix x_next(N, M);
  std::vector<cplx> row(M);
  for (std::size_t n = 0; n < N; ++n) {
    double v2 = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      row[m] = v(n, m);
      v2 += std::norm(row[m]);
    }
    s.t_lr[n] = likelihood_ratio(v2, s.tau, cfg.eps[n], M);
    x_next.set_row(n, mmse_denoise_row(row, s.tau, cfg.eps[n]));
  }
  if (cfg.damping > 0.0) {
    x_next *= 1.0 - cfg.damping;
    x_next += cfg.damping * s.x;
  }
  const ComplexMatrix onsager = onsager_matrix(v, s.tau, s.t_lr, cfg.onsager);
  ComplexMatrix r_next = onsager_residual(s, y, a, x_next, onsager);

  AmpIterate it;
  it.relative_change = frobenius_distance(x_next, s.x) / std::max(s.x.norm(), 1.0);
  s.x = std::move(x_next);
  s.r = std::move(r_next);
  ++s.k;
  it.iteration = s.k;
  it.tau = s.tau;
  it.residual_norm = s.r.norm();
  return it;
}

AmpResult solve_amp(const ComplexMatrix& y, const ComplexMatrix& a, const AmpConfig& config) {
  config.validate(a.cols());
  detail::require(y.rows() == a.rows(), "solve_amp: Y and A row counts differ");

  AmpResult result;
  ComplexMatrix ys = y, as = a;
  if (config.normalize_pilots) {
    const auto norms2 = column_squared_norms(a);
    double mean = 0.0;
    for (double v : norms2) mean += v;
    mean /= static_cast<double>(norms2.size());
    detail::require(mean > 0.0, "solve_amp: pilot matrix is zero");
    result.pilot_scale = 1.0 / std::sqrt(mean);
    ys *= result.pilot_scale;
    as *= result.pilot_scale;
  }

  AmpState s = init_amp_state(ys, a.cols(), config);
  while (s.k < config.k_max) {
    AmpIterate it = amp_iterate(s, ys, as, config);
    result.trace.push_back(it);
    if (it.relative_change < config.rel_tol) {
      result.converged = true;
      break;
    }
  }
  result.iterations = s.k;
  result.activity.resize(a.cols());
  for (std::size_t n = 0; n < a.cols(); ++n) result.activity[n] = 1.0 / (1.0 + s.t_lr[n]);
  result.x = std::move(s.x);
  return result;
}

}  // namespace mmv

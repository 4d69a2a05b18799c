#include "mmv/group_lasso.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "mmv/errors.hpp"

namespace mmv {

namespace {

// W = B̄ − AX̄ − C, shared by every row's t vector.
ComplexMatrix shared_offset(const AdmmState& s) {
  ComplexMatrix w = s.bbar;
  w -= s.axbar;
  w -= s.c;
  return w;
}

std::vector<cplx> shrink_row(std::span<const cplx> t, double col_norm2, const AdmmConfig& cfg) {
  double tn2 = 0.0;
  for (auto v : t) tn2 += std::norm(v);
  const double tn = std::sqrt(tn2);
  std::vector<cplx> out(t.size(), cplx{});
  if (cfg.rho * tn <= cfg.lambda) return out;
  const double scale = (1.0 - cfg.lambda / (cfg.rho * tn)) / col_norm2;
  for (std::size_t m = 0; m < t.size(); ++m) out[m] = scale * t[m];
  return out;
}

}  // namespace

void AdmmConfig::validate() const {
  detail::require(rho > 0.0, "AdmmConfig: rho must be positive");
  detail::require(lambda >= 0.0, "AdmmConfig: lambda must be nonnegative");
  detail::require(k_max >= 1, "AdmmConfig: k_max must be at least 1");
  detail::require(eps_abs > 0.0 && eps_rel > 0.0, "AdmmConfig: tolerances must be positive");
}

AdmmState init_admm_state(const ComplexMatrix& a, std::size_t antennas) {
  AdmmState s;
  s.x = ComplexMatrix(a.cols(), antennas);
  s.bbar = ComplexMatrix(a.rows(), antennas);
  s.c = ComplexMatrix(a.rows(), antennas);
  s.axbar = ComplexMatrix(a.rows(), antennas);
  s.col_norms2 = column_squared_norms(a);
  for (double v : s.col_norms2) {
    detail::require(v > 0.0, "group lasso: pilot matrix has a zero column");
  }
  return s;
}

std::vector<cplx> row_update(const AdmmState& state, const ComplexMatrix& a,
                             std::size_t n, const AdmmConfig& config) {
  detail::require(n < a.cols(), "row_update: index out of range");
  detail::require(state.col_norms2[n] > 0.0, "row_update: zero pilot column");
  const std::size_t L = a.rows(), M = state.x.cols();
  const ComplexMatrix w = shared_offset(state);
  std::vector<cplx> t(M);
  for (std::size_t m = 0; m < M; ++m) {
    cplx acc = state.col_norms2[n] * state.x(n, m);
    for (std::size_t l = 0; l < L; ++l) acc += std::conj(a(l, n)) * w(l, m);
    t[m] = acc;
  }
  return shrink_row(t, state.col_norms2[n], config);
}

ComplexMatrix bbar_update(const AdmmState& state, const ComplexMatrix& y,
                          const AdmmConfig& config) {
  detail::require(y.rows() == state.bbar.rows() && y.cols() == state.bbar.cols(),
                  "bbar_update: Y shape does not match state");
  const double n = static_cast<double>(state.x.rows());
  ComplexMatrix out = y;
  out += config.rho * state.axbar;
  out += config.rho * state.c;
  out *= 1.0 / (n + config.rho);
  return out;
}

ComplexMatrix dual_update(const AdmmState& state) {
  ComplexMatrix out = state.c;
  out += state.axbar;
  out -= state.bbar;
  return out;
}

AdmmIterate admm_iterate(AdmmState& s, const ComplexMatrix& a, const ComplexMatrix& y,
                         const AdmmConfig& cfg) {
  const std::size_t N = a.cols(), M = s.x.cols();
  // t_n = ‖a_n‖²·x_n + a_nᴴW for all n at once.
  const ComplexMatrix t_all = adjoint_matmul(a, shared_offset(s));
  ComplexMatrix x_next(N, M);
  std::vector<cplx> t(M);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t m = 0; m < M; ++m) t[m] = s.col_norms2[n] * s.x(n, m) + t_all(n, m);
    x_next.set_row(n, shrink_row(t, s.col_norms2[n], cfg));
  }
  s.x = std::move(x_next);
  s.axbar = complex_matmul(a, s.x);
  s.axbar *= 1.0 / static_cast<double>(N);

  ComplexMatrix bbar_prev = std::move(s.bbar);
  s.bbar = bbar_update(s, y, cfg);
  s.c = dual_update(s);
  ++s.k;

  AdmmIterate it;
  it.iteration = s.k;
  it.primal_residual = frobenius_distance(s.axbar, s.bbar);
  it.dual_residual = cfg.rho * frobenius_distance(s.bbar, bbar_prev);

  // AX = N·AX̄, so the data term needs no extra product.
  double fit = 0.0;
  for (std::size_t l = 0; l < y.rows(); ++l) {
    for (std::size_t m = 0; m < M; ++m) {
      fit += std::norm(static_cast<double>(N) * s.axbar(l, m) - y(l, m));
    }
  }
  double penalty = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    double r2 = 0.0;
    for (std::size_t m = 0; m < M; ++m) r2 += std::norm(s.x(n, m));
    penalty += std::sqrt(r2);
  }
  it.objective = 0.5 * fit + cfg.lambda * penalty;
  return it;
}

GroupLassoResult solve_group_lasso(const ComplexMatrix& y, const ComplexMatrix& a,
                                   const AdmmConfig& config) {
  config.validate();
  detail::require(y.rows() == a.rows(), "solve_group_lasso: Y and A row counts differ");
  AdmmState s = init_admm_state(a, y.cols());
  GroupLassoResult result;
  const double sqrt_lm = std::sqrt(static_cast<double>(y.rows() * y.cols()));
  while (s.k < config.k_max) {
    AdmmIterate it = admm_iterate(s, a, y, config);
    if (!std::isfinite(it.objective) || !s.x.all_finite() || !s.c.all_finite()) {
      throw DivergenceError("group lasso ADMM", it.iteration);
    }
    result.trace.push_back(it);
    const double eps_pri =
        sqrt_lm * config.eps_abs + config.eps_rel * std::max(s.axbar.norm(), s.bbar.norm());
    const double eps_dual = sqrt_lm * config.eps_abs + config.eps_rel * config.rho * s.c.norm();
    if (it.primal_residual <= eps_pri && it.dual_residual <= eps_dual) {
      result.converged = true;
      break;
    }
  }
  result.iterations = s.k;
  result.x = std::move(s.x);
  return result;
}

double group_lasso_objective(const ComplexMatrix& a, const ComplexMatrix& x,
                             const ComplexMatrix& y, double lambda) {
  const ComplexMatrix ax = complex_matmul(a, x);
  const double fit = frobenius_distance(ax, y);
  double penalty = 0.0;
  for (std::size_t n = 0; n < x.rows(); ++n) {
    double r2 = 0.0;
    for (std::size_t m = 0; m < x.cols(); ++m) r2 += std::norm(x(n, m));
    penalty += std::sqrt(r2);
  }
  return 0.5 * fit * fit + lambda * penalty;
}

void write_admm_trace_csv(const std::vector<AdmmIterate>& trace, std::ostream& os) {
  os << "iteration,objective,primal_residual,dual_residual\n";
  os << std::setprecision(17);
  for (const auto& it : trace) {
    os << it.iteration << ',' << it.objective << ',' << it.primal_residual << ','
       << it.dual_residual << '\n';
  }
}

}  // namespace mmv
